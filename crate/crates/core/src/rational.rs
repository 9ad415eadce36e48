//! Exact rational numbers used for every timeline position and score.
//!
//! Arithmetic never wraps: the `checked_*` methods report overflow and the
//! operator impls panic on it.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    pub fn new(numer: i128, denom: i128) -> Result<Rational, Error> {
        if denom == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        if numer == i128::MIN || denom == i128::MIN {
            return Err(Error::Overflow);
        }
        Ok(Rational(Ratio::new(numer, denom)))
    }

    pub fn from_integer(n: i128) -> Rational {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn checked_add(&self, rhs: &Rational) -> Result<Rational, Error> {
        self.0.checked_add(&rhs.0).map(Rational).ok_or(Error::Overflow)
    }

    pub fn checked_sub(&self, rhs: &Rational) -> Result<Rational, Error> {
        self.0.checked_sub(&rhs.0).map(Rational).ok_or(Error::Overflow)
    }

    pub fn checked_mul(&self, rhs: &Rational) -> Result<Rational, Error> {
        self.0.checked_mul(&rhs.0).map(Rational).ok_or(Error::Overflow)
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, Error> {
        if rhs.is_zero() {
            return Err(Error::InvalidArgument("division by zero".into()));
        }
        self.0.checked_div(&rhs.0).map(Rational).ok_or(Error::Overflow)
    }

    /// Floor to an integer.
    pub fn floor(&self) -> i128 {
        num_integer::Integer::div_floor(&self.numer(), &self.denom())
    }

    /// Lossy conversion for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// Exact conversion of a finite `f64` through its shortest decimal form,
    /// so `0.7` becomes `7/10` rather than the binary expansion.
    pub fn from_f64_decimal(value: f64) -> Result<Rational, Error> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite number {value}")));
        }
        format!("{value}").parse()
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `n`, `n/d`, decimals like `-0.25` and exponent forms like `1e-3`.
    fn from_str(s: &str) -> Result<Rational, Error> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            return Rational::new(n, d);
        }
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(idx) => {
                let e: i32 = s[idx + 1..].parse().map_err(|_| bad())?;
                (&s[..idx], e)
            }
            None => (s, 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let all_digits = format!("{int_part}{frac_part}");
        let mut numer: i128 = all_digits.parse().map_err(|_| Error::Overflow)?;
        if neg {
            numer = -numer;
        }
        let scale = exp - frac_part.len() as i32;
        let pow = 10i128
            .checked_pow(scale.unsigned_abs())
            .ok_or(Error::Overflow)?;
        if scale >= 0 {
            Ok(Rational::from_integer(numer.checked_mul(pow).ok_or(Error::Overflow)?))
        } else {
            Rational::new(numer, pow)
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Rational {
        Rational::from_integer(n as i128)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        self.checked_add(&rhs).expect("rational overflow in addition")
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        self.checked_sub(&rhs).expect("rational overflow in subtraction")
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        self.checked_mul(&rhs).expect("rational overflow in multiplication")
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
            Float(f64),
        }
        let parsed = match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse(),
            Repr::Int(n) => Ok(Rational::from(n)),
            Repr::Float(x) => Rational::from_f64_decimal(x),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!("0.7".parse::<Rational>().unwrap(), Rational::new(7, 10).unwrap());
        assert_eq!("-3/6".parse::<Rational>().unwrap(), Rational::new(-1, 2).unwrap());
        assert_eq!("1e-3".parse::<Rational>().unwrap(), Rational::new(1, 1000).unwrap());
        assert_eq!("2.5E1".parse::<Rational>().unwrap(), Rational::from_integer(25));
        assert!("abc".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn float_conversion_uses_shortest_decimal() {
        assert_eq!(Rational::from_f64_decimal(0.1).unwrap(), Rational::new(1, 10).unwrap());
        assert_eq!(Rational::from_f64_decimal(0.45).unwrap(), Rational::new(9, 20).unwrap());
        assert!(Rational::from_f64_decimal(f64::NAN).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = Rational::from_integer(i128::MAX / 2 + 1);
        assert!(matches!(big.checked_add(&big), Err(Error::Overflow)));
        assert!(matches!(big.checked_mul(&big), Err(Error::Overflow)));
    }

    #[test]
    fn floor_rounds_toward_negative_infinity() {
        assert_eq!(Rational::new(-7, 2).unwrap().floor(), -4);
        assert_eq!(Rational::new(7, 2).unwrap().floor(), 3);
    }
}
