//! Semantic objects of the temporal framework: units, lengths, timeline
//! points and the four expression shapes (instant, interval, range, bare
//! length).
//!
//! Every position is a [`Rational`] count of hours. Known positions are
//! measured from the global epoch 2000-01-01T00:00; anchored positions are
//! measured from their anchor until [`crate::normalize`] resolves them.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::normalize::{self, CalendarDateTime};
use crate::rational::Rational;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Second,
    Minute,
    Hour,
    Day,
    Week,
    Month,
    Quarter,
    Year,
    Decade,
}

impl UnitKind {
    pub const ALL: [UnitKind; 9] = [
        UnitKind::Second,
        UnitKind::Minute,
        UnitKind::Hour,
        UnitKind::Day,
        UnitKind::Week,
        UnitKind::Month,
        UnitKind::Quarter,
        UnitKind::Year,
        UnitKind::Decade,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnitKind::Second => "second",
            UnitKind::Minute => "minute",
            UnitKind::Hour => "hour",
            UnitKind::Day => "day",
            UnitKind::Week => "week",
            UnitKind::Month => "month",
            UnitKind::Quarter => "quarter",
            UnitKind::Year => "year",
            UnitKind::Decade => "decade",
        }
    }

    /// Singular or plural unit word, case-insensitive.
    pub fn from_word(word: &str) -> Option<UnitKind> {
        let w = word.to_ascii_lowercase();
        let stem = w.strip_suffix('s').unwrap_or(&w);
        UnitKind::ALL.into_iter().find(|u| u.name() == stem)
    }
}

/// Fixed hour factor of a unit.
///
/// Months count 30 days and years 365 days. These conventions apply to bare
/// durations only; explicit calendar references are resolved with exact
/// month lengths during normalization.
pub fn unit_to_hours(unit: UnitKind) -> Rational {
    let hours: i128 = match unit {
        UnitKind::Second => return Rational::new(1, 3600).expect("nonzero"),
        UnitKind::Minute => return Rational::new(1, 60).expect("nonzero"),
        UnitKind::Hour => 1,
        UnitKind::Day => 24,
        UnitKind::Week => 168,
        UnitKind::Month => 720,
        UnitKind::Quarter => 2160,
        UnitKind::Year => 8760,
        UnitKind::Decade => 87600,
    };
    Rational::from_integer(hours)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Length {
    number: Rational,
    unit: UnitKind,
    hours: Rational,
}

impl Length {
    pub fn number(&self) -> Rational {
        self.number
    }

    pub fn unit(&self) -> UnitKind {
        self.unit
    }

    pub fn hours(&self) -> Rational {
        self.hours
    }

    pub fn from_hours(hours: Rational) -> Result<Length> {
        length_from(hours, UnitKind::Hour)
    }
}

pub fn length_from(number: Rational, unit: UnitKind) -> Result<Length> {
    if number.is_negative() {
        return Err(Error::InvalidArgument(format!("negative length {number}")));
    }
    let hours = number.checked_mul(&unit_to_hours(unit))?;
    Ok(Length { number, unit, hours })
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Length({},{})", self.number, self.unit.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnchorKind {
    /// The document creation time.
    Present,
    ExplicitDate { date: CalendarDateTime },
    /// Start of the named month (1-12) in the document's year.
    Month { month: u32 },
    /// Start of the named weekday (0 = Monday) nearest the document date.
    Weekday { weekday: u32 },
    /// Start of the calendar unit containing the document date, moved by
    /// `shift` whole units.
    CalendarUnit { unit: UnitKind, shift: i32 },
}

impl fmt::Display for AnchorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const WEEKDAYS: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];
        match self {
            AnchorKind::Present => write!(f, "present"),
            AnchorKind::ExplicitDate { date } => write!(f, "date:{date}"),
            AnchorKind::Month { month } => write!(f, "month:{month}"),
            AnchorKind::Weekday { weekday } => {
                write!(f, "weekday:{}", WEEKDAYS[*weekday as usize % 7])
            }
            AnchorKind::CalendarUnit { unit, shift } => {
                write!(f, "{}:{shift:+}", unit.name())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimePoint {
    Known {
        hours: Rational,
    },
    /// `offset` is signed hours from the anchor. `dist` keeps the unsigned
    /// textual length the offset came from, for rendering only.
    RelativeToAnchor {
        anchor: AnchorKind,
        offset: Rational,
        dist: Option<Length>,
    },
    Unknown,
}

impl TimePoint {
    pub fn known(hours: Rational) -> TimePoint {
        TimePoint::Known { hours }
    }

    pub fn anchored(anchor: AnchorKind, offset: Rational) -> TimePoint {
        TimePoint::RelativeToAnchor { anchor, offset, dist: None }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, TimePoint::Unknown)
    }

    pub fn known_hours(&self) -> Option<Rational> {
        match self {
            TimePoint::Known { hours } => Some(*hours),
            _ => None,
        }
    }

    /// Shift a point along the timeline. Unknown stays unknown and the
    /// rendering hint is dropped.
    pub fn shifted(&self, delta: Rational) -> Result<TimePoint> {
        Ok(match self {
            TimePoint::Known { hours } => TimePoint::known(hours.checked_add(&delta)?),
            TimePoint::RelativeToAnchor { anchor, offset, .. } => {
                TimePoint::anchored(*anchor, offset.checked_add(&delta)?)
            }
            TimePoint::Unknown => TimePoint::Unknown,
        })
    }

    /// Signed distance `self - other` when the two points are comparable.
    pub fn difference(&self, other: &TimePoint) -> Result<Rational> {
        match (self, other) {
            (TimePoint::Known { hours: a }, TimePoint::Known { hours: b }) => a.checked_sub(b),
            (
                TimePoint::RelativeToAnchor { anchor: x, offset: a, .. },
                TimePoint::RelativeToAnchor { anchor: y, offset: b, .. },
            ) if x == y => a.checked_sub(b),
            _ => Err(Error::Incomparable(format!("{self} vs {other}"))),
        }
    }
}

/// Order two points that are both known or share the same anchor.
pub fn compare_known(a: &TimePoint, b: &TimePoint) -> Result<Ordering> {
    match (a, b) {
        (TimePoint::Known { hours: x }, TimePoint::Known { hours: y }) => Ok(x.cmp(y)),
        (
            TimePoint::RelativeToAnchor { anchor: p, offset: x, .. },
            TimePoint::RelativeToAnchor { anchor: q, offset: y, .. },
        ) if p == q => Ok(x.cmp(y)),
        _ => Err(Error::Incomparable(format!("{a} vs {b}"))),
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePoint::Known { hours } => match normalize::date_at(*hours) {
                Some(date) if date.is_whole_minute() => write!(f, "at={date}"),
                _ => write!(f, "at={hours}h"),
            },
            TimePoint::RelativeToAnchor { anchor, offset, dist } => {
                write!(f, "anchor={anchor}")?;
                match dist {
                    Some(len) if len.hours() == offset.abs() && !offset.is_zero() => {
                        write!(f, ",dist={len}")?;
                        if !offset.is_negative() {
                            write!(f, ",dir=after")?;
                        }
                        Ok(())
                    }
                    _ if offset.is_zero() => Ok(()),
                    _ => write!(f, ",offset={offset}h"),
                }
            }
            TimePoint::Unknown => write!(f, "Unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type")]
pub enum TimeExpression {
    Instant {
        position: TimePoint,
    },
    /// The start and end are the event's own endpoints.
    Interval {
        start: TimePoint,
        end: TimePoint,
        length: Option<Length>,
    },
    /// Outer bounds the event falls within. `span_length` is the width of
    /// the bounds when stated; `inner_length` the event's own duration.
    Range {
        lower: TimePoint,
        upper: TimePoint,
        span_length: Option<Length>,
        inner_length: Option<Length>,
    },
    BareLength {
        length: Length,
    },
}

impl TimeExpression {
    pub fn instant(position: TimePoint) -> TimeExpression {
        TimeExpression::Instant { position }
    }

    pub fn interval(start: TimePoint, end: TimePoint, length: Option<Length>) -> Result<TimeExpression> {
        let expr = TimeExpression::Interval { start, end, length };
        expr.validate()?;
        Ok(expr)
    }

    pub fn range(
        lower: TimePoint,
        upper: TimePoint,
        span_length: Option<Length>,
        inner_length: Option<Length>,
    ) -> Result<TimeExpression> {
        let expr = TimeExpression::Range { lower, upper, span_length, inner_length };
        expr.validate()?;
        Ok(expr)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TimeExpression::Instant { .. } => "Instant",
            TimeExpression::Interval { .. } => "Interval",
            TimeExpression::Range { .. } => "Range",
            TimeExpression::BareLength { .. } => "Length",
        }
    }

    pub fn is_complete(&self) -> bool {
        !matches!(self, TimeExpression::BareLength { .. })
    }

    /// Check the shape invariants: an interval with known endpoints and a
    /// length spans exactly that length, and known range bounds are ordered.
    pub fn validate(&self) -> Result<()> {
        match self {
            TimeExpression::Interval { start, end, length: Some(len) } => {
                if let (Some(s), Some(e)) = (start.known_hours(), end.known_hours()) {
                    if e.checked_sub(&s)? != len.hours() {
                        return Err(Error::InvalidArgument(format!(
                            "interval endpoints {s}h..{e}h disagree with {len}"
                        )));
                    }
                }
                Ok(())
            }
            TimeExpression::Range { lower, upper, .. } => {
                if let (Some(l), Some(u)) = (lower.known_hours(), upper.known_hours()) {
                    if l > u {
                        return Err(Error::InvalidArgument(format!(
                            "range lower bound {l}h exceeds upper bound {u}h"
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Every timeline point the expression mentions.
    pub fn points(&self) -> Vec<&TimePoint> {
        match self {
            TimeExpression::Instant { position } => vec![position],
            TimeExpression::Interval { start, end, .. } => vec![start, end],
            TimeExpression::Range { lower, upper, .. } => vec![lower, upper],
            TimeExpression::BareLength { .. } => vec![],
        }
    }

    /// Apply `f` to every point, rebuilding and revalidating the expression.
    pub fn map_points<F>(&self, mut f: F) -> Result<TimeExpression>
    where
        F: FnMut(&TimePoint) -> Result<TimePoint>,
    {
        let mapped = match self {
            TimeExpression::Instant { position } => TimeExpression::Instant { position: f(position)? },
            TimeExpression::Interval { start, end, length } => TimeExpression::Interval {
                start: f(start)?,
                end: f(end)?,
                length: *length,
            },
            TimeExpression::Range { lower, upper, span_length, inner_length } => TimeExpression::Range {
                lower: f(lower)?,
                upper: f(upper)?,
                span_length: *span_length,
                inner_length: *inner_length,
            },
            TimeExpression::BareLength { length } => TimeExpression::BareLength { length: *length },
        };
        mapped.validate()?;
        Ok(mapped)
    }
}

struct Nested<'a>(&'a TimePoint);

impl fmt::Display for Nested<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            TimePoint::Unknown => write!(f, "Unknown"),
            p => write!(f, "Instant({p})"),
        }
    }
}

struct OptLength<'a>(&'a Option<Length>);

impl fmt::Display for OptLength<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(len) => write!(f, "{len}"),
            None => write!(f, "Unknown"),
        }
    }
}

/// Canonical rendering, e.g. `Instant(anchor=present,dist=Length(3,day))`.
impl fmt::Display for TimeExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeExpression::Instant { position } => write!(f, "Instant({position})"),
            TimeExpression::Interval { start, end, length } => write!(
                f,
                "Interval(start={},end={},length={})",
                Nested(start),
                Nested(end),
                OptLength(length)
            ),
            TimeExpression::Range { lower, upper, span_length, inner_length } => write!(
                f,
                "Range(lower={},upper={},span={},inner={})",
                Nested(lower),
                Nested(upper),
                OptLength(span_length),
                OptLength(inner_length)
            ),
            TimeExpression::BareLength { length } => write!(f, "{length}"),
        }
    }
}
