//! Placement of composed expressions on the single hours-based timeline.
//!
//! Position 0 is 2000-01-01T00:00 (no time zones). Explicit calendar dates
//! always resolve; everything tied to the document date (the present, bare
//! month and weekday names, "next week"-style calendar units) resolves only
//! when a document creation time is supplied and otherwise stays symbolic.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Serialize, Serializer};

use crate::rational::Rational;
use crate::temporal::{AnchorKind, TimeExpression, TimePoint, UnitKind};
use crate::{Error, Result};

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

fn epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("epoch is a valid date")
}

/// A proleptic Gregorian date-time between 1900 and 2100.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CalendarDateTime(NaiveDateTime);

impl CalendarDateTime {
    pub fn new(datetime: NaiveDateTime) -> Result<CalendarDateTime> {
        if !(MIN_YEAR..=MAX_YEAR).contains(&datetime.year()) {
            return Err(Error::InvalidArgument(format!(
                "date {datetime} outside supported years {MIN_YEAR}-{MAX_YEAR}"
            )));
        }
        Ok(CalendarDateTime(datetime))
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<CalendarDateTime> {
        Self::from_ymd_hms(year, month, day, 0, 0, 0)
    }

    pub fn from_ymd_hms(year: i32, month: u32, day: u32, hour: u32, minute: u32, second: u32) -> Result<CalendarDateTime> {
        let dt = NaiveDate::from_ymd_opt(year, month, day)
            .and_then(|d| d.and_hms_opt(hour, minute, second))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "no such date {year:04}-{month:02}-{day:02}T{hour:02}:{minute:02}:{second:02}"
                ))
            })?;
        CalendarDateTime::new(dt)
    }

    pub fn naive(&self) -> NaiveDateTime {
        self.0
    }

    pub fn is_whole_minute(&self) -> bool {
        self.0.second() == 0 && self.0.nanosecond() == 0
    }
}

impl FromStr for CalendarDateTime {
    type Err = Error;

    /// ISO-8601 date (`2001-01-10`) or date-time (`2001-01-10T08:30[:00]`,
    /// optional trailing `Z`).
    fn from_str(s: &str) -> Result<CalendarDateTime> {
        let trimmed = s.trim().trim_end_matches('Z');
        let parsed = NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%dT%H:%M:%S")
            .or_else(|_| NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%dT%H:%M"))
            .or_else(|_| NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%d %H:%M:%S"))
            .or_else(|_| NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%d %H:%M"))
            .or_else(|_| {
                NaiveDate::parse_from_str(trimmed, "%Y-%m-%d").map(|d| d.and_hms_opt(0, 0, 0).expect("midnight"))
            })
            .map_err(|_| Error::InvalidArgument(format!("malformed date-time {s:?}")))?;
        CalendarDateTime::new(parsed)
    }
}

impl fmt::Display for CalendarDateTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_whole_minute() {
            write!(f, "{}", self.0.format("%Y-%m-%dT%H:%M"))
        } else {
            write!(f, "{}", self.0.format("%Y-%m-%dT%H:%M:%S"))
        }
    }
}

impl Serialize for CalendarDateTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Exact signed hours from the epoch.
pub fn position_of(date: CalendarDateTime) -> Result<Rational> {
    let date = CalendarDateTime::new(date.0)?;
    let seconds = (date.0 - epoch()).num_seconds();
    Rational::new(seconds as i128, 3600)
}

/// Inverse of [`position_of`] for positions that land on a whole second in
/// the supported year range.
pub fn date_at(hours: Rational) -> Option<CalendarDateTime> {
    let seconds = hours.checked_mul(&Rational::from_integer(3600)).ok()?;
    if !seconds.is_integer() {
        return None;
    }
    let secs = i64::try_from(seconds.numer()).ok()?;
    let dt = epoch().checked_add_signed(Duration::try_seconds(secs)?)?;
    CalendarDateTime::new(dt).ok()
}

/// Two-digit years pivot at 50: `00..=50` map to 2000-2050, `51..=99` to
/// 1951-1999.
pub fn expand_two_digit_year(yy: u32) -> i32 {
    if yy <= 50 {
        2000 + yy as i32
    } else {
        1900 + yy as i32
    }
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    let (ny, nm) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
    let first = NaiveDate::from_ymd_opt(year, month, 1).expect("valid month");
    let next = NaiveDate::from_ymd_opt(ny, nm, 1).expect("valid month");
    (next - first).num_days() as u32
}

fn add_months(date: NaiveDate, months: i64) -> Result<NaiveDate> {
    let total = date.year() as i64 * 12 + date.month0() as i64 + months;
    let year = i32::try_from(total.div_euclid(12)).map_err(|_| Error::Overflow)?;
    let month = total.rem_euclid(12) as u32 + 1;
    NaiveDate::from_ymd_opt(year, month, 1).ok_or(Error::Overflow)
}

/// Start of the calendar unit containing `at`, moved by `shift` units.
pub fn calendar_unit_start(at: CalendarDateTime, unit: UnitKind, shift: i32) -> Result<CalendarDateTime> {
    let dt = at.0;
    let date = dt.date();
    let midnight = |d: NaiveDate| d.and_hms_opt(0, 0, 0).expect("midnight");
    let shift64 = shift as i64;
    let start = match unit {
        UnitKind::Second => dt.with_nanosecond(0).expect("valid") + Duration::seconds(shift64),
        UnitKind::Minute => {
            dt.with_nanosecond(0).and_then(|t| t.with_second(0)).expect("valid") + Duration::minutes(shift64)
        }
        UnitKind::Hour => date.and_hms_opt(dt.hour(), 0, 0).expect("valid") + Duration::hours(shift64),
        UnitKind::Day => midnight(date) + Duration::days(shift64),
        UnitKind::Week => {
            let monday = date - Duration::days(date.weekday().num_days_from_monday() as i64);
            midnight(monday) + Duration::weeks(shift64)
        }
        UnitKind::Month => midnight(add_months(date.with_day(1).expect("day 1"), shift64)?),
        UnitKind::Quarter => {
            let q_start = NaiveDate::from_ymd_opt(date.year(), date.month0() / 3 * 3 + 1, 1).expect("valid");
            midnight(add_months(q_start, 3 * shift64)?)
        }
        UnitKind::Year => {
            let jan = NaiveDate::from_ymd_opt(date.year(), 1, 1).expect("valid");
            midnight(add_months(jan, 12 * shift64)?)
        }
        UnitKind::Decade => {
            let jan = NaiveDate::from_ymd_opt(date.year().div_euclid(10) * 10, 1, 1).expect("valid");
            midnight(add_months(jan, 120 * shift64)?)
        }
    };
    CalendarDateTime::new(start)
}

fn anchor_position(anchor: &AnchorKind, dct: Option<CalendarDateTime>) -> Result<Option<Rational>> {
    let base = match (anchor, dct) {
        (AnchorKind::ExplicitDate { date }, _) => *date,
        (_, None) => return Ok(None),
        (AnchorKind::Present, Some(dct)) => dct,
        (AnchorKind::Month { month }, Some(dct)) => CalendarDateTime::from_ymd(dct.0.year(), *month, 1)?,
        (AnchorKind::Weekday { weekday }, Some(dct)) => {
            let today = dct.0.date();
            let current = today.weekday().num_days_from_monday() as i64;
            // nearest occurrence: signed distance in -3..=3
            let delta = (*weekday as i64 - current + 3).rem_euclid(7) - 3;
            CalendarDateTime::new((today + Duration::days(delta)).and_hms_opt(0, 0, 0).expect("midnight"))?
        }
        (AnchorKind::CalendarUnit { unit, shift }, Some(dct)) => calendar_unit_start(dct, *unit, *shift)?,
    };
    position_of(base).map(Some)
}

pub fn resolve_point(point: &TimePoint, dct: Option<CalendarDateTime>) -> Result<TimePoint> {
    match point {
        TimePoint::RelativeToAnchor { anchor, offset, .. } => match anchor_position(anchor, dct)? {
            Some(base) => Ok(TimePoint::known(base.checked_add(offset)?)),
            None => Ok(*point),
        },
        _ => Ok(*point),
    }
}

/// Resolve every anchored point of `expr` that can be placed given `dct`.
pub fn resolve(expr: &TimeExpression, dct: Option<CalendarDateTime>) -> Result<TimeExpression> {
    if let Some(d) = dct {
        CalendarDateTime::new(d.0)?;
    }
    expr.map_points(|p| resolve_point(p, dct))
}
