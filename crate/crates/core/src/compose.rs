//! Bottom-up semantic composition over parse trees.
//!
//! Every grammar rule names a composition function through its tag. The
//! registry below is the complete list of tags; the grammar validator
//! checks each rule against it (arity and output category).

use std::fmt;

use crate::grammar::{number_value, ordinal_value, Nonterminal};
use crate::chart::ParseTree;
use crate::normalize::{days_in_month, expand_two_digit_year, CalendarDateTime};
use crate::rational::Rational;
use crate::temporal::{length_from, AnchorKind, Length, TimeExpression, TimePoint, UnitKind};
use crate::{Error, Result};

/// Intermediate semantic values carried up the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Num(Rational),
    Ordinal(u32),
    Unit(UnitKind),
    Length(Length),
    Month(u32),
    Weekday(u32),
    Year(i32),
    Date(CalendarDateTime),
    /// Day shift of today / yesterday / tomorrow.
    Deictic(i32),
    Now,
    /// A function word or determiner.
    Marker(Nonterminal),
    MonthDay { month: u32, day: u32 },
    FromPart(TimePoint),
    ToPart(TimePoint),
    OrdinalUnit { n: u32, unit: UnitKind },
    Expr(TimeExpression),
}

impl Value {
    /// The grammar category this value belongs to, where one is fixed.
    pub fn category(&self) -> Option<Nonterminal> {
        use Nonterminal as N;
        Some(match self {
            Value::Num(_) => N::Num,
            Value::Ordinal(_) => N::Ordinal,
            Value::Unit(_) => N::Unit,
            Value::Length(_) => N::Length,
            Value::Month(_) => N::MonthName,
            Value::Weekday(_) => N::WeekdayName,
            Value::Year(_) => N::YearNum,
            Value::Date(_) => N::DateLit,
            Value::Deictic(_) => N::Deictic,
            Value::Now => N::Now,
            Value::Marker(m) => *m,
            Value::MonthDay { .. } => N::MonthDay,
            Value::FromPart(_) => N::FromPart,
            Value::ToPart(_) => N::ToPart,
            Value::OrdinalUnit { .. } => N::OrdinalUnit,
            Value::Expr(TimeExpression::Instant { .. }) => N::Instant,
            Value::Expr(TimeExpression::Interval { .. }) => N::Interval,
            Value::Expr(TimeExpression::Range { .. }) => N::Range,
            Value::Expr(TimeExpression::BareLength { .. }) => N::Length,
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "Num({n})"),
            Value::Ordinal(n) => write!(f, "Ordinal({n})"),
            Value::Unit(u) => write!(f, "Unit({})", u.name()),
            Value::Length(l) => write!(f, "{l}"),
            Value::Month(m) => write!(f, "Month({m})"),
            Value::Weekday(w) => write!(f, "Weekday({w})"),
            Value::Year(y) => write!(f, "Year({y})"),
            Value::Date(d) => write!(f, "Date({d})"),
            Value::Deictic(s) => write!(f, "Deictic({s:+})"),
            Value::Now => write!(f, "Now"),
            Value::Marker(m) => write!(f, "{m}"),
            Value::MonthDay { month, day } => write!(f, "MonthDay({month},{day})"),
            Value::FromPart(p) => write!(f, "From({p})"),
            Value::ToPart(p) => write!(f, "To({p})"),
            Value::OrdinalUnit { n, unit } => write!(f, "OrdinalUnit({n},{})", unit.name()),
            Value::Expr(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TagSignature {
    pub name: &'static str,
    pub arity: usize,
    pub output: Nonterminal,
    apply: fn(&[Value]) -> Result<Value>,
}

macro_rules! registry {
    ($($name:ident : $arity:literal -> $output:ident),* $(,)?) => {
        const REGISTRY: &[TagSignature] = &[
            $(TagSignature {
                name: stringify!($name),
                arity: $arity,
                output: Nonterminal::$output,
                apply: rules::$name,
            }),*
        ];
    };
}

registry! {
    datelit_to_instant: 1 -> Instant,
    now_to_instant: 1 -> Instant,
    deictic_to_range: 1 -> Range,
    month_to_range: 1 -> Range,
    weekday_to_range: 1 -> Range,
    num_unit_to_length: 2 -> Length,
    length_ago_to_instant: 2 -> Instant,
    in_length_to_instant: 2 -> Instant,
    for_length_to_interval: 2 -> Interval,
    within_length_to_range: 2 -> Range,
    before_instant_to_interval: 2 -> Interval,
    until_instant_to_interval: 2 -> Interval,
    after_instant_to_interval: 2 -> Interval,
    since_instant_to_interval: 2 -> Interval,
    by_instant_to_range: 2 -> Range,
    on_instant: 2 -> Instant,
    at_instant: 2 -> Instant,
    for_range_to_interval: 2 -> Interval,
    during_range: 2 -> Range,
    sometime_range: 2 -> Range,
    later_in_range: 2 -> Range,
    from_instant: 2 -> FromPart,
    from_range: 2 -> FromPart,
    to_instant: 2 -> ToPart,
    to_range: 2 -> ToPart,
    from_to_to_interval: 2 -> Interval,
    in_month_to_range: 2 -> Range,
    in_year_to_range: 2 -> Range,
    on_weekday_to_range: 2 -> Range,
    det_weekday_to_range: 2 -> Range,
    det_unit_to_range: 2 -> Range,
    next_unit_to_range: 2 -> Range,
    last_unit_to_range: 2 -> Range,
    this_unit_to_range: 2 -> Range,
    month_day: 2 -> MonthDay,
    month_day_num: 2 -> MonthDay,
    month_day_year_to_instant: 2 -> Instant,
    on_month_day: 2 -> Instant,
    month_year_to_range: 2 -> Range,
    ordinal_unit: 2 -> OrdinalUnit,
    det_ordinal_unit_to_range: 2 -> Range,
}

pub fn registered(tag: &str) -> Option<TagSignature> {
    REGISTRY.iter().find(|s| s.name == tag).copied()
}

pub fn registry() -> &'static [TagSignature] {
    REGISTRY
}

/// Apply the composition function registered under `tag`.
pub fn apply_rule(tag: &str, children: &[Value]) -> Result<Value> {
    let sig = registered(tag).ok_or_else(|| Error::InternalGrammar(format!("unregistered tag @{tag}")))?;
    if sig.arity != children.len() {
        return Err(Error::InvalidArgument(format!(
            "@{tag} takes {} children, got {}",
            sig.arity,
            children.len()
        )));
    }
    (sig.apply)(children)
}

const MONTH_PREFIXES: [&str; 12] = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"];
const WEEKDAY_PREFIXES: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

fn prefix_index(word: &str, prefixes: &[&str]) -> Option<u32> {
    let w = word.to_lowercase();
    prefixes.iter().position(|p| w.starts_with(p)).map(|i| i as u32)
}

fn parse_date_literal(s: &str) -> Result<CalendarDateTime> {
    let bad = || Error::Domain(format!("no such date {s:?}"));
    let parts: Vec<&str> = s.split(['/', '-']).collect();
    let nums: Vec<u32> = parts.iter().map(|p| p.parse().map_err(|_| bad())).collect::<Result<_>>()?;
    let [a, b, c] = nums[..] else { return Err(bad()) };
    let (year, month, day) = if s.contains('-') {
        (a as i32, b, c)
    } else if parts[2].len() == 2 {
        (expand_two_digit_year(c), a, b)
    } else {
        (c as i32, a, b)
    };
    CalendarDateTime::from_ymd(year, month, day).map_err(|_| bad())
}

/// Semantic value of a token read as `class`.
pub fn lexeme_value(class: Nonterminal, surface: &str) -> Result<Value> {
    use Nonterminal as N;
    let unreadable = || Error::Domain(format!("cannot read {surface:?} as {class}"));
    Ok(match class {
        N::Num => Value::Num(number_value(surface).ok_or_else(unreadable)?),
        N::Ordinal => Value::Ordinal(ordinal_value(surface).ok_or_else(unreadable)?),
        N::Unit => Value::Unit(UnitKind::from_word(surface).ok_or_else(unreadable)?),
        N::MonthName => Value::Month(prefix_index(surface, &MONTH_PREFIXES).ok_or_else(unreadable)? + 1),
        N::WeekdayName => Value::Weekday(prefix_index(surface, &WEEKDAY_PREFIXES).ok_or_else(unreadable)?),
        N::YearNum => Value::Year(surface.parse().map_err(|_| unreadable())?),
        N::DateLit => Value::Date(parse_date_literal(surface)?),
        N::Deictic => Value::Deictic(match surface.to_lowercase().as_str() {
            "today" => 0,
            "yesterday" => -1,
            "tomorrow" => 1,
            _ => return Err(unreadable()),
        }),
        N::Now => Value::Now,
        N::Det => Value::Marker(N::Det),
        c if c.is_function_word() => Value::Marker(c),
        _ => return Err(Error::InternalGrammar(format!("{class} is not a lexical category"))),
    })
}

/// Result of composing a tree, with the tags applied in application order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub expr: TimeExpression,
    pub applied: Vec<String>,
}

fn compose_value(tree: &ParseTree, applied: &mut Vec<String>) -> Result<Value> {
    match &tree.rule {
        None => {
            let surface = tree
                .surface
                .as_deref()
                .ok_or_else(|| Error::InternalGrammar(format!("leaf {} has no token", tree.root)))?;
            lexeme_value(tree.root, surface)
        }
        Some(rule) => {
            let children = tree
                .children
                .iter()
                .map(|c| compose_value(c, applied))
                .collect::<Result<Vec<_>>>()?;
            let value = apply_rule(&rule.tag, &children)?;
            applied.push(rule.tag.clone());
            Ok(value)
        }
    }
}

/// Compose a tree and report the applied rules.
pub fn compose_traced(tree: &ParseTree) -> Result<Composition> {
    let mut applied = Vec::new();
    let expr = match compose_value(tree, &mut applied)? {
        Value::Expr(e) => e,
        Value::Length(length) => TimeExpression::BareLength { length },
        other => {
            return Err(Error::InvalidArgument(format!("{} tree denotes {other}, not a time expression", tree.root)))
        }
    };
    expr.validate()?;
    Ok(Composition { expr, applied })
}

pub fn compose(tree: &ParseTree) -> Result<TimeExpression> {
    compose_traced(tree).map(|c| c.expr)
}

mod rules {
    use super::*;

    fn mismatch(children: &[Value]) -> Error {
        let shown: Vec<String> = children.iter().map(|c| c.to_string()).collect();
        Error::InternalGrammar(format!("unexpected children [{}]", shown.join(", ")))
    }

    fn present(offset: Rational, dist: Option<Length>) -> TimePoint {
        TimePoint::RelativeToAnchor { anchor: AnchorKind::Present, offset, dist }
    }

    fn hours(n: i64) -> Rational {
        Rational::from(n)
    }

    fn expr(e: TimeExpression) -> Result<Value> {
        Ok(Value::Expr(e))
    }

    fn instant_point(v: &Value) -> Option<TimePoint> {
        match v {
            Value::Expr(TimeExpression::Instant { position }) => Some(*position),
            _ => None,
        }
    }

    fn range_parts(v: &Value) -> Option<(TimePoint, TimePoint, Option<Length>, Option<Length>)> {
        match v {
            Value::Expr(TimeExpression::Range { lower, upper, span_length, inner_length }) => {
                Some((*lower, *upper, *span_length, *inner_length))
            }
            _ => None,
        }
    }

    /// February counts 29 days so the bound covers leap years.
    fn max_month_days(month: u32) -> u32 {
        if month == 2 {
            29
        } else {
            days_in_month(2001, month)
        }
    }

    fn month_range(month: u32) -> Result<Value> {
        let anchor = AnchorKind::Month { month };
        expr(TimeExpression::range(
            TimePoint::anchored(anchor, Rational::ZERO),
            TimePoint::anchored(anchor, hours(24 * max_month_days(month) as i64)),
            None,
            None,
        )?)
    }

    fn weekday_range(weekday: u32) -> Result<Value> {
        let anchor = AnchorKind::Weekday { weekday };
        expr(TimeExpression::range(
            TimePoint::anchored(anchor, Rational::ZERO),
            TimePoint::anchored(anchor, hours(24)),
            Some(length_from(Rational::ONE, UnitKind::Day)?),
            None,
        )?)
    }

    fn calendar_unit_range(unit: UnitKind, shift: i32) -> Result<Value> {
        let span = match unit {
            UnitKind::Second | UnitKind::Minute | UnitKind::Hour | UnitKind::Day | UnitKind::Week => {
                Some(length_from(Rational::ONE, unit)?)
            }
            _ => None,
        };
        expr(TimeExpression::range(
            TimePoint::anchored(AnchorKind::CalendarUnit { unit, shift }, Rational::ZERO),
            TimePoint::anchored(AnchorKind::CalendarUnit { unit, shift: shift + 1 }, Rational::ZERO),
            span,
            None,
        )?)
    }

    fn date_point(date: CalendarDateTime) -> TimePoint {
        TimePoint::anchored(AnchorKind::ExplicitDate { date }, Rational::ZERO)
    }

    fn check_day(month: u32, day: u32) -> Result<()> {
        if (1..=12).contains(&month) && (1..=max_month_days(month)).contains(&day) {
            Ok(())
        } else {
            Err(Error::Domain(format!("no day {day} in month {month}")))
        }
    }

    // ---- lexical promotions

    pub fn datelit_to_instant(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Date(d)] => expr(TimeExpression::instant(date_point(*d))),
            _ => Err(mismatch(c)),
        }
    }

    pub fn now_to_instant(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Now] => expr(TimeExpression::instant(present(Rational::ZERO, None))),
            _ => Err(mismatch(c)),
        }
    }

    pub fn deictic_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Deictic(shift)] => calendar_unit_range(UnitKind::Day, *shift),
            _ => Err(mismatch(c)),
        }
    }

    pub fn month_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Month(m)] => month_range(*m),
            _ => Err(mismatch(c)),
        }
    }

    pub fn weekday_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Weekday(w)] => weekday_range(*w),
            _ => Err(mismatch(c)),
        }
    }

    // ---- lengths and the function-word paradigm

    pub fn num_unit_to_length(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Num(n), Value::Unit(u)] => Ok(Value::Length(length_from(*n, *u)?)),
            _ => Err(mismatch(c)),
        }
    }

    pub fn length_ago_to_instant(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Length(l), Value::Marker(_)] => expr(TimeExpression::instant(present(-l.hours(), Some(*l)))),
            _ => Err(mismatch(c)),
        }
    }

    pub fn in_length_to_instant(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Length(l)] => expr(TimeExpression::instant(present(l.hours(), Some(*l)))),
            _ => Err(mismatch(c)),
        }
    }

    pub fn for_length_to_interval(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Length(l)] => {
                expr(TimeExpression::interval(TimePoint::Unknown, TimePoint::Unknown, Some(*l))?)
            }
            _ => Err(mismatch(c)),
        }
    }

    pub fn within_length_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Length(l)] => expr(TimeExpression::range(
                present(Rational::ZERO, None),
                present(l.hours(), Some(*l)),
                Some(*l),
                None,
            )?),
            _ => Err(mismatch(c)),
        }
    }

    // ---- type transformations

    fn ending_at(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => {
                let p = instant_point(v).ok_or_else(|| mismatch(c))?;
                expr(TimeExpression::interval(TimePoint::Unknown, p, None)?)
            }
            _ => Err(mismatch(c)),
        }
    }

    fn starting_at(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => {
                let p = instant_point(v).ok_or_else(|| mismatch(c))?;
                expr(TimeExpression::interval(p, TimePoint::Unknown, None)?)
            }
            _ => Err(mismatch(c)),
        }
    }

    pub fn before_instant_to_interval(c: &[Value]) -> Result<Value> {
        ending_at(c)
    }

    pub fn until_instant_to_interval(c: &[Value]) -> Result<Value> {
        ending_at(c)
    }

    pub fn after_instant_to_interval(c: &[Value]) -> Result<Value> {
        starting_at(c)
    }

    pub fn since_instant_to_interval(c: &[Value]) -> Result<Value> {
        starting_at(c)
    }

    pub fn by_instant_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => {
                let p = instant_point(v).ok_or_else(|| mismatch(c))?;
                expr(TimeExpression::range(TimePoint::Unknown, p, None, None)?)
            }
            _ => Err(mismatch(c)),
        }
    }

    fn same_instant(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v @ Value::Expr(TimeExpression::Instant { .. })] => Ok(v.clone()),
            _ => Err(mismatch(c)),
        }
    }

    pub fn on_instant(c: &[Value]) -> Result<Value> {
        same_instant(c)
    }

    pub fn at_instant(c: &[Value]) -> Result<Value> {
        same_instant(c)
    }

    pub fn for_range_to_interval(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => {
                let (lower, upper, span, _) = range_parts(v).ok_or_else(|| mismatch(c))?;
                expr(TimeExpression::interval(lower, upper, span)?)
            }
            _ => Err(mismatch(c)),
        }
    }

    fn same_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v @ Value::Expr(TimeExpression::Range { .. })] => Ok(v.clone()),
            _ => Err(mismatch(c)),
        }
    }

    pub fn during_range(c: &[Value]) -> Result<Value> {
        same_range(c)
    }

    pub fn sometime_range(c: &[Value]) -> Result<Value> {
        same_range(c)
    }

    /// "later in" a span that contains the present starts no earlier than
    /// the present; other spans keep their bounds.
    pub fn later_in_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => {
                let (lower, upper, _, inner) = range_parts(v).ok_or_else(|| mismatch(c))?;
                let current = matches!(
                    lower,
                    TimePoint::RelativeToAnchor { anchor: AnchorKind::CalendarUnit { shift: 0, .. }, offset, .. }
                        if offset.is_zero()
                );
                let lower = if current { present(Rational::ZERO, None) } else { lower };
                expr(TimeExpression::range(lower, upper, None, inner)?)
            }
            _ => Err(mismatch(c)),
        }
    }

    // ---- from ... to ...

    pub fn from_instant(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => Ok(Value::FromPart(instant_point(v).ok_or_else(|| mismatch(c))?)),
            _ => Err(mismatch(c)),
        }
    }

    pub fn from_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => Ok(Value::FromPart(range_parts(v).ok_or_else(|| mismatch(c))?.0)),
            _ => Err(mismatch(c)),
        }
    }

    pub fn to_instant(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => Ok(Value::ToPart(instant_point(v).ok_or_else(|| mismatch(c))?)),
            _ => Err(mismatch(c)),
        }
    }

    pub fn to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), v] => Ok(Value::ToPart(range_parts(v).ok_or_else(|| mismatch(c))?.1)),
            _ => Err(mismatch(c)),
        }
    }

    pub fn from_to_to_interval(c: &[Value]) -> Result<Value> {
        match c {
            [Value::FromPart(start), Value::ToPart(end)] => {
                expr(TimeExpression::interval(*start, *end, None)?)
            }
            _ => Err(mismatch(c)),
        }
    }

    // ---- calendar references

    pub fn in_month_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Month(m)] => month_range(*m),
            _ => Err(mismatch(c)),
        }
    }

    pub fn in_year_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Year(y)] => {
                let start = CalendarDateTime::from_ymd(*y, 1, 1).map_err(|e| Error::Domain(e.to_string()))?;
                let days: i64 = (1..=12).map(|m| days_in_month(*y, m) as i64).sum();
                expr(TimeExpression::range(
                    date_point(start),
                    date_point(start).shifted(hours(24 * days))?,
                    None,
                    None,
                )?)
            }
            _ => Err(mismatch(c)),
        }
    }

    pub fn on_weekday_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Weekday(w)] => weekday_range(*w),
            _ => Err(mismatch(c)),
        }
    }

    pub fn det_weekday_to_range(c: &[Value]) -> Result<Value> {
        on_weekday_to_range(c)
    }

    pub fn det_unit_to_range(c: &[Value]) -> Result<Value> {
        this_unit_to_range(c)
    }

    pub fn next_unit_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Unit(u)] => calendar_unit_range(*u, 1),
            _ => Err(mismatch(c)),
        }
    }

    pub fn last_unit_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Unit(u)] => calendar_unit_range(*u, -1),
            _ => Err(mismatch(c)),
        }
    }

    pub fn this_unit_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::Unit(u)] => calendar_unit_range(*u, 0),
            _ => Err(mismatch(c)),
        }
    }

    pub fn month_day(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Month(month), Value::Ordinal(day)] => {
                check_day(*month, *day)?;
                Ok(Value::MonthDay { month: *month, day: *day })
            }
            _ => Err(mismatch(c)),
        }
    }

    pub fn month_day_num(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Month(month), Value::Num(n)] => {
                let day = if n.is_integer() { u32::try_from(n.numer()).ok() } else { None }
                    .ok_or_else(|| Error::Domain(format!("{n} is not a day of the month")))?;
                check_day(*month, day)?;
                Ok(Value::MonthDay { month: *month, day })
            }
            _ => Err(mismatch(c)),
        }
    }

    pub fn month_day_year_to_instant(c: &[Value]) -> Result<Value> {
        match c {
            [Value::MonthDay { month, day }, Value::Year(y)] => {
                let date =
                    CalendarDateTime::from_ymd(*y, *month, *day).map_err(|e| Error::Domain(e.to_string()))?;
                expr(TimeExpression::instant(date_point(date)))
            }
            _ => Err(mismatch(c)),
        }
    }

    pub fn on_month_day(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::MonthDay { month, day }] => expr(TimeExpression::instant(
                TimePoint::anchored(AnchorKind::Month { month: *month }, hours(24 * (*day as i64 - 1))),
            )),
            _ => Err(mismatch(c)),
        }
    }

    pub fn month_year_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Month(m), Value::Year(y)] => {
                let start = CalendarDateTime::from_ymd(*y, *m, 1).map_err(|e| Error::Domain(e.to_string()))?;
                expr(TimeExpression::range(
                    date_point(start),
                    date_point(start).shifted(hours(24 * days_in_month(*y, *m) as i64))?,
                    None,
                    None,
                )?)
            }
            _ => Err(mismatch(c)),
        }
    }

    pub fn ordinal_unit(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Ordinal(n), Value::Unit(unit)] => Ok(Value::OrdinalUnit { n: *n, unit: *unit }),
            _ => Err(mismatch(c)),
        }
    }

    /// "the fourth quarter", "the third month": counted within the year.
    pub fn det_ordinal_unit_to_range(c: &[Value]) -> Result<Value> {
        match c {
            [Value::Marker(_), Value::OrdinalUnit { n, unit }] => match (unit, n) {
                (UnitKind::Quarter, 1..=4) => {
                    let first = 3 * n - 2;
                    let last = 3 * n;
                    expr(TimeExpression::range(
                        TimePoint::anchored(AnchorKind::Month { month: first }, Rational::ZERO),
                        TimePoint::anchored(AnchorKind::Month { month: last }, hours(24 * max_month_days(last) as i64)),
                        None,
                        None,
                    )?)
                }
                (UnitKind::Month, 1..=12) => month_range(*n),
                _ => Err(Error::Domain(format!("no ordinal reading for the {n} {}", unit.name()))),
            },
            _ => Err(mismatch(c)),
        }
    }
}
