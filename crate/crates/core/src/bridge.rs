//! Features and certain pairwise relations derived from time expressions.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::temporal::{compare_known, TimeExpression, TimePoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    pub is_point: bool,
    pub start_is_interval: bool,
    pub end_is_interval: bool,
    pub length_is_interval: bool,
}

impl FeatureVector {
    pub fn as_tuple(&self) -> (bool, bool, bool, bool) {
        (self.is_point, self.start_is_interval, self.end_is_interval, self.length_is_interval)
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = |b: bool| if b { "True" } else { "False" };
        write!(
            f,
            "(is_point={},start_is_int={},end_is_int={},len_is_int={})",
            t(self.is_point),
            t(self.start_is_interval),
            t(self.end_is_interval),
            t(self.length_is_interval)
        )
    }
}

/// Temporal relation of a source event to a target event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationLabel {
    #[serde(rename = "a")]
    After,
    #[serde(rename = "b")]
    Before,
    #[serde(rename = "s")]
    Simultaneous,
    #[serde(rename = "i")]
    Includes,
    #[serde(rename = "ii")]
    IsIncluded,
    #[serde(rename = "v")]
    Vague,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 6] = [
        RelationLabel::After,
        RelationLabel::Before,
        RelationLabel::Simultaneous,
        RelationLabel::Includes,
        RelationLabel::IsIncluded,
        RelationLabel::Vague,
    ];

    pub fn inverse(self) -> RelationLabel {
        match self {
            RelationLabel::After => RelationLabel::Before,
            RelationLabel::Before => RelationLabel::After,
            RelationLabel::Includes => RelationLabel::IsIncluded,
            RelationLabel::IsIncluded => RelationLabel::Includes,
            other => other,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            RelationLabel::After => "a",
            RelationLabel::Before => "b",
            RelationLabel::Simultaneous => "s",
            RelationLabel::Includes => "i",
            RelationLabel::IsIncluded => "ii",
            RelationLabel::Vague => "v",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<RelationLabel> {
        RelationLabel::ALL.get(i).copied()
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for RelationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<RelationLabel> {
        RelationLabel::ALL
            .into_iter()
            .find(|r| r.code() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown relation label {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StageConstraint {
    pub source: String,
    pub target: String,
    pub relation: RelationLabel,
}

impl fmt::Display for StageConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.source, self.relation, self.target)
    }
}

pub fn features(expr: &TimeExpression) -> Result<FeatureVector> {
    Ok(match expr {
        TimeExpression::Instant { .. } => FeatureVector {
            is_point: true,
            start_is_interval: true,
            end_is_interval: true,
            length_is_interval: false,
        },
        TimeExpression::Interval { length, .. } => FeatureVector {
            is_point: false,
            start_is_interval: true,
            end_is_interval: true,
            length_is_interval: length.is_some(),
        },
        TimeExpression::Range { inner_length, .. } => FeatureVector {
            is_point: false,
            start_is_interval: false,
            end_is_interval: false,
            length_is_interval: inner_length.is_some(),
        },
        TimeExpression::BareLength { .. } => {
            return Err(Error::InvalidArgument("a bare length has no feature vector".into()))
        }
    })
}

/// Combine the maximal expressions found in one cue.
///
/// An Interval next to a Range ("for an hour sometime next week") becomes
/// the Range carrying the Interval's length as its inner length. Any other
/// combination keeps the first expression.
pub fn merge(exprs: &[TimeExpression]) -> Option<TimeExpression> {
    let interval_length = exprs.iter().find_map(|e| match e {
        TimeExpression::Interval { length: Some(l), .. } => Some(*l),
        _ => None,
    });
    let range = exprs.iter().find(|e| matches!(e, TimeExpression::Range { .. }));
    match (interval_length, range) {
        (Some(len), Some(TimeExpression::Range { lower, upper, span_length, .. })) => {
            Some(TimeExpression::Range { lower: *lower, upper: *upper, span_length: *span_length, inner_length: Some(len) })
        }
        _ => exprs.first().cloned(),
    }
}

/// What an expression proves about its event's start and end.
struct Bounds {
    start_lower: Option<TimePoint>,
    end_upper: Option<TimePoint>,
    exact: bool,
}

fn known(p: &TimePoint) -> Option<TimePoint> {
    (!p.is_unknown()).then_some(*p)
}

fn bounds(expr: &TimeExpression) -> Bounds {
    match expr {
        TimeExpression::Instant { position } => {
            let p = known(position);
            Bounds { start_lower: p, end_upper: p, exact: p.is_some() }
        }
        TimeExpression::Interval { start, end, length } => {
            let mut s = known(start);
            let mut e = known(end);
            if let Some(len) = length {
                if s.is_none() {
                    s = e.and_then(|e| e.shifted(-len.hours()).ok());
                }
                if e.is_none() {
                    e = s.and_then(|s| s.shifted(len.hours()).ok());
                }
            }
            Bounds { start_lower: s, end_upper: e, exact: s.is_some() && e.is_some() }
        }
        TimeExpression::Range { lower, upper, .. } => {
            Bounds { start_lower: known(lower), end_upper: known(upper), exact: false }
        }
        TimeExpression::BareLength { .. } => Bounds { start_lower: None, end_upper: None, exact: false },
    }
}

fn cmp(a: &Option<TimePoint>, b: &Option<TimePoint>) -> Option<Ordering> {
    compare_known(a.as_ref()?, b.as_ref()?).ok()
}

/// The relation of `a` to `b` when the expressions alone make it certain.
pub fn derive_relation(a: &TimeExpression, b: &TimeExpression) -> Option<RelationLabel> {
    let x = bounds(a);
    let y = bounds(b);
    if cmp(&x.end_upper, &y.start_lower) == Some(Ordering::Less) {
        return Some(RelationLabel::Before);
    }
    if cmp(&y.end_upper, &x.start_lower) == Some(Ordering::Less) {
        return Some(RelationLabel::After);
    }
    if !(x.exact && y.exact) {
        return None;
    }
    let starts = cmp(&x.start_lower, &y.start_lower)?;
    let ends = cmp(&x.end_upper, &y.end_upper)?;
    match (starts, ends) {
        (Ordering::Equal, Ordering::Equal) => Some(RelationLabel::Simultaneous),
        (Ordering::Less, Ordering::Greater) => Some(RelationLabel::Includes),
        (Ordering::Greater, Ordering::Less) => Some(RelationLabel::IsIncluded),
        _ => None,
    }
}

/// Which ordered pairs [`generate_constraints`] examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Each unordered pair once, oriented by input order.
    #[default]
    Forward,
    /// Every ordered pair.
    Both,
}

pub fn generate_constraints(
    events: &[(String, TimeExpression)],
    orientation: Orientation,
) -> Result<Vec<StageConstraint>> {
    let mut seen = BTreeSet::new();
    for (id, _) in events {
        if !seen.insert(id.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate event id {id:?}")));
        }
    }
    let mut out = Vec::new();
    for (i, (src, a)) in events.iter().enumerate() {
        for (j, (tgt, b)) in events.iter().enumerate() {
            let wanted = match orientation {
                Orientation::Forward => i < j,
                Orientation::Both => i != j,
            };
            if !wanted {
                continue;
            }
            if let Some(relation) = derive_relation(a, b) {
                out.push(StageConstraint { source: src.clone(), target: tgt.clone(), relation });
            }
        }
    }
    out.sort();
    Ok(out)
}
