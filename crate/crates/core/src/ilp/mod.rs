//! Document-level event ordering as an exact 0/1 program.
//!
//! Every unordered pair of nodes (events and dummy time-expression events)
//! receives exactly one label; the label of the reversed pair is its
//! inverse. The objective sums the probability of each chosen label, plus
//! the α-weighted agreement terms for time-expression pairs in soft mode.
//! Transitivity triples constrain every ordered triple of distinct nodes.

mod solver;
mod transitivity;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bridge::RelationLabel;
use crate::rational::Rational;
use crate::{Error, Result};

pub use solver::{solve, Solution};
pub use transitivity::{default_transitivity_table, parse_table, Triple, DEFAULT_TABLE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintMode {
    #[default]
    None,
    Hard,
    Soft,
}

impl FromStr for ConstraintMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<ConstraintMode> {
        match s {
            "none" => Ok(ConstraintMode::None),
            "hard" => Ok(ConstraintMode::Hard),
            "soft" => Ok(ConstraintMode::Soft),
            _ => Err(Error::InvalidArgument(format!("unknown constraint mode {s:?}"))),
        }
    }
}

impl fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintMode::None => "none",
            ConstraintMode::Hard => "hard",
            ConstraintMode::Soft => "soft",
        })
    }
}

/// Tolerance on the sum of a pair's probabilities.
pub fn probability_tolerance() -> Rational {
    Rational::new(1, 1_000_000).expect("nonzero denominator")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingProblem {
    nodes: Vec<String>,
    n_events: usize,
    index: HashMap<String, usize>,
    relation_set: Vec<RelationLabel>,
    /// Keyed by node indices `(i, j)` with `i < j`.
    probabilities: BTreeMap<(usize, usize), BTreeMap<RelationLabel, Rational>>,
    stage: BTreeMap<(usize, usize), RelationLabel>,
    pub mode: ConstraintMode,
    pub alpha: Rational,
    pub transitivity: BTreeSet<Triple>,
    /// Node count up to which the search always runs to proven optimality.
    pub exact_limit: usize,
    /// Search nodes allowed once the node count exceeds `exact_limit`.
    pub node_budget: u64,
    /// Pairs touching a dummy event default to uniform probabilities.
    pub uniform_dummy_pairs: bool,
}

impl OrderingProblem {
    pub fn new(events: &[&str], dummy_events: &[&str], relation_set: &[RelationLabel]) -> Result<OrderingProblem> {
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        for name in events.iter().chain(dummy_events) {
            if index.insert(name.to_string(), nodes.len()).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate node id {name:?}")));
            }
            nodes.push(name.to_string());
        }
        let set: BTreeSet<RelationLabel> = relation_set.iter().copied().collect();
        if set.is_empty() {
            return Err(Error::InvalidArgument("empty relation set".into()));
        }
        let relation_set: Vec<RelationLabel> = set.into_iter().collect();
        Ok(OrderingProblem {
            nodes,
            n_events: events.len(),
            index,
            transitivity: default_transitivity_table(&relation_set),
            relation_set,
            probabilities: BTreeMap::new(),
            stage: BTreeMap::new(),
            mode: ConstraintMode::None,
            alpha: Rational::new(9, 10).expect("nonzero denominator"),
            exact_limit: 12,
            node_budget: 2_000_000,
            uniform_dummy_pairs: true,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn events(&self) -> &[String] {
        &self.nodes[..self.n_events]
    }

    pub fn dummy_events(&self) -> &[String] {
        &self.nodes[self.n_events..]
    }

    pub fn is_dummy(&self, node: usize) -> bool {
        node >= self.n_events
    }

    pub fn relation_set(&self) -> &[RelationLabel] {
        &self.relation_set
    }

    fn node(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::InvalidArgument(format!("unknown node id {id:?}")))
    }

    /// Indices of a pair in canonical orientation, and whether the given
    /// orientation was reversed.
    fn canonical(&self, source: &str, target: &str) -> Result<((usize, usize), bool)> {
        let (i, j) = (self.node(source)?, self.node(target)?);
        match i.cmp(&j) {
            std::cmp::Ordering::Less => Ok(((i, j), false)),
            std::cmp::Ordering::Greater => Ok(((j, i), true)),
            std::cmp::Ordering::Equal => Err(Error::InvalidArgument(format!("pair ({source}, {target}) repeats a node"))),
        }
    }

    /// Every unordered pair `(i, j)` with `i < j`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.nodes.len();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    }

    pub fn pair_names(&self, (i, j): (usize, usize)) -> (&str, &str) {
        (&self.nodes[i], &self.nodes[j])
    }

    /// Set `p(r | source, target)` for one pair. Given in either orientation.
    pub fn set_probabilities(&mut self, source: &str, target: &str, probs: &BTreeMap<RelationLabel, Rational>) -> Result<()> {
        let (key, reversed) = self.canonical(source, target)?;
        let oriented = probs.iter().map(|(r, p)| (if reversed { r.inverse() } else { *r }, *p)).collect();
        if self.probabilities.insert(key, oriented).is_some() {
            return Err(Error::InvalidArgument(format!("probabilities for ({source}, {target}) given twice")));
        }
        Ok(())
    }

    pub fn set_stage_relation(&mut self, source: &str, target: &str, relation: RelationLabel) -> Result<()> {
        let (key, reversed) = self.canonical(source, target)?;
        let relation = if reversed { relation.inverse() } else { relation };
        match self.stage.insert(key, relation) {
            Some(old) if old != relation => Err(Error::InvalidArgument(format!(
                "conflicting parser relations for ({source}, {target})"
            ))),
            _ => Ok(()),
        }
    }

    /// Parser relations in canonical orientation.
    pub fn stage_relations(&self) -> &BTreeMap<(usize, usize), RelationLabel> {
        &self.stage
    }

    /// The probability table of a canonical pair, with missing labels at 0.
    pub fn pair_probabilities(&self, pair: (usize, usize)) -> Result<Vec<(RelationLabel, Rational)>> {
        match self.probabilities.get(&pair) {
            Some(table) => Ok(self
                .relation_set
                .iter()
                .map(|r| (*r, table.get(r).copied().unwrap_or(Rational::ZERO)))
                .collect()),
            None if self.uniform_dummy_pairs && (self.is_dummy(pair.0) || self.is_dummy(pair.1)) => {
                let p = Rational::new(1, self.relation_set.len() as i128)?;
                Ok(self.relation_set.iter().map(|r| (*r, p)).collect())
            }
            None => {
                let (a, b) = self.pair_names(pair);
                Err(Error::InvalidArgument(format!("missing probabilities for pair ({a}, {b})")))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let one = Rational::ONE;
        for (&pair, table) in &self.probabilities {
            let (a, b) = self.pair_names(pair);
            let mut sum = Rational::ZERO;
            for (r, p) in table {
                if !self.relation_set.contains(r) {
                    return Err(Error::InvalidArgument(format!("pair ({a}, {b}) scores {r}, which is outside the relation set")));
                }
                if p.is_negative() || *p > one {
                    return Err(Error::InvalidArgument(format!("pair ({a}, {b}) has probability {p} outside [0, 1]")));
                }
                sum = sum.checked_add(p)?;
            }
            if sum.checked_sub(&one)?.abs() > probability_tolerance() {
                return Err(Error::InvalidArgument(format!("probabilities of ({a}, {b}) sum to {sum}, not 1")));
            }
        }
        for pair in self.pairs() {
            self.pair_probabilities(pair)?;
        }
        for (&(i, j), r) in &self.stage {
            let (a, b) = self.pair_names((i, j));
            if !self.is_dummy(i) && !self.is_dummy(j) {
                return Err(Error::InvalidArgument(format!("parser relation ({a}, {b}) involves no time-expression node")));
            }
            if *r == RelationLabel::Vague || !self.relation_set.contains(r) {
                return Err(Error::InvalidArgument(format!("parser relation {a} {r} {b} is not usable as a constraint")));
            }
        }
        if self.alpha <= Rational::ZERO || self.alpha > one {
            return Err(Error::InvalidArgument(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        for t in &self.transitivity {
            if [t.0, t.1, t.2].contains(&RelationLabel::Vague) {
                return Err(Error::InvalidArgument("transitivity triples cannot mention v".into()));
            }
        }
        Ok(())
    }

    /// Score of labelling canonical `pair` with `label`, soft terms included.
    pub fn label_score(&self, pair: (usize, usize), label: RelationLabel) -> Result<Rational> {
        let p = self
            .pair_probabilities(pair)?
            .into_iter()
            .find(|(r, _)| *r == label)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::InvalidArgument(format!("label {label} outside the relation set")))?;
        if self.mode != ConstraintMode::Soft {
            return Ok(p);
        }
        match self.stage.get(&pair) {
            Some(tp) if *tp == label => p.checked_add(&self.alpha),
            Some(_) => {
                let others = self.relation_set.len() as i128 - 1;
                let share = Rational::ONE.checked_sub(&self.alpha)?.checked_div(&Rational::from_integer(others))?;
                p.checked_add(&share)
            }
            None => Ok(p),
        }
    }
}

/// One label per canonical pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    labels: BTreeMap<(String, String), RelationLabel>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn insert(&mut self, source: &str, target: &str, relation: RelationLabel) {
        self.labels.remove(&(target.to_string(), source.to_string()));
        self.labels.insert((source.to_string(), target.to_string()), relation);
    }

    /// Label of `source` relative to `target`, in either stored orientation.
    pub fn get(&self, source: &str, target: &str) -> Option<RelationLabel> {
        self.labels
            .get(&(source.to_string(), target.to_string()))
            .copied()
            .or_else(|| self.labels.get(&(target.to_string(), source.to_string())).map(|r| r.inverse()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, RelationLabel)> {
        self.labels.iter().map(|((a, b), r)| (a.as_str(), b.as_str(), *r))
    }

    /// Labels over `prob`'s canonical pairs, failing if any is missing or an
    /// extra pair is present.
    fn canonical_labels(&self, prob: &OrderingProblem) -> Result<Vec<RelationLabel>> {
        let pairs = prob.pairs();
        if self.labels.len() != pairs.len() {
            return Err(Error::InvalidArgument(format!(
                "assignment covers {} pairs, problem has {}",
                self.labels.len(),
                pairs.len()
            )));
        }
        pairs
            .into_iter()
            .map(|pair| {
                let (a, b) = prob.pair_names(pair);
                self.get(a, b).ok_or_else(|| Error::InvalidArgument(format!("assignment lacks pair ({a}, {b})")))
            })
            .collect()
    }
}

impl FromIterator<(String, String, RelationLabel)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (String, String, RelationLabel)>>(iter: I) -> Assignment {
        let mut a = Assignment::new();
        for (s, t, r) in iter {
            a.insert(&s, &t, r);
        }
        a
    }
}

pub fn objective_score(assign: &Assignment, prob: &OrderingProblem) -> Result<Rational> {
    let labels = assign.canonical_labels(prob)?;
    let mut total = Rational::ZERO;
    for (pair, label) in prob.pairs().into_iter().zip(labels) {
        total = total.checked_add(&prob.label_score(pair, label)?)?;
    }
    Ok(total)
}

/// Structured hinge loss with Hamming distance as the margin.
pub fn hinge_loss(pred: &Assignment, gold: &Assignment, prob: &OrderingProblem) -> Result<Rational> {
    let p = pred.canonical_labels(prob)?;
    let g = gold.canonical_labels(prob)?;
    let hamming = p.iter().zip(&g).filter(|(a, b)| a != b).count() as i128;
    let loss = Rational::from_integer(hamming)
        .checked_add(&objective_score(pred, prob)?)?
        .checked_sub(&objective_score(gold, prob)?)?;
    Ok(if loss.is_negative() { Rational::ZERO } else { loss })
}
