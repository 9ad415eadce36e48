//! Independent oracles shared by the integration suites.
//!
//! Nothing here calls into the solver or the relation deriver; the checks
//! are written directly from the definitions.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use stage_core::ilp::{Assignment, ConstraintMode, OrderingProblem};
use stage_core::{Rational, RelationLabel};

/// Relation of interval `x` to interval `y` from their endpoints, or `Vague`
/// when the endpoints show some other overlap.
pub fn endpoint_relation(x: (i64, i64), y: (i64, i64)) -> RelationLabel {
    if x.1 < y.0 {
        RelationLabel::Before
    } else if y.1 < x.0 {
        RelationLabel::After
    } else if x == y {
        RelationLabel::Simultaneous
    } else if x.0 < y.0 && y.1 < x.1 {
        RelationLabel::Includes
    } else if y.0 < x.0 && x.1 < y.1 {
        RelationLabel::IsIncluded
    } else {
        RelationLabel::Vague
    }
}

/// All intervals (instants included) with endpoints in `0..=max`.
pub fn small_intervals(max: i64) -> Vec<(i64, i64)> {
    (0..=max).flat_map(|s| (s..=max).map(move |e| (s, e))).collect()
}

/// Label of the ordered pair `(a, b)` as stored in the assignment.
fn label(assign: &Assignment, a: &str, b: &str) -> Option<RelationLabel> {
    assign.iter().find_map(|(s, t, r)| {
        if s == a && t == b {
            Some(r)
        } else if s == b && t == a {
            Some(r.inverse())
        } else {
            None
        }
    })
}

/// Check unique labelling, transitivity over every ordered triple and, in
/// hard mode, agreement with every parser relation.
pub fn check_feasible(assign: &Assignment, prob: &OrderingProblem) -> Result<(), String> {
    let nodes = prob.nodes();
    let expected = nodes.len() * nodes.len().saturating_sub(1) / 2;
    if assign.len() != expected {
        return Err(format!("{} labels for {} pairs", assign.len(), expected));
    }
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let both = assign
                .iter()
                .filter(|(s, t, _)| (*s == nodes[i] && *t == nodes[j]) || (*s == nodes[j] && *t == nodes[i]))
                .count();
            if both != 1 {
                return Err(format!("pair ({}, {}) labelled {} times", nodes[i], nodes[j], both));
            }
            let r = label(assign, &nodes[i], &nodes[j]).unwrap();
            if !prob.relation_set().contains(&r) {
                return Err(format!("label {r} outside the relation set"));
            }
        }
    }
    for x in nodes {
        for y in nodes {
            for z in nodes {
                if x == y || y == z || x == z {
                    continue;
                }
                let (r1, r2, r3) = (label(assign, x, y).unwrap(), label(assign, y, z).unwrap(), label(assign, x, z).unwrap());
                for t in &prob.transitivity {
                    if t.0 == r1 && t.1 == r2 && t.2 != r3 {
                        return Err(format!("{x} {r1} {y}, {y} {r2} {z} but {x} {r3} {z}"));
                    }
                }
            }
        }
    }
    if prob.mode == ConstraintMode::Hard {
        for (&(i, j), r) in prob.stage_relations() {
            if label(assign, &nodes[i], &nodes[j]) != Some(*r) {
                return Err(format!("hard relation {} {r} {} not honoured", nodes[i], nodes[j]));
            }
        }
    }
    Ok(())
}

/// Objective computed from the problem's public probability tables.
pub fn oracle_score(assign: &Assignment, prob: &OrderingProblem) -> Rational {
    let nodes = prob.nodes();
    let mut total = Rational::ZERO;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let r = label(assign, &nodes[i], &nodes[j]).unwrap();
            total = total + pair_score(prob, (i, j), r);
        }
    }
    total
}

fn pair_score(prob: &OrderingProblem, pair: (usize, usize), r: RelationLabel) -> Rational {
    let mut score = prob.pair_probabilities(pair).unwrap().into_iter().find(|(l, _)| *l == r).unwrap().1;
    if prob.mode == ConstraintMode::Soft {
        if let Some(tp) = prob.stage_relations().get(&pair) {
            score = score
                + if *tp == r {
                    prob.alpha
                } else {
                    let k = Rational::from_integer(prob.relation_set().len() as i128 - 1);
                    (Rational::ONE - prob.alpha).checked_div(&k).unwrap()
                };
        }
    }
    score
}

/// Best feasible objective by trying every labelling, or `None` when no
/// labelling is feasible.
pub fn enumerate_optimum(prob: &OrderingProblem) -> Option<(Rational, Assignment)> {
    let nodes = prob.nodes();
    let n = nodes.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut id = vec![vec![0; n]; n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        id[i][j] = k;
        id[j][i] = k;
    }
    let labels = prob.relation_set();
    let scores: Vec<Vec<Rational>> =
        pairs.iter().map(|&p| labels.iter().map(|&r| pair_score(prob, p, r)).collect()).collect();
    let triples: Vec<_> = prob.transitivity.iter().copied().collect();
    let forced: Vec<Option<RelationLabel>> = pairs
        .iter()
        .map(|p| if prob.mode == ConstraintMode::Hard { prob.stage_relations().get(p).copied() } else { None })
        .collect();
    let total = labels.len().pow(pairs.len() as u32);
    let mut chosen = vec![0usize; pairs.len()];
    let mut best: Option<(Rational, Vec<usize>)> = None;
    'codes: for code in 0..total {
        let mut c = code;
        for slot in chosen.iter_mut() {
            *slot = c % labels.len();
            c /= labels.len();
        }
        for (k, f) in forced.iter().enumerate() {
            if f.is_some_and(|f| labels[chosen[k]] != f) {
                continue 'codes;
            }
        }
        let rel = |x: usize, y: usize| {
            let r = labels[chosen[id[x][y]]];
            if x < y { r } else { r.inverse() }
        };
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    let (r1, r2, r3) = (rel(x, y), rel(y, z), rel(x, z));
                    if triples.iter().any(|t| t.0 == r1 && t.1 == r2 && t.2 != r3) {
                        continue 'codes;
                    }
                }
            }
        }
        let score = chosen.iter().enumerate().fold(Rational::ZERO, |acc, (k, &l)| acc + scores[k][l]);
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, chosen.clone()));
        }
    }
    best.map(|(score, chosen)| {
        let mut assign = Assignment::new();
        for (k, &(i, j)) in pairs.iter().enumerate() {
            assign.insert(&nodes[i], &nodes[j], labels[chosen[k]]);
        }
        (score, assign)
    })
}

fn random_distribution<R: Rng>(rng: &mut R, labels: &[RelationLabel]) -> BTreeMap<RelationLabel, Rational> {
    let mut weights: Vec<i128> = labels.iter().map(|_| rng.gen_range(0..=20)).collect();
    if weights.iter().all(|w| *w == 0) {
        weights[0] = 1;
    }
    let total: i128 = weights.iter().sum();
    labels.iter().zip(weights).map(|(r, w)| (*r, Rational::new(w, total).unwrap())).collect()
}

const CERTAIN: [RelationLabel; 5] = [
    RelationLabel::After,
    RelationLabel::Before,
    RelationLabel::Simultaneous,
    RelationLabel::Includes,
    RelationLabel::IsIncluded,
];

/// A random problem over at most `max_nodes` nodes and the full label set.
///
/// Half of the problems take their parser relations from a random interval
/// layout (always consistent); the rest draw them independently, so hard
/// mode can be infeasible.
pub fn random_problem<R: Rng>(rng: &mut R, max_nodes: usize, mode: ConstraintMode) -> OrderingProblem {
    let n = rng.gen_range(2..=max_nodes);
    let dummies = rng.gen_range(0..=n.min(2));
    let events: Vec<String> = (0..n - dummies).map(|i| format!("e{i}")).collect();
    let times: Vec<String> = (0..dummies).map(|i| format!("t{i}")).collect();
    let ev: Vec<&str> = events.iter().map(String::as_str).collect();
    let tm: Vec<&str> = times.iter().map(String::as_str).collect();
    let mut prob = OrderingProblem::new(&ev, &tm, &RelationLabel::ALL).unwrap();
    prob.mode = mode;
    prob.alpha = if rng.gen_bool(0.5) { Rational::new(9, 10).unwrap() } else { Rational::new(rng.gen_range(1..=10), 10).unwrap() };
    let nodes: Vec<String> = prob.nodes().to_vec();
    let layout: Vec<(i64, i64)> = (0..nodes.len())
        .map(|_| {
            let s = rng.gen_range(0..6);
            (s, s + rng.gen_range(0..4))
        })
        .collect();
    let consistent = rng.gen_bool(0.5);
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let dummy_pair = prob.is_dummy(i) || prob.is_dummy(j);
            if !dummy_pair || rng.gen_bool(0.5) {
                let dist = random_distribution(rng, &RelationLabel::ALL);
                prob.set_probabilities(&nodes[i], &nodes[j], &dist).unwrap();
            }
            if dummy_pair && rng.gen_bool(0.6) {
                let r = if consistent {
                    endpoint_relation(layout[i], layout[j])
                } else {
                    CERTAIN[rng.gen_range(0..CERTAIN.len())]
                };
                if r != RelationLabel::Vague {
                    prob.set_stage_relation(&nodes[i], &nodes[j], r).unwrap();
                }
            }
        }
    }
    prob
}
