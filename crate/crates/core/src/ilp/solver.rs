//! Depth-first branch and bound over label domains.
//!
//! Each pair holds a bitmask of still-possible labels (bit = label index).
//! After every branching decision the domains are narrowed to path
//! consistency: for every ordered triple `(x, y, z)` the labels left on
//! `x z` must be reachable by composing some label of `x y` with some label
//! of `y z`. Once every domain is a singleton this is exactly the
//! transitivity constraint, so leaves are feasible by construction.
//!
//! Bounds come from splitting each pair's score between the pair itself
//! and the triangles containing it. Any exact split gives an upper bound:
//! the best value of each pair part plus the best transitive labelling of
//! each triangle part. The split starts as "all on the pair" (the per-pair
//! maxima) and is improved by coordinate descent that evens out each pair's
//! per-label maxima across its parts, thoroughly at the root and a few
//! sweeps per node after that. The same quantities bound every single
//! label, so labels that cannot beat the incumbent are removed before
//! branching.
//!
//! Scores are scaled to integers by the least common denominator so the
//! search compares exact values without rational normalisation.

use std::collections::VecDeque;

use num_integer::Integer;

use super::{objective_score, Assignment, ConstraintMode, OrderingProblem};
use crate::bridge::RelationLabel;
use crate::rational::Rational;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub assignment: Assignment,
    pub objective: Rational,
    /// False when the search budget ran out before optimality was proven.
    pub proven_optimal: bool,
    pub nodes_explored: u64,
}

type Mask = u8;

const LABELS: usize = 6;

/// Coordinate-descent sweeps at the root and at every later search node.
const ROOT_SWEEPS: usize = 200;
const NODE_SWEEPS: usize = 4;

fn bit(r: RelationLabel) -> Mask {
    1 << r.index()
}

fn labels(m: Mask) -> impl Iterator<Item = usize> {
    (0..LABELS).filter(move |i| m & (1 << i) != 0)
}

/// A split of every pair's score between the pair itself and the triangles
/// containing it. For each pair and label, the edge term plus the triangle
/// terms equal the pair's score.
#[derive(Debug, Clone)]
struct Dual {
    edge: Vec<[i128; LABELS]>,
    /// Terms for the edges `(x y, y z, x z)` of each triangle.
    triangle: Vec<[[i128; LABELS]; 3]>,
}

fn inverse_mask(m: Mask) -> Mask {
    RelationLabel::ALL
        .iter()
        .filter(|r| m & bit(**r) != 0)
        .fold(0, |acc, r| acc | bit(r.inverse()))
}

struct Search<'p> {
    prob: &'p OrderingProblem,
    n: usize,
    pair_id: Vec<Vec<usize>>,
    /// `compose[m1][m2]`: labels of `x z` compatible with `x y ∈ m1`, `y z ∈ m2`.
    compose: Vec<[Mask; 64]>,
    inverse: [Mask; 64],
    scores: Vec<[i128; LABELS]>,
    /// Pair ids `(x y, y z, x z)` of every triangle `x < y < z`.
    triangles: Vec<[usize; 3]>,
    /// For each pair, the triangles containing it and its position there.
    incident: Vec<Vec<(usize, usize)>>,
    /// Labels `(a, b, c)` on `(x y, y z, x z)` that satisfy the table in
    /// every orientation.
    combos: Vec<(usize, usize, usize)>,
    /// Position of each pair in descending order of score margin.
    rank: Vec<usize>,
    best: Option<(i128, Vec<Mask>)>,
    nodes: u64,
    budget: Option<u64>,
    exhausted: bool,
    conflict: Option<(usize, usize, usize)>,
}

impl<'p> Search<'p> {
    fn new(prob: &'p OrderingProblem) -> Result<Search<'p>> {
        let n = prob.nodes().len();
        let mut pair_id = vec![vec![usize::MAX; n]; n];
        for (k, (i, j)) in prob.pairs().into_iter().enumerate() {
            pair_id[i][j] = k;
            pair_id[j][i] = k;
        }

        let full: Mask = prob.relation_set().iter().fold(0, |m, r| m | bit(*r));
        let mut single = [[full; LABELS]; LABELS];
        for &(r1, r2, r3) in &prob.transitivity {
            single[r1.index()][r2.index()] &= bit(r3);
        }
        let mut compose = vec![[0 as Mask; 64]; 64];
        for m1 in 0..64usize {
            for m2 in 0..64usize {
                let mut out = 0;
                for a in 0..LABELS {
                    for b in 0..LABELS {
                        if m1 & (1 << a) != 0 && m2 & (1 << b) != 0 {
                            out |= single[a][b];
                        }
                    }
                }
                compose[m1][m2] = out;
            }
        }
        let mut inverse = [0; 64];
        for (m, slot) in inverse.iter_mut().enumerate() {
            *slot = inverse_mask(m as Mask);
        }
        let mut consistent = [[[false; LABELS]; LABELS]; LABELS];
        for (a, row) in consistent.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                for (c, ok) in cell.iter_mut().enumerate() {
                    let rel = |p: usize, q: usize| -> usize {
                        let l = match (p.min(q), p.max(q)) {
                            (0, 1) => a,
                            (1, 2) => b,
                            _ => c,
                        };
                        if p < q { l } else { RelationLabel::ALL[l].inverse().index() }
                    };
                    *ok = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
                        .iter()
                        .all(|&(p, q, r)| single[rel(p, q)][rel(q, r)] & (1 << rel(p, r)) != 0);
                }
            }
        }
        let mut triangles = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    triangles.push([pair_id[x][y], pair_id[y][z], pair_id[x][z]]);
                }
            }
        }
        let mut incident = vec![Vec::new(); pairs_len(n)];
        for (t, tri) in triangles.iter().enumerate() {
            for (pos, &e) in tri.iter().enumerate() {
                incident[e].push((t, pos));
            }
        }

        let pairs = prob.pairs();
        let mut raw = Vec::with_capacity(pairs.len());
        let mut denom: i128 = 1;
        for &pair in &pairs {
            let mut row = [None; LABELS];
            for &r in prob.relation_set() {
                let s = prob.label_score(pair, r)?;
                denom = denom.checked_div(denom.gcd(&s.denom())).and_then(|d| d.checked_mul(s.denom())).ok_or(Error::Overflow)?;
                row[r.index()] = Some(s);
            }
            raw.push(row);
        }
        let scale = Rational::from_integer(denom);
        let scores = raw
            .into_iter()
            .map(|row| {
                let mut out = [i128::MIN; LABELS];
                for (slot, s) in out.iter_mut().zip(row) {
                    if let Some(s) = s {
                        *slot = s.checked_mul(&scale)?.numer();
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let margin = |k: usize| {
            let mut v: Vec<i128> = prob.relation_set().iter().map(|r| scores[k][r.index()]).collect();
            v.sort_unstable_by(|a, b| b.cmp(a));
            v[0] - v.get(1).copied().unwrap_or(v[0])
        };
        order.sort_by_key(|&k| std::cmp::Reverse(margin(k)));
        let mut rank = vec![0; order.len()];
        for (pos, &k) in order.iter().enumerate() {
            rank[k] = pos;
        }

        let budget = (n > prob.exact_limit).then_some(prob.node_budget);
        Ok(Search {
            prob,
            n,
            pair_id,
            compose,
            inverse,
            scores,
            incident,
            triangles,
            combos: (0..LABELS * LABELS * LABELS)
                .map(|i| (i / 36, i / 6 % 6, i % 6))
                .filter(|&(a, b, c)| consistent[a][b][c])
                .collect(),
            rank,
            best: None,
            nodes: 0,
            budget,
            exhausted: false,
            conflict: None,
        })
    }

    fn get(&self, d: &[Mask], x: usize, y: usize) -> Mask {
        let m = d[self.pair_id[x][y]];
        if x < y {
            m
        } else {
            self.inverse[m as usize]
        }
    }

    /// Restrict `x y` to `allowed`; returns whether the domain shrank.
    fn restrict(&self, d: &mut [Mask], x: usize, y: usize, allowed: Mask) -> bool {
        let allowed = if x < y { allowed } else { self.inverse[allowed as usize] };
        let k = self.pair_id[x][y];
        let narrowed = d[k] & allowed;
        let changed = narrowed != d[k];
        d[k] = narrowed;
        changed
    }

    /// Narrow all domains to path consistency. `Err` names a node triple
    /// whose domains emptied.
    fn propagate(&self, d: &mut [Mask], seeds: impl IntoIterator<Item = usize>) -> Result<(), (usize, usize, usize)> {
        let pairs = self.prob.pairs();
        let mut queued = vec![false; d.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for k in seeds {
            if !queued[k] {
                queued[k] = true;
                queue.push_back(k);
            }
        }
        while let Some(k) = queue.pop_front() {
            queued[k] = false;
            let (x, y) = pairs[k];
            for z in 0..self.n {
                if z == x || z == y {
                    continue;
                }
                let t = [x, y, z];
                for (a, b, c) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
                    let (p, q, r) = (t[a], t[b], t[c]);
                    let allowed = self.compose[self.get(d, p, q) as usize][self.get(d, q, r) as usize];
                    if self.restrict(d, p, r, allowed) {
                        let kk = self.pair_id[p][r];
                        if d[kk] == 0 {
                            return Err((p, q, r));
                        }
                        if !queued[kk] {
                            queued[kk] = true;
                            queue.push_back(kk);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn initial_dual(&self) -> Dual {
        Dual { edge: self.scores.clone(), triangle: vec![[[0; LABELS]; 3]; self.triangles.len()] }
    }

    /// Sum of each pair's best remaining score; exact once every domain is
    /// a singleton.
    fn pairwise_bound(&self, d: &[Mask]) -> i128 {
        d.iter()
            .zip(&self.scores)
            .map(|(m, row)| labels(*m).map(|i| row[i]).max().unwrap_or(i128::MIN))
            .sum()
    }

    /// Best consistent labelling of triangle `t` under `dual`, and for each of
    /// its edges the best value with that edge's own term left out.
    fn triangle_marginals(&self, d: &[Mask], dual: &Dual, t: usize) -> (Option<i128>, [[Option<i128>; LABELS]; 3]) {
        let [xy, yz, xz] = self.triangles[t];
        let phi = &dual.triangle[t];
        let mut best = None;
        let mut marg = [[None; LABELS]; 3];
        let raise = |slot: &mut Option<i128>, v: i128| {
            if slot.is_none_or(|old| v > old) {
                *slot = Some(v);
            }
        };
        let (mx, my, mz) = (d[xy], d[yz], d[xz]);
        for &(a, b, c) in &self.combos {
            if mx & (1 << a) == 0 || my & (1 << b) == 0 || mz & (1 << c) == 0 {
                continue;
            }
            let v = phi[0][a] + phi[1][b] + phi[2][c];
            raise(&mut best, v);
            raise(&mut marg[0][a], v - phi[0][a]);
            raise(&mut marg[1][b], v - phi[1][b]);
            raise(&mut marg[2][c], v - phi[2][c]);
        }
        (best, marg)
    }

    /// Upper bound on any leaf below `d`, or `None` when some triangle has
    /// no consistent labelling left.
    fn bound(&self, d: &[Mask], dual: &Dual) -> Option<i128> {
        let mut total: i128 = d
            .iter()
            .zip(&dual.edge)
            .map(|(m, row)| labels(*m).map(|i| row[i]).max().unwrap_or(i128::MIN))
            .sum();
        for t in 0..self.triangles.len() {
            total += self.triangle_marginals(d, dual, t).0?;
        }
        Some(total)
    }

    /// The bound, and for every pair and remaining label the bound obtained
    /// by fixing that pair to that label while keeping the other parts at
    /// their maxima.
    fn label_bounds(&self, d: &[Mask], dual: &Dual) -> Option<(i128, Vec<[Option<i128>; LABELS]>)> {
        let mut tri_best = Vec::with_capacity(self.triangles.len());
        let mut tri_marg = Vec::with_capacity(self.triangles.len());
        for t in 0..self.triangles.len() {
            let (best, marg) = self.triangle_marginals(d, dual, t);
            tri_best.push(best?);
            tri_marg.push(marg);
        }
        let edge_best: Vec<i128> =
            d.iter().zip(&dual.edge).map(|(m, row)| labels(*m).map(|i| row[i]).max().unwrap_or(i128::MIN)).collect();
        let total: i128 = edge_best.iter().sum::<i128>() + tri_best.iter().sum::<i128>();
        let per_label = (0..d.len())
            .map(|e| {
                let mut out = [None; LABELS];
                'label: for l in labels(d[e]) {
                    let mut v = total - edge_best[e] + dual.edge[e][l];
                    for &(t, pos) in &self.incident[e] {
                        let Some(m) = tri_marg[t][pos][l] else { continue 'label };
                        v += m + dual.triangle[t][pos][l] - tri_best[t];
                    }
                    out[l] = Some(v);
                }
                out
            })
            .collect();
        Some((total, per_label))
    }

    /// Rebalance pair `e` between its own term and its triangles so that each
    /// part has the same best value per label. The sum over the parts is kept
    /// exactly equal to the pair's score.
    fn rebalance(&self, d: &[Mask], dual: &mut Dual, e: usize) {
        let incident = &self.incident[e];
        if incident.is_empty() {
            return;
        }
        let k = incident.len() as i128;
        let marginals: Vec<[Option<i128>; LABELS]> =
            incident.iter().map(|&(t, pos)| self.triangle_marginals(d, dual, t).1[pos]).collect();
        for l in labels(d[e]) {
            let Some(mu) = marginals.iter().map(|m| m[l]).collect::<Option<Vec<i128>>>() else { continue };
            let total = dual.edge[e][l] + incident.iter().zip(&mu).map(|(&(t, pos), m)| dual.triangle[t][pos][l] + m).sum::<i128>();
            let share = total.div_euclid(k + 1);
            for (&(t, pos), m) in incident.iter().zip(&mu) {
                dual.triangle[t][pos][l] = share - m;
            }
            dual.edge[e][l] = total - k * share;
        }
    }

    /// Coordinate descent on the split, stopping when a sweep gains nothing.
    fn tighten(&self, d: &[Mask], dual: &mut Dual, max_sweeps: usize) {
        let mut last = self.bound(d, dual);
        for _ in 0..max_sweeps {
            for e in 0..d.len() {
                self.rebalance(d, dual, e);
            }
            let now = self.bound(d, dual);
            if now.is_none() || now >= last {
                break;
            }
            last = now;
        }
    }

    fn dfs(&mut self, mut d: Vec<Mask>, mut dual: Dual) {
        self.nodes += 1;
        if let Some(limit) = self.budget {
            if self.nodes > limit && self.best.is_some() {
                self.exhausted = true;
                return;
            }
        }
        let incumbent = self.best.as_ref().map(|(b, _)| *b);
        if let Some(best) = incumbent {
            if self.bound(&d, &dual).is_none_or(|b| b <= best) {
                return;
            }
            self.tighten(&d, &mut dual, NODE_SWEEPS);
        }
        let Some((bound, per_label)) = self.label_bounds(&d, &dual) else { return };
        if incumbent.is_some_and(|best| bound <= best) {
            return;
        }
        // drop labels that cannot lead past the incumbent
        if let Some(best) = incumbent {
            let mut changed = Vec::new();
            for (e, row) in per_label.iter().enumerate() {
                let keep = labels(d[e]).filter(|&l| row[l].is_some_and(|v| v > best)).fold(0, |m, l| m | (1 << l));
                if keep == 0 {
                    return;
                }
                if keep != d[e] {
                    d[e] = keep;
                    changed.push(e);
                }
            }
            if !changed.is_empty() {
                if self.propagate(&mut d, changed).is_err() {
                    return;
                }
                return self.dfs_branch(d, dual, None);
            }
        }
        self.dfs_branch(d, dual, Some(per_label));
    }

    /// Branch on the open pair with the fewest labels, best label first.
    fn dfs_branch(&mut self, d: Vec<Mask>, dual: Dual, per_label: Option<Vec<[Option<i128>; LABELS]>>) {
        let per_label = match per_label {
            Some(p) => p,
            None => match self.label_bounds(&d, &dual) {
                Some((_, p)) => p,
                None => return,
            },
        };
        let open = (0..d.len()).filter(|&e| d[e].count_ones() > 1);
        let Some(k) = open.min_by_key(|&e| (d[e].count_ones(), self.rank[e])) else {
            let score = self.pairwise_bound(&d);
            if self.best.as_ref().is_none_or(|(best, _)| score > *best) {
                self.best = Some((score, d));
            }
            return;
        };
        let mut choices: Vec<usize> = labels(d[k]).collect();
        choices.sort_by_key(|&i| (std::cmp::Reverse(per_label[k][i]), std::cmp::Reverse(self.scores[k][i]), i));
        for i in choices {
            if self.exhausted {
                return;
            }
            let mut child = d.clone();
            child[k] = 1 << i;
            match self.propagate(&mut child, [k]) {
                Ok(()) => self.dfs(child, dual.clone()),
                Err(t) => {
                    self.conflict.get_or_insert(t);
                }
            }
        }
    }
}

fn pairs_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn describe_conflict(prob: &OrderingProblem, (x, y, z): (usize, usize, usize)) -> String {
    let names = prob.nodes();
    let mut fixed = Vec::new();
    for (a, b) in [(x, y), (y, z), (x, z)] {
        let key = (a.min(b), a.max(b));
        if let Some(r) = prob.stage_relations().get(&key) {
            fixed.push(format!("{} {} {}", names[key.0], r, names[key.1]));
        }
    }
    let mut msg = format!("triple ({}, {}, {}) admits no transitive labelling", names[x], names[y], names[z]);
    if !fixed.is_empty() {
        msg.push_str(&format!(" given {}", fixed.join(", ")));
    }
    msg
}

/// Find a maximum-objective assignment.
pub fn solve(prob: &OrderingProblem) -> Result<Solution> {
    prob.validate()?;
    let mut search = Search::new(prob)?;
    let full: Mask = prob.relation_set().iter().fold(0, |m, r| m | bit(*r));
    let mut domains = vec![full; prob.pairs().len()];
    if prob.mode == ConstraintMode::Hard {
        for (&(i, j), r) in prob.stage_relations() {
            domains[search.pair_id[i][j]] = bit(*r);
        }
    }
    let seeds: Vec<usize> = (0..domains.len()).collect();
    if let Err(t) = search.propagate(&mut domains, seeds) {
        return Err(Error::Infeasible(describe_conflict(prob, t)));
    }
    let mut dual = search.initial_dual();
    search.tighten(&domains, &mut dual, ROOT_SWEEPS);
    search.dfs(domains, dual);

    let Some((_, best)) = search.best.take() else {
        let detail = match search.conflict {
            Some(t) => describe_conflict(prob, t),
            None => "no assignment satisfies the transitivity table".into(),
        };
        return Err(Error::Infeasible(detail));
    };
    let mut assignment = Assignment::new();
    for ((i, j), m) in prob.pairs().into_iter().zip(best) {
        let label = RelationLabel::from_index(m.trailing_zeros() as usize).expect("singleton domain");
        let (a, b) = prob.pair_names((i, j));
        assignment.insert(a, b, label);
    }
    let objective = objective_score(&assignment, prob)?;
    Ok(Solution { assignment, objective, proven_optimal: !search.exhausted, nodes_explored: search.nodes })
}
