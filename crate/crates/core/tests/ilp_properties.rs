mod support;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stage_core::ilp::{
    default_transitivity_table, hinge_loss, objective_score, solve, Assignment, ConstraintMode, OrderingProblem,
};
use stage_core::{Error, Rational, RelationLabel};
use support::{check_feasible, endpoint_relation, enumerate_optimum, oracle_score, random_problem, small_intervals};

use RelationLabel::*;

#[test]
fn shipped_table_is_exactly_the_deterministic_compositions() {
    let intervals = small_intervals(5);
    let certain = [After, Before, Simultaneous, Includes, IsIncluded];
    let table = default_transitivity_table(&RelationLabel::ALL);
    for r1 in certain {
        for r2 in certain {
            let mut outcomes = std::collections::BTreeSet::new();
            for &x in &intervals {
                for &y in &intervals {
                    if endpoint_relation(x, y) != r1 {
                        continue;
                    }
                    for &z in &intervals {
                        if endpoint_relation(y, z) == r2 {
                            outcomes.insert(endpoint_relation(x, z));
                        }
                    }
                }
            }
            let listed: Vec<RelationLabel> =
                table.iter().filter(|t| t.0 == r1 && t.1 == r2).map(|t| t.2).collect();
            if outcomes.len() == 1 && !outcomes.contains(&Vague) {
                assert_eq!(listed, outcomes.into_iter().collect::<Vec<_>>(), "({r1}, {r2})");
            } else {
                assert!(listed.is_empty(), "({r1}, {r2}) listed but realizations give {outcomes:?}");
            }
        }
    }
}

#[test]
fn solver_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut infeasible = 0;
    for round in 0..200 {
        for mode in [ConstraintMode::None, ConstraintMode::Hard, ConstraintMode::Soft] {
            let prob = random_problem(&mut rng, 4, mode);
            let oracle = enumerate_optimum(&prob);
            match (solve(&prob), oracle) {
                (Ok(sol), Some((best, _))) => {
                    assert_eq!(sol.objective, best, "round {round} mode {mode}");
                    assert!(sol.proven_optimal);
                    check_feasible(&sol.assignment, &prob).unwrap_or_else(|e| panic!("round {round}: {e}"));
                    assert_eq!(oracle_score(&sol.assignment, &prob), sol.objective);
                }
                (Err(Error::Infeasible(_)), None) => {
                    assert_eq!(mode, ConstraintMode::Hard);
                    infeasible += 1;
                }
                (got, want) => panic!("round {round} mode {mode}: solver {got:?}, oracle {want:?}"),
            }
        }
    }
    assert!(infeasible < 200, "most hard problems should be feasible");
}

#[test]
fn three_event_chain() {
    let mut p = OrderingProblem::new(&["e1", "e2", "e3"], &[], &[Before, After]).unwrap();
    let ba = |b: &str| -> BTreeMap<RelationLabel, Rational> {
        let b: Rational = b.parse().unwrap();
        [(Before, b), (After, Rational::ONE - b)].into_iter().collect()
    };
    p.set_probabilities("e1", "e2", &ba("0.9")).unwrap();
    p.set_probabilities("e2", "e3", &ba("0.9")).unwrap();
    p.set_probabilities("e1", "e3", &ba("0.45")).unwrap();
    let (best, _) = enumerate_optimum(&p).unwrap();
    assert_eq!(best, "2.25".parse().unwrap());
    let sol = solve(&p).unwrap();
    assert_eq!(sol.objective, best);
    assert_eq!(sol.assignment.get("e1", "e3"), Some(Before));
}

#[test]
fn soft_constraints_dominate_uniform_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n_events = rng.gen_range(1..=3);
        let n_dummies = rng.gen_range(1..=2);
        let events: Vec<String> = (0..n_events).map(|i| format!("e{i}")).collect();
        let dummies: Vec<String> = (0..n_dummies).map(|i| format!("t{i}")).collect();
        let ev: Vec<&str> = events.iter().map(String::as_str).collect();
        let dm: Vec<&str> = dummies.iter().map(String::as_str).collect();
        let mut p = OrderingProblem::new(&ev, &dm, &RelationLabel::ALL).unwrap();
        p.mode = ConstraintMode::Soft;
        let uniform: BTreeMap<RelationLabel, Rational> =
            RelationLabel::ALL.iter().map(|r| (*r, Rational::new(1, 6).unwrap())).collect();
        let nodes = p.nodes().to_vec();
        // a consistent layout so that every parser relation can hold at once
        let layout: Vec<(i64, i64)> = (0..nodes.len()).map(|k| (3 * k as i64, 3 * k as i64 + 1)).collect();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                p.set_probabilities(&nodes[i], &nodes[j], &uniform).unwrap();
                if p.is_dummy(i) || p.is_dummy(j) {
                    p.set_stage_relation(&nodes[i], &nodes[j], endpoint_relation(layout[i], layout[j])).unwrap();
                }
            }
        }
        let sol = solve(&p).unwrap();
        for (&(i, j), r) in p.stage_relations() {
            assert_eq!(sol.assignment.get(&nodes[i], &nodes[j]), Some(*r));
        }
    }
}

#[test]
fn hinge_closed_form() {
    let mut p = OrderingProblem::new(&["x", "y"], &[], &[Before, After]).unwrap();
    let probs = [(Before, "0.2".parse().unwrap()), (After, "0.8".parse().unwrap())].into_iter().collect();
    p.set_probabilities("x", "y", &probs).unwrap();
    let gold: Assignment = [("x".to_string(), "y".to_string(), Before)].into_iter().collect();
    let pred: Assignment = [("x".to_string(), "y".to_string(), After)].into_iter().collect();
    let loss = hinge_loss(&pred, &gold, &p).unwrap();
    assert_eq!(loss, "1.6".parse().unwrap());
    assert!((loss.to_f64() - 1.6).abs() < 1e-12);
}

#[test]
fn hamming_dominates_when_scores_tie() {
    let mut p = OrderingProblem::new(&["a", "b", "c"], &[], &[Before, After, Vague]).unwrap();
    let third = Rational::new(1, 3).unwrap();
    let uniform: BTreeMap<RelationLabel, Rational> = [(Before, third), (After, third), (Vague, third)].into_iter().collect();
    for (x, y) in [("a", "b"), ("a", "c"), ("b", "c")] {
        p.set_probabilities(x, y, &uniform).unwrap();
    }
    let gold: Assignment = [("a", "b"), ("a", "c"), ("b", "c")]
        .into_iter()
        .map(|(x, y)| (x.to_string(), y.to_string(), Vague))
        .collect();
    for k in 0..=3 {
        let mut pred = gold.clone();
        for (x, y) in [("a", "b"), ("a", "c"), ("b", "c")].into_iter().take(k) {
            pred.insert(x, y, Before);
        }
        assert_eq!(hinge_loss(&pred, &gold, &p).unwrap(), Rational::from_integer(k as i128));
    }
}

#[test]
fn mismatched_assignments_are_rejected() {
    let mut p = OrderingProblem::new(&["x", "y"], &[], &[Before, After]).unwrap();
    let probs = [(Before, Rational::ONE)].into_iter().collect();
    p.set_probabilities("x", "y", &probs).unwrap();
    let good: Assignment = [("x".to_string(), "y".to_string(), Before)].into_iter().collect();
    let stray: Assignment = [("x".to_string(), "z".to_string(), Before)].into_iter().collect();
    assert!(matches!(hinge_loss(&good, &stray, &p), Err(Error::InvalidArgument(_))));
    assert!(matches!(objective_score(&Assignment::new(), &p), Err(Error::InvalidArgument(_))));
}

#[test]
fn ten_events_solve_to_proven_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let names: Vec<String> = (0..10).map(|i| format!("e{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut p = OrderingProblem::new(&refs, &[], &RelationLabel::ALL).unwrap();
    for i in 0..10 {
        for j in i + 1..10 {
            // three-decimal probabilities cut uniformly at random, so many
            // labels score alike and transitivity decides
            let mut cuts: Vec<i128> = (0..5).map(|_| rng.gen_range(0..=1000)).collect();
            cuts.sort_unstable();
            cuts.insert(0, 0);
            cuts.push(1000);
            let dist = RelationLabel::ALL
                .iter()
                .zip(cuts.windows(2))
                .map(|(r, w)| (*r, Rational::new(w[1] - w[0], 1000).unwrap()))
                .collect();
            p.set_probabilities(&names[i], &names[j], &dist).unwrap();
        }
    }
    let sol = solve(&p).unwrap();
    assert!(sol.proven_optimal);
    check_feasible(&sol.assignment, &p).unwrap();
    assert_eq!(oracle_score(&sol.assignment, &p), sol.objective);
}

fn problem_strategy() -> impl Strategy<Value = (u64, u8)> {
    (any::<u64>(), 0u8..3)
}

fn mode_of(m: u8) -> ConstraintMode {
    [ConstraintMode::None, ConstraintMode::Hard, ConstraintMode::Soft][m as usize]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solutions_pass_the_independent_checker((seed, m) in problem_strategy()) {
        let prob = random_problem(&mut ChaCha8Rng::seed_from_u64(seed), 4, mode_of(m));
        if let Ok(sol) = solve(&prob) {
            prop_assert!(check_feasible(&sol.assignment, &prob).is_ok());
        }
    }

    #[test]
    fn hinge_is_nonnegative_and_zero_on_gold((seed, m) in problem_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prob = random_problem(&mut rng, 4, mode_of(m));
        let nodes = prob.nodes().to_vec();
        let random_assignment = |rng: &mut ChaCha8Rng| -> Assignment {
            prob.pairs()
                .into_iter()
                .map(|(i, j)| (nodes[i].clone(), nodes[j].clone(), RelationLabel::ALL[rng.gen_range(0..6)]))
                .collect()
        };
        let gold = random_assignment(&mut rng);
        let pred = random_assignment(&mut rng);
        prop_assert_eq!(hinge_loss(&gold, &gold, &prob).unwrap(), Rational::ZERO);
        prop_assert!(!hinge_loss(&pred, &gold, &prob).unwrap().is_negative());
    }

    #[test]
    fn soft_terms_account_for_the_objective_difference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let soft = random_problem(&mut rng, 4, ConstraintMode::Soft);
        let mut plain = soft.clone();
        plain.mode = ConstraintMode::None;
        let nodes = soft.nodes().to_vec();
        let assign: Assignment = soft
            .pairs()
            .into_iter()
            .map(|(i, j)| (nodes[i].clone(), nodes[j].clone(), RelationLabel::ALL[rng.gen_range(0..6)]))
            .collect();
        let others = Rational::from_integer(soft.relation_set().len() as i128 - 1);
        let mut added = Rational::ZERO;
        for (&(i, j), tp) in soft.stage_relations() {
            added = added + if assign.get(&nodes[i], &nodes[j]) == Some(*tp) {
                soft.alpha
            } else {
                (Rational::ONE - soft.alpha).checked_div(&others).unwrap()
            };
        }
        let diff = objective_score(&assign, &soft).unwrap() - objective_score(&assign, &plain).unwrap();
        prop_assert_eq!(diff, added);
    }

    #[test]
    fn empty_table_without_constraints_is_per_pair_argmax(seed in any::<u64>()) {
        let mut prob = random_problem(&mut ChaCha8Rng::seed_from_u64(seed), 4, ConstraintMode::None);
        prob.transitivity.clear();
        let sol = solve(&prob).unwrap();
        let mut argmax = Rational::ZERO;
        for pair in prob.pairs() {
            argmax = argmax + prob.pair_probabilities(pair).unwrap().into_iter().map(|(_, p)| p).max().unwrap();
        }
        prop_assert_eq!(sol.objective, argmax);
    }
}
