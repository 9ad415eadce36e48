mod support;

use proptest::prelude::*;
use stage_core::bridge::{derive_relation, features, generate_constraints, Orientation};
use stage_core::temporal::length_from;
use stage_core::{Rational, RelationLabel, TimeExpression, TimePoint, UnitKind};
use support::endpoint_relation;

fn at(h: i64) -> TimePoint {
    TimePoint::known(Rational::from(h))
}

fn hours(h: i64) -> stage_core::Length {
    length_from(Rational::from(h), UnitKind::Hour).unwrap()
}

/// An expression together with the event extents it admits.
#[derive(Debug, Clone)]
struct Case {
    expr: TimeExpression,
    realizations: Vec<(i64, i64)>,
}

fn exact(s: i64, e: i64) -> impl Strategy<Value = Case> {
    prop_oneof![
        Just(Case { expr: TimeExpression::instant(at(s)), realizations: vec![(s, s)] }),
        Just(Case {
            expr: TimeExpression::interval(at(s), at(s + e), Some(hours(e))).unwrap(),
            realizations: vec![(s, s + e)]
        }),
        Just(Case { expr: TimeExpression::interval(at(s), at(s + e), None).unwrap(), realizations: vec![(s, s + e)] }),
        Just(Case {
            expr: TimeExpression::interval(TimePoint::Unknown, at(s + e), Some(hours(e))).unwrap(),
            realizations: vec![(s, s + e)]
        }),
    ]
}

fn range(lo: i64, w: i64) -> impl Strategy<Value = Case> {
    let within: Vec<(i64, i64)> = (lo..=lo + w).flat_map(|s| (s..=lo + w).map(move |e| (s, e))).collect();
    let with_inner = within.clone();
    prop_oneof![
        Just(Case {
            expr: TimeExpression::range(at(lo), at(lo + w), None, None).unwrap(),
            realizations: within
        }),
        Just(Case {
            expr: TimeExpression::range(at(lo), at(lo + w), None, Some(hours(1))).unwrap(),
            realizations: with_inner.into_iter().filter(|(s, e)| e - s == 1).collect()
        }),
    ]
}

fn case() -> impl Strategy<Value = Case> {
    (0i64..12, 0i64..5, any::<bool>()).prop_flat_map(|(s, w, is_range)| {
        if is_range {
            range(s, w).boxed()
        } else {
            exact(s, w).boxed()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn antisymmetric(a in case(), b in case()) {
        let ab = derive_relation(&a.expr, &b.expr);
        let ba = derive_relation(&b.expr, &a.expr);
        prop_assert_eq!(ab.map(RelationLabel::inverse), ba);
    }

    #[test]
    fn exact_pairs_agree_with_endpoint_comparison(a in case(), b in case()) {
        if a.realizations.len() == 1 && b.realizations.len() == 1
            && !matches!(a.expr, TimeExpression::Range { .. })
            && !matches!(b.expr, TimeExpression::Range { .. })
        {
            let oracle = endpoint_relation(a.realizations[0], b.realizations[0]);
            let expected = (oracle != RelationLabel::Vague).then_some(oracle);
            prop_assert_eq!(derive_relation(&a.expr, &b.expr), expected);
        }
    }

    #[test]
    fn emitted_relations_hold_for_every_realization(a in case(), b in case()) {
        if let Some(r) = derive_relation(&a.expr, &b.expr) {
            prop_assert_ne!(r, RelationLabel::Vague);
            for &x in &a.realizations {
                for &y in &b.realizations {
                    prop_assert_eq!(endpoint_relation(x, y), r, "{:?} vs {:?}", x, y);
                }
            }
            let involves_range = [&a.expr, &b.expr].iter().any(|e| matches!(e, TimeExpression::Range { .. }));
            if involves_range {
                prop_assert!(matches!(r, RelationLabel::Before | RelationLabel::After));
            }
        }
    }

    #[test]
    fn features_are_total_and_pure(a in case()) {
        let f = features(&a.expr).unwrap();
        prop_assert_eq!(f, features(&a.expr).unwrap());
        if f.is_point {
            prop_assert!(f.start_is_interval && f.end_is_interval);
        }
    }

    #[test]
    fn constraints_are_sorted_and_certain(cases in proptest::collection::vec(case(), 0..6)) {
        let events: Vec<(String, TimeExpression)> =
            cases.iter().enumerate().map(|(i, c)| (format!("e{i}"), c.expr.clone())).collect();
        let out = generate_constraints(&events, Orientation::Both).unwrap();
        prop_assert!(out.windows(2).all(|w| (&w[0].source, &w[0].target) < (&w[1].source, &w[1].target)));
        prop_assert!(out.iter().all(|c| c.relation != RelationLabel::Vague));
        let forward = generate_constraints(&events, Orientation::Forward).unwrap();
        prop_assert_eq!(out.len(), 2 * forward.len());
    }
}
