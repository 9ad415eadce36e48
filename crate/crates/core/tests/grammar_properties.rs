use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stage_core::chart::parse_all;
use stage_core::compose::{compose, compose_traced, registered, registry};
use stage_core::grammar::{shipped, tokenize, Grammar};
use stage_core::normalize::resolve;
use stage_core::{CalendarDateTime, Error, Nonterminal, ParseTree, TimeExpression};

/// A derivation drawn from the grammar: its token surfaces and its tree
/// written as nested rule ids and surfaces.
#[derive(Debug, Clone)]
struct Sample {
    words: Vec<String>,
    shape: String,
}

fn surfaces(grammar: &Grammar) -> BTreeMap<Nonterminal, Vec<String>> {
    let mut out: BTreeMap<Nonterminal, Vec<String>> = BTreeMap::new();
    for (surface, classes) in grammar.lexicon() {
        for c in classes {
            out.entry(*c).or_default().push(surface.clone());
        }
    }
    out.insert(Nonterminal::Num, ["three", "4", "twenty-one", "1.5"].map(String::from).to_vec());
    out.insert(Nonterminal::Ordinal, ["1st", "fourth", "22nd"].map(String::from).to_vec());
    out.insert(Nonterminal::YearNum, ["2001", "1999"].map(String::from).to_vec());
    out.insert(Nonterminal::DateLit, ["01/02/03", "2001-01-01"].map(String::from).to_vec());
    out
}

fn sample(grammar: &Grammar, words: &BTreeMap<Nonterminal, Vec<String>>, nt: Nonterminal, depth: usize, rng: &mut ChaCha8Rng) -> Option<Sample> {
    let rules: Vec<_> = grammar.rules().iter().filter(|r| r.lhs == nt).collect();
    let lexical = words.get(&nt);
    let use_leaf = lexical.is_some() && (rules.is_empty() || rng.gen_bool(0.3));
    if use_leaf {
        let w = lexical.unwrap().choose(rng)?.clone();
        return Some(Sample { shape: format!("({nt} {w})"), words: vec![w] });
    }
    let rule = *rules.choose(rng)?;
    if rule.is_lexical() {
        let w = words.get(&rule.rhs[0])?.choose(rng)?.clone();
        return Some(Sample { shape: format!("(#{} ({} {w}))", rule.id, rule.rhs[0]), words: vec![w] });
    }
    if depth == 0 {
        return None;
    }
    let left = sample(grammar, words, rule.rhs[0], depth - 1, rng)?;
    let right = sample(grammar, words, rule.rhs[1], depth - 1, rng)?;
    Some(Sample {
        shape: format!("(#{} {} {})", rule.id, left.shape, right.shape),
        words: left.words.into_iter().chain(right.words).collect(),
    })
}

fn shape(tree: &ParseTree) -> String {
    match (&tree.rule, &tree.surface) {
        (None, Some(s)) => format!("({} {})", tree.root, s.to_lowercase()),
        (Some(rule), _) => {
            let kids: Vec<String> = tree.children.iter().map(shape).collect();
            format!("(#{} {})", rule.id, kids.join(" "))
        }
        _ => unreachable!("leaf without surface"),
    }
}

fn draw(seed: u64) -> Option<(Nonterminal, Sample)> {
    let g = shipped();
    let words = surfaces(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root = *[Nonterminal::Instant, Nonterminal::Interval, Nonterminal::Range, Nonterminal::Length].choose(&mut rng)?;
    sample(g, &words, root, 4, &mut rng).filter(|s| s.words.len() <= 8).map(|s| (root, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn every_sampled_derivation_is_in_the_chart(seed in any::<u64>()) {
        let Some((root, s)) = draw(seed) else { return Ok(()) };
        let g = shipped();
        let text = s.words.join(" ");
        let tokens = tokenize(&text, g);
        prop_assert_eq!(tokens.len(), s.words.len(), "{}", text);
        let chart = parse_all(&tokens, g).unwrap();
        let found: Vec<String> = chart.trees_rooted((0, tokens.len()), root).unwrap().iter().map(shape).collect();
        prop_assert!(found.contains(&s.shape), "{} missing from {:?}", s.shape, found);
    }

    #[test]
    fn composition_is_pure_and_type_sound(seed in any::<u64>()) {
        let Some((_, s)) = draw(seed) else { return Ok(()) };
        let g = shipped();
        let tokens = tokenize(&s.words.join(" "), g);
        let chart = parse_all(&tokens, g).unwrap();
        for tree in chart.all_trees() {
            let first = compose(&tree);
            prop_assert_eq!(&first, &compose(&tree));
            let expected = match tree.root {
                Nonterminal::Instant => "Instant",
                Nonterminal::Interval => "Interval",
                Nonterminal::Range => "Range",
                Nonterminal::Length => "Length",
                _ => {
                    prop_assert!(first.is_err());
                    continue;
                }
            };
            match first {
                Ok(e) => prop_assert_eq!(e.kind_name(), expected),
                Err(Error::Domain(_)) => {}
                Err(other) => prop_assert!(false, "{} failed with {}", tree, other),
            }
        }
    }

    #[test]
    fn one_rule_application_per_internal_node(seed in any::<u64>()) {
        let Some((_, s)) = draw(seed) else { return Ok(()) };
        let g = shipped();
        let tokens = tokenize(&s.words.join(" "), g);
        let chart = parse_all(&tokens, g).unwrap();
        for tree in chart.all_trees() {
            if let Ok(c) = compose_traced(&tree) {
                prop_assert_eq!(c.applied.len(), tree.rule_count());
            }
        }
    }

    #[test]
    fn extending_the_input_keeps_prefix_cells(seed in any::<u64>(), extra in 0usize..3) {
        let Some((_, s)) = draw(seed) else { return Ok(()) };
        let g = shipped();
        let mut words = s.words.clone();
        words.extend(["ago", "next", "week"].iter().take(extra).map(|w| w.to_string()));
        let full = parse_all(&tokenize(&words.join(" "), g), g).unwrap();
        let prefix = parse_all(&tokenize(&s.words.join(" "), g), g).unwrap();
        for (span, cell) in prefix.cells() {
            prop_assert_eq!(cell, full.cell(span).unwrap());
        }
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>(), days in 0i64..2000) {
        let Some((_, s)) = draw(seed) else { return Ok(()) };
        let g = shipped();
        let chart = parse_all(&tokenize(&s.words.join(" "), g), g).unwrap();
        let Some(tree) = chart.select_tree() else { return Ok(()) };
        let Ok(expr) = compose(&tree) else { return Ok(()) };
        let base: CalendarDateTime = "2000-03-01T00:00".parse().unwrap();
        let dct = CalendarDateTime::new(base.naive() + chrono_days(days)).unwrap();
        let once = resolve(&expr, Some(dct)).unwrap();
        prop_assert_eq!(&resolve(&once, Some(dct)).unwrap(), &once);
        prop_assert_eq!(resolve(&expr, None).unwrap().is_complete(), expr.is_complete());
    }
}

fn chrono_days(days: i64) -> chrono::Duration {
    chrono::Duration::days(days)
}

#[test]
fn registry_matches_grammar_signatures() {
    let g = shipped();
    for rule in g.rules() {
        let sig = registered(&rule.tag).expect("registered tag");
        assert_eq!(sig.arity, rule.rhs.len(), "{rule}");
        assert_eq!(sig.output, rule.lhs, "{rule}");
    }
    assert!(registry().iter().all(|s| g.rules().iter().any(|r| r.tag == s.name)));
}

#[test]
fn shipped_paradigm() {
    let g = shipped();
    let kinds: Vec<&str> = ["four hours", "in four hours", "for four hours", "within four hours"]
        .iter()
        .map(|cue| {
            let chart = parse_all(&tokenize(cue, g), g).unwrap();
            let tree = chart.select_tree().or_else(|| chart.widest(Nonterminal::Length)).unwrap();
            compose(&tree).unwrap().kind_name()
        })
        .collect();
    assert_eq!(kinds, ["Length", "Instant", "Interval", "Range"]);
    let four = TimeExpression::BareLength { length: stage_core::temporal::length_from(4.into(), stage_core::UnitKind::Hour).unwrap() };
    assert_eq!(four.to_string(), "Length(4,hour)");
}

#[test]
fn sampler_reaches_most_categories_and_depths() {
    let drawn: Vec<(Nonterminal, Sample)> = (0..400).filter_map(draw).collect();
    assert!(drawn.len() >= 200, "only {} of 400 draws succeeded", drawn.len());
    assert!(drawn.iter().any(|(_, s)| s.words.len() >= 4));
    for root in [Nonterminal::Instant, Nonterminal::Interval, Nonterminal::Range, Nonterminal::Length] {
        assert!(drawn.iter().any(|(r, _)| *r == root), "{root} never drawn");
    }
}
