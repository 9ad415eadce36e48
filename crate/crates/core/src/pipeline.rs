//! End-to-end helpers: cue text to expressions, documents to constraints.

use std::collections::BTreeMap;

use crate::bridge::{self, derive_relation, merge, Orientation, RelationLabel, StageConstraint};
use crate::chart::{parse_all, ParseTree};
use crate::compose::compose;
use crate::grammar::{tokenize, Grammar, Nonterminal, Token};
use crate::normalize::{resolve, CalendarDateTime};
use crate::records::{Document, Span};
use crate::temporal::TimeExpression;
use crate::{Error, Result};

/// The reading chosen for one cue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    /// Composed expression before normalization.
    pub expr: TimeExpression,
    /// Trees that contributed, best first.
    pub trees: Vec<ParseTree>,
    /// Character span covered by the contributing trees.
    pub span: Span,
}

fn char_span(tokens: &[Token], (i, j): (usize, usize)) -> Span {
    (tokens[i].span.0, tokens[j - 1].span.1)
}

/// Read a whole cue. Several maximal expressions in one cue are merged; a
/// cue with no complete reading falls back to its widest length.
pub fn interpret(text: &str, grammar: &Grammar) -> Result<Option<Interpretation>> {
    let tokens = tokenize(text, grammar);
    if tokens.is_empty() {
        return Ok(None);
    }
    let chart = parse_all(&tokens, grammar)?;
    let Some(best) = chart.select_tree() else {
        return match chart.widest(Nonterminal::Length) {
            Some(tree) => {
                let expr = compose(&tree)?;
                let span = char_span(&tokens, tree.span);
                Ok(Some(Interpretation { expr, trees: vec![tree], span }))
            }
            None => Ok(None),
        };
    };
    let mut trees = vec![best.clone()];
    trees.extend(chart.select_all_maximal().into_iter().filter(|t| t.span != best.span));
    let exprs = trees.iter().map(compose).collect::<Result<Vec<_>>>()?;
    let expr = merge(&exprs).expect("at least one expression");
    let first = trees.iter().map(|t| t.span.0).min().expect("nonempty");
    let last = trees.iter().map(|t| t.span.1).max().expect("nonempty");
    let span = char_span(&tokens, (first, last));
    Ok(Some(Interpretation { expr, trees, span }))
}

/// Interpret and normalize a cue against an optional document date.
pub fn extract(text: &str, dct: Option<CalendarDateTime>, grammar: &Grammar) -> Result<Option<(Interpretation, TimeExpression)>> {
    match interpret(text, grammar)? {
        Some(i) => {
            let normalized = resolve(&i.expr, dct)?;
            Ok(Some((i, normalized)))
        }
        None => Ok(None),
    }
}

/// A cue found in running text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoundCue {
    pub span: Span,
    pub text: String,
    pub tree: ParseTree,
    pub expr: TimeExpression,
}

/// Sentence-like pieces of `text` as character spans. A period between two
/// digits does not split.
fn segments(text: &str) -> Vec<Span> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for (i, &c) in chars.iter().enumerate() {
        let split = match c {
            ';' | '!' | '?' | '\n' => true,
            '.' => {
                let digit = |k: Option<&char>| k.is_some_and(|c| c.is_ascii_digit());
                !(i > 0 && digit(chars.get(i - 1)) && digit(chars.get(i + 1)))
            }
            _ => false,
        };
        if split {
            if start < i {
                out.push((start, i));
            }
            start = i + 1;
        }
    }
    if start < chars.len() {
        out.push((start, chars.len()));
    }
    out
}

/// Find non-overlapping cues, widest first. Complete readings are taken
/// before bare lengths.
pub fn find_cues(text: &str, grammar: &Grammar) -> Result<Vec<FoundCue>> {
    let chars: Vec<char> = text.chars().collect();
    let mut found = Vec::new();
    for (seg_start, seg_end) in segments(text) {
        let seg: String = chars[seg_start..seg_end].iter().collect();
        let tokens = tokenize(&seg, grammar);
        if tokens.is_empty() {
            continue;
        }
        let chart = parse_all(&tokens, grammar)?;
        let mut taken = vec![false; tokens.len()];
        let by_width = |mut spans: Vec<(usize, usize)>| {
            spans.sort_by_key(|s| (std::cmp::Reverse(s.1 - s.0), s.0));
            spans
        };
        let complete: Vec<Option<ParseTree>> =
            by_width(chart.complete_spans()).into_iter().map(|s| chart.best_complete_tree(s)).collect();
        let lengths: Vec<Option<ParseTree>> = by_width(
            chart
                .cells()
                .filter(|(_, c)| c.entries.contains_key(&Nonterminal::Length))
                .map(|(s, _)| s)
                .collect(),
        )
        .into_iter()
        .map(|s| chart.trees_rooted(s, Nonterminal::Length).ok().and_then(|t| t.into_iter().min_by_key(|t| t.derivation_key())))
        .collect();
        for tree in complete.into_iter().chain(lengths).flatten() {
            let (i, j) = tree.span;
            if taken[i..j].iter().any(|t| *t) {
                continue;
            }
            let Ok(expr) = compose(&tree) else { continue };
            taken[i..j].iter_mut().for_each(|t| *t = true);
            let (a, b) = char_span(&tokens, tree.span);
            let span = (seg_start + a, seg_start + b);
            found.push(FoundCue { span, text: chars[span.0..span.1].iter().collect(), tree, expr });
        }
    }
    found.sort_by_key(|c| c.span);
    Ok(found)
}

/// Normalized expression of every event with an attached cue that reads.
pub fn event_expressions(doc: &Document, grammar: &Grammar) -> Result<Vec<(String, TimeExpression)>> {
    doc.validate()?;
    let mut out = Vec::new();
    for event in &doc.events {
        let Some(cue) = event.cue else { continue };
        let text = doc.slice(cue)?;
        match extract(&text, doc.dct, grammar) {
            Ok(Some((_, normalized))) if normalized.is_complete() => out.push((event.id.clone(), normalized)),
            Ok(_) | Err(Error::Domain(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Certain relations between events that carry time cues.
pub fn document_constraints(doc: &Document, grammar: &Grammar, orientation: Orientation) -> Result<Vec<StageConstraint>> {
    bridge::generate_constraints(&event_expressions(doc, grammar)?, orientation)
}

/// Name of the dummy node standing for the cue attached to `event`.
pub fn dummy_id(event: &str) -> String {
    format!("t:{event}")
}

/// Relations between dummy time-expression nodes and every other node.
///
/// Each dummy is tied to its own event: an instant or interval cue marks the
/// event's own extent (`s`), a range cue contains it (`i`). Against other
/// dummies and other cued events the relation comes from the expressions.
pub fn dummy_constraints(doc: &Document, grammar: &Grammar) -> Result<Vec<StageConstraint>> {
    let exprs = event_expressions(doc, grammar)?;
    let by_event: BTreeMap<&str, &TimeExpression> = exprs.iter().map(|(e, x)| (e.as_str(), x)).collect();
    let mut out = Vec::new();
    for (event, expr) in &exprs {
        let dummy = dummy_id(event);
        let own = match expr {
            TimeExpression::Range { .. } => RelationLabel::Includes,
            _ => RelationLabel::Simultaneous,
        };
        out.push(StageConstraint { source: dummy.clone(), target: event.clone(), relation: own });
        for (other, other_expr) in &by_event {
            if *other == event {
                continue;
            }
            if let Some(r) = derive_relation(expr, other_expr) {
                out.push(StageConstraint { source: dummy.clone(), target: other.to_string(), relation: r });
                if event.as_str() < *other {
                    out.push(StageConstraint { source: dummy.clone(), target: dummy_id(other), relation: r });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}
