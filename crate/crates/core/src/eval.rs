//! Extraction and ordering scores.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ilp::Assignment;
use crate::records::{Document, Span, Tlink};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatchVerdict {
    ExactMatch,
    ExtendedMatch,
    Miss,
}

fn words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Compare a system span with a gold span, crediting a longer system span
/// when everything it adds is in `whitelist`.
pub fn relaxed_match(gold_span: &str, sys_span: &str, whitelist: &BTreeSet<String>) -> MatchVerdict {
    let gold = words(gold_span);
    let sys = words(sys_span);
    if gold == sys {
        return MatchVerdict::ExactMatch;
    }
    if gold.is_empty() || sys.len() <= gold.len() {
        return MatchVerdict::Miss;
    }
    for start in 0..=sys.len() - gold.len() {
        if sys[start..start + gold.len()] == gold[..] {
            let extra = sys[..start].iter().chain(&sys[start + gold.len()..]);
            if extra.clone().all(|w| whitelist.contains(w)) {
                return MatchVerdict::ExtendedMatch;
            }
        }
    }
    MatchVerdict::Miss
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub gold: usize,
    pub exact: usize,
    pub extended: usize,
    pub missed: usize,
    /// Share of gold cues matched exactly or by an extension.
    pub equal_or_plus: f64,
    /// Share of gold cues matched only by an extension.
    pub plus: f64,
}

impl ExtractionReport {
    fn finish(mut self) -> ExtractionReport {
        let n = self.gold.max(1) as f64;
        self.equal_or_plus = (self.exact + self.extended) as f64 / n;
        self.plus = self.extended as f64 / n;
        self
    }
}

/// Score system spans for each document against its gold cue spans.
///
/// A gold cue is compared with every system span overlapping it and keeps
/// the best verdict.
pub fn extraction_report(
    corpus: &[Document],
    system_spans: &[Vec<Span>],
    whitelist: &BTreeSet<String>,
) -> Result<ExtractionReport> {
    let mut report = ExtractionReport::default();
    for (doc, spans) in corpus.iter().zip(system_spans.iter().chain(std::iter::repeat(&Vec::new()))) {
        for &gold in &doc.gold_timex {
            let gold_text = doc.slice(gold)?;
            let mut verdict = MatchVerdict::Miss;
            for &sys in spans {
                if sys.0 >= gold.1 || gold.0 >= sys.1 {
                    continue;
                }
                match relaxed_match(&gold_text, &doc.slice(sys)?, whitelist) {
                    MatchVerdict::ExactMatch => {
                        verdict = MatchVerdict::ExactMatch;
                        break;
                    }
                    MatchVerdict::ExtendedMatch => verdict = MatchVerdict::ExtendedMatch,
                    MatchVerdict::Miss => {}
                }
            }
            report.gold += 1;
            match verdict {
                MatchVerdict::ExactMatch => report.exact += 1,
                MatchVerdict::ExtendedMatch => report.extended += 1,
                MatchVerdict::Miss => report.missed += 1,
            }
        }
    }
    Ok(report.finish())
}

/// Counts that micro-average across documents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingCounts {
    pub correct: usize,
    /// Gold pairs that received a prediction.
    pub scored: usize,
    pub gold: usize,
}

impl OrderingCounts {
    pub fn add(&mut self, other: OrderingCounts) {
        self.correct += other.correct;
        self.scored += other.scored;
        self.gold += other.gold;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a denominator was zero and the value was reported as 0.
    pub degenerate: bool,
}

pub fn ordering_counts(pred: &Assignment, gold: &[Tlink]) -> OrderingCounts {
    let mut c = OrderingCounts { gold: gold.len(), ..Default::default() };
    for t in gold {
        if let Some(r) = pred.get(&t.source, &t.target) {
            c.scored += 1;
            if r == t.relation {
                c.correct += 1;
            }
        }
    }
    c
}

impl From<OrderingCounts> for OrderingMetrics {
    fn from(c: OrderingCounts) -> OrderingMetrics {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(c.correct, c.scored);
        let recall = ratio(c.correct, c.gold);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        OrderingMetrics { precision, recall, f1, degenerate: c.scored == 0 || c.gold == 0 }
    }
}

pub fn ordering_metrics(pred: &Assignment, gold: &[Tlink]) -> OrderingMetrics {
    ordering_counts(pred, gold).into()
}
