use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;
use stage_core::bridge::{features as feature_vector, Orientation};
use stage_core::chart::parse_all;
use stage_core::eval::{extraction_report, ordering_counts, OrderingCounts, OrderingMetrics};
use stage_core::grammar::{tokenize, Grammar};
use stage_core::ilp::{default_transitivity_table, parse_table, solve, Assignment, OrderingProblem};
use stage_core::normalize::resolve;
use stage_core::pipeline::{document_constraints, dummy_constraints, event_expressions, extract, find_cues};
use stage_core::records::{
    AssignmentRecord, ConstraintRecord, CueRecord, Document, ExtractionRecord, FeatureRecord, ProbabilityRecord, Span,
    Tlink,
};
use stage_core::{CalendarDateTime, Error, ParseTree};

use crate::io::{json_line, read_cues, read_input, read_records};
use crate::OrderArgs;

/// A finished command: the payload for the output sink, a human-readable
/// summary for standard error, and the number of records written.
pub struct Output {
    pub payload: String,
    pub summary: String,
    pub records: usize,
}

impl Output {
    fn lines(lines: Vec<String>) -> Output {
        let records = lines.len();
        Output { payload: lines.concat(), summary: String::new(), records }
    }
}

fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    let docs: Vec<(usize, Document)> = read_records(path)?;
    let mut ids = BTreeSet::new();
    for (line, doc) in &docs {
        doc.validate().map_err(|e| anyhow!("{}: line {line}: {e}", path.display()))?;
        if !ids.insert(doc.doc_id.clone()) {
            bail!("{}: line {line}: duplicate document id {:?}", path.display(), doc.doc_id);
        }
    }
    Ok(docs.into_iter().map(|(_, d)| d).collect())
}

/// Run `f` over `items` on the worker pool, keeping input order.
fn ordered<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    items.par_iter().map(f).collect()
}

pub fn parse(input: &Path, trees: bool, grammar: &Grammar) -> Result<Output> {
    let cues = read_cues(input)?;
    let rendered = ordered(&cues, |(line, cue)| {
        let chart = parse_all(&tokenize(&cue.text, grammar), grammar).with_context(|| format!("line {line}"))?;
        let maximal = chart.select_all_maximal();
        let spans: BTreeSet<(usize, usize)> = maximal.iter().map(|t| t.span).collect();
        if trees {
            let mut all: Vec<ParseTree> =
                chart.all_trees().into_iter().filter(|t| t.root.is_complete() && spans.contains(&t.span)).collect();
            if all.is_empty() {
                all.extend(chart.widest(stage_core::Nonterminal::Length));
            }
            let mut block: String = all.iter().map(|t| format!("{t}\n")).collect();
            block.push('\n');
            Ok(block)
        } else {
            let best = chart.select_tree().map(|t| t.to_string());
            let maximal: Vec<String> = maximal.iter().map(|t| t.to_string()).collect();
            json_line(&json!({ "id": cue.id, "text": cue.text, "tree": best, "maximal": maximal }))
        }
    })?;
    Ok(Output::lines(rendered))
}

fn record_for(
    cue: &CueRecord,
    dct: Option<CalendarDateTime>,
    trees: bool,
    grammar: &Grammar,
) -> Result<ExtractionRecord> {
    let found = match extract(&cue.text, cue.dct.or(dct), grammar) {
        Ok(found) => found,
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(match found {
        Some((interp, normalized)) => ExtractionRecord {
            doc_id: None,
            id: cue.id.clone(),
            text: cue.text.clone(),
            span: interp.span,
            kind: normalized.kind_name().to_string(),
            expression: interp.expr.to_string(),
            features: feature_vector(&normalized).ok().map(Into::into),
            normalized: normalized.to_string(),
            tree: trees.then(|| interp.trees[0].to_string()),
        },
        None => ExtractionRecord {
            doc_id: None,
            id: cue.id.clone(),
            text: cue.text.clone(),
            span: (0, 0),
            kind: "none".into(),
            expression: String::new(),
            normalized: String::new(),
            features: None,
            tree: None,
        },
    })
}

pub fn extract_cues(input: &Path, dct: Option<CalendarDateTime>, trees: bool, grammar: &Grammar) -> Result<Output> {
    let cues = read_cues(input)?;
    let lines = ordered(&cues, |(line, cue)| {
        let record = record_for(cue, dct, trees, grammar).with_context(|| format!("{}: line {line}", input.display()))?;
        json_line(&record)
    })?;
    Ok(Output::lines(lines))
}

pub fn extract_corpus(input: &Path, trees: bool, grammar: &Grammar) -> Result<Output> {
    let docs = read_corpus(input)?;
    let per_doc = ordered(&docs, |doc| {
        let mut out = Vec::new();
        for cue in find_cues(&doc.text, grammar)? {
            let normalized = match resolve(&cue.expr, doc.dct) {
                Ok(n) => n,
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            out.push(json_line(&ExtractionRecord {
                doc_id: Some(doc.doc_id.clone()),
                id: None,
                text: cue.text.clone(),
                span: cue.span,
                kind: normalized.kind_name().to_string(),
                expression: cue.expr.to_string(),
                features: feature_vector(&normalized).ok().map(Into::into),
                normalized: normalized.to_string(),
                tree: trees.then(|| cue.tree.to_string()),
            })?);
        }
        Ok(out)
    })?;
    Ok(Output::lines(per_doc.into_iter().flatten().collect()))
}

pub fn features(corpus: &Path, grammar: &Grammar) -> Result<Output> {
    let docs = read_corpus(corpus)?;
    let per_doc = ordered(&docs, |doc| {
        event_expressions(doc, grammar)?
            .into_iter()
            .map(|(event_id, expr)| {
                json_line(&FeatureRecord {
                    doc_id: Some(doc.doc_id.clone()),
                    event_id,
                    flags: feature_vector(&expr)?.into(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Output::lines(per_doc.into_iter().flatten().collect()))
}

pub fn constraints(corpus: &Path, dummies: bool, both: bool, grammar: &Grammar) -> Result<Output> {
    let docs = read_corpus(corpus)?;
    let orientation = if both { Orientation::Both } else { Orientation::Forward };
    let per_doc = ordered(&docs, |doc| {
        let found = if dummies { dummy_constraints(doc, grammar)? } else { document_constraints(doc, grammar, orientation)? };
        found
            .into_iter()
            .map(|c| {
                json_line(&ConstraintRecord {
                    doc_id: Some(doc.doc_id.clone()),
                    source: c.source,
                    target: c.target,
                    relation: c.relation,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Output::lines(per_doc.into_iter().flatten().collect()))
}

/// Everything known about one document before solving.
struct DocProblem {
    doc_id: String,
    problem: OrderingProblem,
}

fn build_problems(args: &OrderArgs) -> Result<Vec<DocProblem>> {
    let probs: Vec<(usize, ProbabilityRecord)> = read_records(&args.probs)?;
    let stage: Vec<(usize, ConstraintRecord)> = match &args.stage {
        Some(p) => read_records(p)?,
        None => Vec::new(),
    };
    let transitivity = match &args.tc_table {
        Some(p) => {
            let table = parse_table(&read_input(p)?).with_context(|| format!("transitivity table {}", p.display()))?;
            table.into_iter().filter(|t| [t.0, t.1, t.2].iter().all(|r| args.relations.contains(r))).collect()
        }
        None => default_transitivity_table(&args.relations),
    };

    let mut order: Vec<String> = Vec::new();
    let mut nodes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut note = |doc: &str, node: &str| {
        let list = nodes.entry(doc.to_string()).or_insert_with(|| {
            order.push(doc.to_string());
            Vec::new()
        });
        if !list.iter().any(|n| n == node) {
            list.push(node.to_string());
        }
    };
    for (_, r) in &probs {
        note(&r.doc_id, &r.source);
        note(&r.doc_id, &r.target);
    }
    let stage_path = args.stage.as_deref().map(|p| p.display().to_string()).unwrap_or_default();
    for (line, r) in &stage {
        let doc = r.doc_id.as_deref().ok_or_else(|| anyhow!("{stage_path}: line {line}: missing doc_id"))?;
        note(doc, &r.source);
        note(doc, &r.target);
    }

    let mut problems: BTreeMap<String, OrderingProblem> = BTreeMap::new();
    for doc in &order {
        let (dummies, events): (Vec<&str>, Vec<&str>) =
            nodes[doc].iter().map(String::as_str).partition(|n| n.starts_with(&args.dummy_prefix));
        let mut p = OrderingProblem::new(&events, &dummies, &args.relations).with_context(|| format!("document {doc}"))?;
        p.mode = args.mode;
        p.alpha = args.alpha;
        p.exact_limit = args.exact_limit;
        p.node_budget = args.node_budget;
        p.uniform_dummy_pairs = !args.require_dummy_probs;
        p.transitivity = transitivity.clone();
        problems.insert(doc.clone(), p);
    }
    let probs_path = args.probs.display().to_string();
    for (line, r) in &probs {
        let p = problems.get_mut(&r.doc_id).expect("document registered");
        p.set_probabilities(&r.source, &r.target, &r.probs).map_err(|e| anyhow!("{probs_path}: line {line}: {e}"))?;
    }
    for (line, r) in &stage {
        let p = problems.get_mut(r.doc_id.as_deref().expect("checked above")).expect("document registered");
        p.set_stage_relation(&r.source, &r.target, r.relation).map_err(|e| anyhow!("{stage_path}: line {line}: {e}"))?;
    }
    order
        .into_iter()
        .map(|doc_id| {
            let problem = problems.remove(&doc_id).expect("document registered");
            problem.validate().with_context(|| format!("document {doc_id}"))?;
            Ok(DocProblem { doc_id, problem })
        })
        .collect()
}

pub fn order(args: &OrderArgs) -> Result<Output> {
    let problems = build_problems(args)?;
    let lines = ordered(&problems, |d| {
        let solution = solve(&d.problem).with_context(|| format!("document {}", d.doc_id))?;
        json_line(&AssignmentRecord {
            doc_id: d.doc_id.clone(),
            mode: args.mode.to_string(),
            objective: solution.objective,
            proven_optimal: solution.proven_optimal,
            labels: solution
                .assignment
                .iter()
                .map(|(s, t, r)| Tlink { source: s.to_string(), target: t.to_string(), relation: r })
                .collect(),
        })
    })?;
    Ok(Output::lines(lines))
}

pub fn eval_extraction(corpus: &Path, system: &Path, whitelist: Option<&Path>, grammar: &Grammar) -> Result<Output> {
    let docs = read_corpus(corpus)?;
    let records: Vec<(usize, ExtractionRecord)> = read_records(system)?;
    let index: BTreeMap<&str, usize> = docs.iter().enumerate().map(|(i, d)| (d.doc_id.as_str(), i)).collect();
    let mut spans: Vec<Vec<Span>> = vec![Vec::new(); docs.len()];
    for (line, r) in &records {
        let doc_id = r.doc_id.as_deref().ok_or_else(|| anyhow!("{}: line {line}: missing doc_id", system.display()))?;
        let &i = index
            .get(doc_id)
            .ok_or_else(|| anyhow!("{}: line {line}: unknown document {doc_id:?}", system.display()))?;
        docs[i].slice(r.span).map_err(|e| anyhow!("{}: line {line}: {e}", system.display()))?;
        if r.kind != "none" {
            spans[i].push(r.span);
        }
    }
    let words: BTreeSet<String> = match whitelist {
        Some(p) => read_input(p)?.split_whitespace().map(str::to_lowercase).collect(),
        None => grammar.function_words(),
    };
    let report = extraction_report(&docs, &spans, &words)?;
    let summary = format!(
        "gold  exact  extended  missed  =/+     +\n{:<5} {:<6} {:<9} {:<7} {:<7.1} {:.1}\n",
        report.gold,
        report.exact,
        report.extended,
        report.missed,
        100.0 * report.equal_or_plus,
        100.0 * report.plus
    );
    Ok(Output { payload: json_line(&report)?, summary, records: 1 })
}

fn metrics_line(scope: &str, doc_id: Option<&str>, c: OrderingCounts) -> Result<String> {
    let m = OrderingMetrics::from(c);
    json_line(&json!({
        "scope": scope,
        "doc_id": doc_id,
        "correct": c.correct,
        "scored": c.scored,
        "gold": c.gold,
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
        "degenerate": m.degenerate,
    }))
}

pub fn eval_ordering(pred: &Path, gold: &Path) -> Result<Output> {
    let docs = read_corpus(gold)?;
    let records: Vec<(usize, AssignmentRecord)> = read_records(pred)?;
    let known: BTreeSet<&str> = docs.iter().map(|d| d.doc_id.as_str()).collect();
    let mut predicted: BTreeMap<&str, Assignment> = BTreeMap::new();
    for (line, r) in &records {
        if !known.contains(r.doc_id.as_str()) {
            bail!("{}: line {line}: unknown document {:?}", pred.display(), r.doc_id);
        }
        if predicted.contains_key(r.doc_id.as_str()) {
            bail!("{}: line {line}: second assignment for {:?}", pred.display(), r.doc_id);
        }
        predicted.insert(
            &r.doc_id,
            r.labels.iter().map(|t| (t.source.clone(), t.target.clone(), t.relation)).collect(),
        );
    }
    let empty = Assignment::new();
    let mut lines = Vec::new();
    let mut summary = String::from("document              P       R       F1\n");
    let mut total = OrderingCounts::default();
    for doc in &docs {
        let c = ordering_counts(predicted.get(doc.doc_id.as_str()).unwrap_or(&empty), &doc.gold_tlinks);
        total.add(c);
        lines.push(metrics_line("document", Some(&doc.doc_id), c)?);
        let m = OrderingMetrics::from(c);
        summary.push_str(&format!("{:<20} {:>7.3} {:>7.3} {:>7.3}\n", doc.doc_id, m.precision, m.recall, m.f1));
    }
    lines.push(metrics_line("micro", None, total)?);
    let m = OrderingMetrics::from(total);
    summary.push_str(&format!("{:<20} {:>7.3} {:>7.3} {:>7.3}\n", "micro", m.precision, m.recall, m.f1));
    let mut out = Output::lines(lines);
    out.summary = summary;
    Ok(out)
}
