//! Line-delimited JSON record formats.
//!
//! Every file the command-line tool reads or writes holds one JSON object
//! per line. Character spans are `[start, end)` offsets counted in Unicode
//! scalar values.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bridge::{FeatureVector, RelationLabel};
use crate::normalize::CalendarDateTime;
use crate::rational::Rational;
use crate::{Error, Result};

pub type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMention {
    pub id: String,
    pub span: Span,
    /// The time cue attached to this event, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cue: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tlink {
    pub source: String,
    pub target: String,
    pub relation: RelationLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_datetime")]
    pub dct: Option<CalendarDateTime>,
    pub text: String,
    #[serde(default)]
    pub events: Vec<EventMention>,
    #[serde(default)]
    pub gold_timex: Vec<Span>,
    #[serde(default)]
    pub gold_tlinks: Vec<Tlink>,
}

impl Document {
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// Text covered by a character span.
    pub fn slice(&self, (start, end): Span) -> Result<String> {
        if start > end || end > self.char_len() {
            return Err(Error::InvalidArgument(format!(
                "span [{start}, {end}) outside document {} of length {}",
                self.doc_id,
                self.char_len()
            )));
        }
        Ok(self.text.chars().skip(start).take(end - start).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for e in &self.events {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate event id {:?} in {}", e.id, self.doc_id)));
            }
            self.slice(e.span)?;
            if let Some(cue) = e.cue {
                self.slice(cue)?;
            }
        }
        for span in &self.gold_timex {
            self.slice(*span)?;
        }
        for t in &self.gold_tlinks {
            for id in [&t.source, &t.target] {
                if !ids.contains(id.as_str()) {
                    return Err(Error::InvalidArgument(format!("tlink mentions unknown event {id:?} in {}", self.doc_id)));
                }
            }
        }
        Ok(())
    }
}

/// A standalone cue for `stage extract`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_datetime")]
    pub dct: Option<CalendarDateTime>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureFlags {
    pub is_point: bool,
    pub start_is_int: bool,
    pub end_is_int: bool,
    pub len_is_int: bool,
}

impl From<FeatureVector> for FeatureFlags {
    fn from(f: FeatureVector) -> FeatureFlags {
        FeatureFlags {
            is_point: f.is_point,
            start_is_int: f.start_is_interval,
            end_is_int: f.end_is_interval,
            len_is_int: f.length_is_interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub text: String,
    /// Character span of the cue within its source text.
    pub span: Span,
    #[serde(rename = "type")]
    pub kind: String,
    pub expression: String,
    pub normalized: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureFlags>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
    pub event_id: String,
    #[serde(flatten)]
    pub flags: FeatureFlags,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
    pub source: String,
    pub target: String,
    pub relation: RelationLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbabilityRecord {
    pub doc_id: String,
    pub source: String,
    pub target: String,
    pub probs: BTreeMap<RelationLabel, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub doc_id: String,
    pub mode: String,
    pub objective: Rational,
    pub proven_optimal: bool,
    pub labels: Vec<Tlink>,
}

/// Parse one JSON record per non-blank line; errors carry the line number.
pub fn parse_lines<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::InvalidArgument(format!("line {}: {e}", n + 1)))
        })
        .collect()
}

/// A small hand-annotated corpus of newswire-style sentences, bundled for
/// demonstrations and smoke tests.
pub const MINI_CORPUS: &str = include_str!("../data/mini_corpus.jsonl");

/// The bundled corpus, parsed and validated.
pub fn mini_corpus() -> Result<Vec<Document>> {
    let docs: Vec<Document> = parse_lines(MINI_CORPUS)?;
    docs.iter().try_for_each(Document::validate)?;
    Ok(docs)
}

mod opt_datetime {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::normalize::CalendarDateTime;

    pub fn serialize<S: Serializer>(v: &Option<CalendarDateTime>, s: S) -> Result<S::Ok, S::Error> {
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CalendarDateTime>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}
