//! Temporal cue parsing, timeline alignment and document-level event ordering.
//!
//! The pipeline runs in stages:
//!
//! 1. [`grammar`] tokenizes text against the temporal lexicon and
//!    [`chart`] builds the full CKY chart over the binary grammar;
//! 2. [`compose`] walks the selected tree and builds a [`TimeExpression`];
//! 3. [`normalize`] places the expression on a single hours-based timeline
//!    anchored at 2000-01-01T00:00;
//! 4. [`bridge`] turns expressions into boolean features and certain
//!    pairwise relations, which [`ilp`] consumes as hard or soft constraints
//!    while decoding a globally consistent ordering.
//!
//! [`eval`] scores extraction and ordering output, and [`records`] holds the
//! line-delimited record formats shared with the command-line tool.

pub mod bridge;
pub mod chart;
pub mod compose;
pub mod eval;
pub mod grammar;
pub mod ilp;
pub mod normalize;
pub mod pipeline;
pub mod rational;
pub mod records;
pub mod temporal;

pub use bridge::{FeatureVector, RelationLabel, StageConstraint};
pub use chart::{Chart, ParseTree};
pub use grammar::{Grammar, Nonterminal, Token};
pub use normalize::CalendarDateTime;
pub use rational::Rational;
pub use temporal::{AnchorKind, Length, TimeExpression, TimePoint, UnitKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("incomparable time points: {0}")]
    Incomparable(String),
    #[error("rational arithmetic overflow")]
    Overflow,
    #[error("infeasible hard constraints: {0}")]
    Infeasible(String),
    #[error("internal grammar error: {0}")]
    InternalGrammar(String),
    #[error("cannot interpret expression: {0}")]
    Domain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
