//! Temporal vocabulary and the binary grammar the chart parser applies.
//!
//! Grammars are data. The shipped grammar lives in `grammar/stage.grammar`
//! and is embedded at compile time; a replacement file can be loaded with
//! [`Grammar::load`]. The format is line oriented:
//!
//! ```text
//! version 1
//! lex ago : AgoMarker              # lexicon entry (multi-word allowed)
//! Range -> MonthName @month_to_range   # lexical promotion from a token class
//! Length -> Num Unit @num_unit_to_length
//! ```
//!
//! Digit strings, ordinals, number words and date literals are recognized
//! by built-in patterns rather than listed entries.

mod lexicon;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

use crate::compose;
use crate::{Error, Result};

pub use lexicon::{number_value, ordinal_value, tokenize, Token};

pub const SHIPPED_GRAMMAR: &str = include_str!("../../grammar/stage.grammar");

macro_rules! nonterminals {
    ($($name:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
        pub enum Nonterminal {
            $($name),*
        }

        impl Nonterminal {
            pub const ALL: &'static [Nonterminal] = &[$(Nonterminal::$name),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Nonterminal::$name => stringify!($name)),*
                }
            }
        }

        impl FromStr for Nonterminal {
            type Err = Error;

            fn from_str(s: &str) -> Result<Nonterminal> {
                match s {
                    $(stringify!($name) => Ok(Nonterminal::$name),)*
                    _ => Err(Error::InvalidArgument(format!("unknown category {s:?}"))),
                }
            }
        }
    };
}

nonterminals! {
    Num, Ordinal, Unit, Length, Instant, Interval, Range,
    MonthName, WeekdayName, YearNum, DateLit, Deictic, Now, Det,
    FuncIn, FuncOn, FuncAt, FuncFor, FuncFrom, FuncTo, FuncUntil, FuncSince,
    FuncBy, FuncWithin, FuncBefore, FuncAfter, FuncDuring,
    ModNext, ModLast, ModThis, ModSometime, ModLaterIn, AgoMarker,
    MonthDay, FromPart, ToPart, OrdinalUnit,
}

impl Nonterminal {
    /// Instant, Interval and Range are the categories a cue can resolve to.
    pub fn is_complete(self) -> bool {
        matches!(self, Nonterminal::Instant | Nonterminal::Interval | Nonterminal::Range)
    }

    pub fn is_function_word(self) -> bool {
        let name = self.name();
        name.starts_with("Func") || name.starts_with("Mod") || self == Nonterminal::AgoMarker
    }

    /// Categories assigned by built-in token patterns.
    pub fn is_builtin_lexical(self) -> bool {
        matches!(
            self,
            Nonterminal::Num | Nonterminal::Ordinal | Nonterminal::YearNum | Nonterminal::DateLit
        )
    }
}

impl fmt::Display for Nonterminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A grammar rule. A one-symbol `rhs` is a lexical promotion: it applies to
/// a token carrying that lexical class. A two-symbol `rhs` is binary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GrammarRule {
    pub id: usize,
    pub lhs: Nonterminal,
    pub rhs: Vec<Nonterminal>,
    pub tag: String,
}

impl GrammarRule {
    pub fn is_lexical(&self) -> bool {
        self.rhs.len() == 1
    }
}

impl fmt::Display for GrammarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        for sym in &self.rhs {
            write!(f, " {sym}")?;
        }
        write!(f, " @{}", self.tag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    version: String,
    rules: Vec<GrammarRule>,
    rule_lines: Vec<usize>,
    lexicon: BTreeMap<String, BTreeSet<Nonterminal>>,
    by_lexical: BTreeMap<Nonterminal, Vec<usize>>,
    by_pair: BTreeMap<(Nonterminal, Nonterminal), Vec<usize>>,
}

impl Grammar {
    /// Parse grammar text without checking it. Syntax errors (unknown
    /// category names, missing tags) fail here; structural problems are
    /// reported by [`Grammar::validate`].
    pub fn parse(text: &str) -> Result<Grammar> {
        let mut version = String::from("unversioned");
        let mut rules = Vec::new();
        let mut rule_lines = Vec::new();
        let mut lexicon: BTreeMap<String, BTreeSet<Nonterminal>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: String| Error::InvalidArgument(format!("grammar line {lineno}: {msg}"));
            if let Some(rest) = line.strip_prefix("version ") {
                version = rest.trim().to_string();
            } else if let Some(rest) = line.strip_prefix("lex ") {
                let (surface, class) = rest
                    .rsplit_once(" : ")
                    .ok_or_else(|| syntax("expected `lex SURFACE : CLASS`".into()))?;
                let class: Nonterminal = class.trim().parse().map_err(|e: Error| syntax(e.to_string()))?;
                let key = lexicon::normalize_surface(surface);
                if key.is_empty() {
                    return Err(syntax("empty lexicon surface".into()));
                }
                lexicon.entry(key).or_default().insert(class);
            } else {
                let (lhs, rest) = line
                    .split_once("->")
                    .ok_or_else(|| syntax("expected `LHS -> RHS... @tag`".into()))?;
                let (rhs, tag) = rest
                    .rsplit_once('@')
                    .ok_or_else(|| syntax("rule is missing its @tag".into()))?;
                let lhs: Nonterminal = lhs.trim().parse().map_err(|e: Error| syntax(e.to_string()))?;
                let rhs = rhs
                    .split_whitespace()
                    .map(|s| s.parse::<Nonterminal>().map_err(|e| syntax(e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                let tag = tag.trim();
                if tag.is_empty() || tag.contains(char::is_whitespace) {
                    return Err(syntax(format!("bad tag {tag:?}")));
                }
                rules.push(GrammarRule { id: rules.len(), lhs, rhs, tag: tag.to_string() });
                rule_lines.push(lineno);
            }
        }
        let mut by_lexical: BTreeMap<Nonterminal, Vec<usize>> = BTreeMap::new();
        let mut by_pair: BTreeMap<(Nonterminal, Nonterminal), Vec<usize>> = BTreeMap::new();
        for rule in &rules {
            match rule.rhs.as_slice() {
                [a] => by_lexical.entry(*a).or_default().push(rule.id),
                [a, b] => by_pair.entry((*a, *b)).or_default().push(rule.id),
                _ => {}
            }
        }
        Ok(Grammar { version, rules, rule_lines, lexicon, by_lexical, by_pair })
    }

    /// Parse and validate; any diagnostic is an error.
    pub fn load(text: &str) -> Result<Grammar> {
        let grammar = Grammar::parse(text)?;
        let diagnostics = grammar.validate();
        if diagnostics.is_empty() {
            Ok(grammar)
        } else {
            let joined: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
            Err(Error::InternalGrammar(joined.join("; ")))
        }
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn rules(&self) -> &[GrammarRule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> &GrammarRule {
        &self.rules[id]
    }

    pub fn lexical_rules(&self, class: Nonterminal) -> &[usize] {
        self.by_lexical.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn binary_rules(&self, left: Nonterminal, right: Nonterminal) -> &[usize] {
        self.by_pair.get(&(left, right)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn lexicon(&self) -> &BTreeMap<String, BTreeSet<Nonterminal>> {
        &self.lexicon
    }

    /// Classes listed for a surface (case-insensitive), excluding built-in
    /// patterns.
    pub fn lookup(&self, surface: &str) -> Option<&BTreeSet<Nonterminal>> {
        self.lexicon.get(&lexicon::normalize_surface(surface))
    }

    /// Words of surfaces whose every class is a function word, plus
    /// determiners. Multi-word surfaces contribute each of their words.
    pub fn function_words(&self) -> BTreeSet<String> {
        self.lexicon
            .iter()
            .filter(|(_, classes)| {
                classes.iter().all(|c| c.is_function_word() || *c == Nonterminal::Det)
            })
            .flat_map(|(surface, _)| surface.split_whitespace().map(String::from))
            .chain(["the", "a", "an"].map(String::from))
            .collect()
    }

    /// Structural checks: every rule is lexical or binary, every tag is
    /// registered with a matching arity and output category, lexical
    /// promotions start from token classes, and every category is reachable
    /// from the vocabulary.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let lexical_classes: BTreeSet<Nonterminal> = self
            .lexicon
            .values()
            .flatten()
            .copied()
            .chain(Nonterminal::ALL.iter().copied().filter(|n| n.is_builtin_lexical()))
            .collect();
        for (rule, &line) in self.rules.iter().zip(&self.rule_lines) {
            let mut diag = |message: String| out.push(Diagnostic { line: Some(line), message });
            if !(1..=2).contains(&rule.rhs.len()) {
                diag(format!("rule `{rule}` has {} right-hand symbols; only 1 or 2 allowed", rule.rhs.len()));
                continue;
            }
            if rule.is_lexical() && !lexical_classes.contains(&rule.rhs[0]) {
                diag(format!("lexical rule `{rule}` promotes {} which no token carries", rule.rhs[0]));
            }
            match compose::registered(&rule.tag) {
                None => diag(format!("rule `{rule}` uses unregistered tag @{}", rule.tag)),
                Some(sig) => {
                    if sig.arity != rule.rhs.len() {
                        diag(format!("tag @{} takes {} children but rule has {}", rule.tag, sig.arity, rule.rhs.len()));
                    }
                    if sig.output != rule.lhs {
                        diag(format!("tag @{} produces {} but rule builds {}", rule.tag, sig.output, rule.lhs));
                    }
                }
            }
        }
        let mut reachable = lexical_classes;
        loop {
            let before = reachable.len();
            for rule in &self.rules {
                let ok = match rule.rhs.as_slice() {
                    [a] => reachable.contains(a),
                    [a, b] => reachable.contains(a) && reachable.contains(b),
                    _ => false,
                };
                if ok {
                    reachable.insert(rule.lhs);
                }
            }
            if reachable.len() == before {
                break;
            }
        }
        for nt in Nonterminal::ALL {
            if !reachable.contains(nt) {
                out.push(Diagnostic { line: None, message: format!("category {nt} is unreachable") });
            }
        }
        out
    }
}

/// The embedded grammar, parsed and validated once.
pub fn shipped() -> &'static Grammar {
    static GRAMMAR: OnceLock<Grammar> = OnceLock::new();
    GRAMMAR.get_or_init(|| Grammar::load(SHIPPED_GRAMMAR).expect("shipped grammar is valid"))
}
