//! Exhaustive binary CKY parsing over the temporal grammar.
//!
//! Cells hold a packed forest: each category present over a span keeps every
//! backpointer that derives it, so trees are only expanded on demand.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::grammar::{Grammar, GrammarRule, Nonterminal, Token};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Backpointer {
    /// The token itself carries the category.
    Lexeme,
    /// A lexical promotion rule applied to the token.
    Unary { rule: usize },
    /// A binary rule whose children meet at token index `split`.
    Binary { rule: usize, split: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cell {
    pub entries: BTreeMap<Nonterminal, BTreeSet<Backpointer>>,
}

impl Cell {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn add(&mut self, nt: Nonterminal, bp: Backpointer) {
        self.entries.entry(nt).or_default().insert(bp);
    }
}

#[derive(Debug, Clone)]
pub struct Chart<'g> {
    grammar: &'g Grammar,
    tokens: Vec<Token>,
    /// `cells[i][w - 1]` covers tokens `i..i + w`.
    cells: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    pub root: Nonterminal,
    /// Token indices `[start, end)`.
    pub span: (usize, usize),
    pub children: Vec<ParseTree>,
    /// `None` on lexical leaves.
    pub rule: Option<GrammarRule>,
    /// The token text, on lexical leaves.
    pub surface: Option<String>,
}

impl ParseTree {
    pub fn width(&self) -> usize {
        self.span.1 - self.span.0
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ParseTree::depth).max().unwrap_or(0)
    }

    /// Number of rule applications (internal nodes).
    pub fn rule_count(&self) -> usize {
        usize::from(self.rule.is_some()) + self.children.iter().map(ParseTree::rule_count).sum::<usize>()
    }

    /// Rule ids in preorder; the tie-break key between derivations.
    pub fn derivation_key(&self) -> Vec<usize> {
        let mut key = Vec::new();
        self.collect_key(&mut key);
        key
    }

    fn collect_key(&self, key: &mut Vec<usize>) {
        if let Some(rule) = &self.rule {
            key.push(rule.id);
        }
        for child in &self.children {
            child.collect_key(key);
        }
    }
}

/// Bracketed form, e.g. `(Instant (Length (Num three) (Unit days)) (AgoMarker ago))`.
impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.root)?;
        if let Some(surface) = &self.surface {
            write!(f, " {surface}")?;
        }
        for child in &self.children {
            write!(f, " {child}")?;
        }
        write!(f, ")")
    }
}

fn type_priority(nt: Nonterminal) -> u8 {
    match nt {
        Nonterminal::Instant => 0,
        Nonterminal::Interval => 1,
        Nonterminal::Range => 2,
        _ => 3,
    }
}

/// Build the full chart over `tokens`.
pub fn parse_all<'g>(tokens: &[Token], grammar: &'g Grammar) -> Result<Chart<'g>> {
    let n = tokens.len();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot parse an empty token sequence".into()));
    }
    let mut cells: Vec<Vec<Cell>> = (0..n).map(|i| vec![Cell::default(); n - i]).collect();
    for (i, token) in tokens.iter().enumerate() {
        let cell = &mut cells[i][0];
        for &class in &token.lexical_classes {
            cell.add(class, Backpointer::Lexeme);
            for &rule in grammar.lexical_rules(class) {
                cell.add(grammar.rule(rule).lhs, Backpointer::Unary { rule });
            }
        }
    }
    for width in 2..=n {
        for i in 0..=n - width {
            let j = i + width;
            let mut cell = Cell::default();
            for k in i + 1..j {
                let left = &cells[i][k - i - 1];
                let right = &cells[k][j - k - 1];
                for &a in left.entries.keys() {
                    for &b in right.entries.keys() {
                        for &rule in grammar.binary_rules(a, b) {
                            cell.add(grammar.rule(rule).lhs, Backpointer::Binary { rule, split: k });
                        }
                    }
                }
            }
            cells[i][width - 1] = cell;
        }
    }
    Ok(Chart { grammar, tokens: tokens.to_vec(), cells })
}

impl<'g> Chart<'g> {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.grammar
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    fn check_span(&self, (i, j): (usize, usize)) -> Result<()> {
        if i < j && j <= self.len() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("span ({i}, {j}) outside chart of {} tokens", self.len())))
        }
    }

    pub fn cell(&self, span: (usize, usize)) -> Result<&Cell> {
        self.check_span(span)?;
        Ok(&self.cells[span.0][span.1 - span.0 - 1])
    }

    /// All `(span, cell)` pairs, ordered by start then end.
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), &Cell)> {
        self.cells
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(w, c)| ((i, i + w + 1), c)))
    }

    fn trees_for(&self, span: (usize, usize), nt: Nonterminal) -> Vec<ParseTree> {
        let Some(bps) = self.cells[span.0][span.1 - span.0 - 1].entries.get(&nt) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for bp in bps {
            match *bp {
                Backpointer::Lexeme => out.push(self.leaf(span.0, nt)),
                Backpointer::Unary { rule } => {
                    let r = self.grammar.rule(rule);
                    out.push(ParseTree {
                        root: nt,
                        span,
                        children: vec![self.leaf(span.0, r.rhs[0])],
                        rule: Some(r.clone()),
                        surface: None,
                    });
                }
                Backpointer::Binary { rule, split } => {
                    let r = self.grammar.rule(rule);
                    let lefts = self.trees_for((span.0, split), r.rhs[0]);
                    let rights = self.trees_for((split, span.1), r.rhs[1]);
                    for left in &lefts {
                        for right in &rights {
                            out.push(ParseTree {
                                root: nt,
                                span,
                                children: vec![left.clone(), right.clone()],
                                rule: Some(r.clone()),
                                surface: None,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    fn leaf(&self, i: usize, class: Nonterminal) -> ParseTree {
        ParseTree {
            root: class,
            span: (i, i + 1),
            children: Vec::new(),
            rule: None,
            surface: Some(self.tokens[i].surface.clone()),
        }
    }

    /// Every distinct derivation over `span`, ordered by category and then
    /// by backpointer.
    pub fn enumerate_trees(&self, span: (usize, usize)) -> Result<Vec<ParseTree>> {
        let cell = self.cell(span)?;
        Ok(cell.entries.keys().flat_map(|&nt| self.trees_for(span, nt)).collect())
    }

    /// Trees rooted in `nt` over `span`.
    pub fn trees_rooted(&self, span: (usize, usize), nt: Nonterminal) -> Result<Vec<ParseTree>> {
        self.check_span(span)?;
        Ok(self.trees_for(span, nt))
    }

    /// Every tree in the chart, ordered by span then category.
    pub fn all_trees(&self) -> Vec<ParseTree> {
        let spans: Vec<(usize, usize)> = self.cells().map(|(s, _)| s).collect();
        spans.into_iter().flat_map(|s| self.trees_for_cell(s)).collect()
    }

    fn trees_for_cell(&self, span: (usize, usize)) -> Vec<ParseTree> {
        self.enumerate_trees(span).unwrap_or_default()
    }

    fn best_derivation(&self, span: (usize, usize), nt: Nonterminal) -> Option<ParseTree> {
        self.trees_for(span, nt).into_iter().min_by(|a, b| a.derivation_key().cmp(&b.derivation_key()))
    }

    fn complete_entries(&self) -> Vec<((usize, usize), Nonterminal)> {
        let mut out = Vec::new();
        for (span, cell) in self.cells() {
            for &nt in cell.entries.keys() {
                if nt.is_complete() {
                    out.push((span, nt));
                }
            }
        }
        out
    }

    /// The widest complete-type tree. Ties go to the leftmost span, then to
    /// Instant over Interval over Range, then to the lowest preorder
    /// sequence of rule ids.
    pub fn select_tree(&self) -> Option<ParseTree> {
        let (span, nt) = self.complete_entries().into_iter().min_by(|(sa, na), (sb, nb)| {
            (sb.1 - sb.0)
                .cmp(&(sa.1 - sa.0))
                .then(sa.0.cmp(&sb.0))
                .then(type_priority(*na).cmp(&type_priority(*nb)))
        })?;
        self.best_derivation(span, nt)
    }

    /// One tree for every complete-type span not strictly contained in
    /// another complete-type span, ordered by start.
    pub fn select_all_maximal(&self) -> Vec<ParseTree> {
        let entries = self.complete_entries();
        let spans: BTreeSet<(usize, usize)> = entries.iter().map(|(s, _)| *s).collect();
        let contains = |outer: &(usize, usize), inner: &(usize, usize)| {
            outer != inner && outer.0 <= inner.0 && inner.1 <= outer.1
        };
        spans
            .iter()
            .filter(|s| !spans.iter().any(|o| contains(o, s)))
            .filter_map(|&span| {
                let nt = entries
                    .iter()
                    .filter(|(s, _)| *s == span)
                    .map(|(_, nt)| *nt)
                    .min_by(|a, b| type_priority(*a).cmp(&type_priority(*b)))?;
                self.best_derivation(span, nt)
            })
            .collect()
    }

    /// Spans carrying at least one complete-type category.
    pub fn complete_spans(&self) -> Vec<(usize, usize)> {
        let spans: BTreeSet<(usize, usize)> = self.complete_entries().into_iter().map(|(s, _)| s).collect();
        spans.into_iter().collect()
    }

    /// The preferred complete-type tree over exactly `span`.
    pub fn best_complete_tree(&self, span: (usize, usize)) -> Option<ParseTree> {
        let cell = self.cell(span).ok()?;
        let nt = cell.entries.keys().copied().filter(|nt| nt.is_complete()).min_by_key(|nt| type_priority(*nt))?;
        self.best_derivation(span, nt)
    }

    /// The widest tree rooted in `nt` (leftmost on ties).
    pub fn widest(&self, nt: Nonterminal) -> Option<ParseTree> {
        let span = self
            .cells()
            .filter(|(_, c)| c.entries.contains_key(&nt))
            .map(|(s, _)| s)
            .min_by(|a, b| match (b.1 - b.0).cmp(&(a.1 - a.0)) {
                Ordering::Equal => a.0.cmp(&b.0),
                o => o,
            })?;
        self.best_derivation(span, nt)
    }
}
