use std::collections::BTreeSet;

use serde::Serialize;

use super::{Grammar, Nonterminal};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub surface: String,
    /// Character offsets `[start, end)` into the input.
    pub span: (usize, usize),
    /// Byte offsets matching `span`.
    #[serde(skip)]
    pub byte_span: (usize, usize),
    pub lexical_classes: BTreeSet<Nonterminal>,
}

impl Token {
    pub fn is_lexical(&self) -> bool {
        !self.lexical_classes.is_empty()
    }
}

pub(crate) fn normalize_surface(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

const UNITS: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
];
const TENS: [&str; 10] = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
const ORD_UNITS: [&str; 20] = [
    "zeroth", "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    "eleventh", "twelfth", "thirteenth", "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth",
    "nineteenth",
];
const ORD_TENS: [&str; 10] = [
    "", "", "twentieth", "thirtieth", "fortieth", "fiftieth", "sixtieth", "seventieth", "eightieth", "ninetieth",
];

fn word_number(word: &str, units: &[&str; 20], tens: &[&str; 10]) -> Option<u32> {
    if let Some(n) = units.iter().position(|u| *u == word) {
        return Some(n as u32);
    }
    if let Some(n) = tens.iter().position(|t| !t.is_empty() && *t == word) {
        return Some(n as u32 * 10);
    }
    let (tens_word, unit_word) = word.split_once('-')?;
    let t = TENS.iter().position(|t| !t.is_empty() && *t == tens_word)?;
    let u = units.iter().position(|u| *u == unit_word).filter(|&u| (1..10).contains(&u))?;
    Some((t * 10 + u) as u32)
}

/// Value of a cardinal numeral: digits (with an optional decimal part),
/// number words zero to ninety-nine, or the article "a"/"an".
pub fn number_value(surface: &str) -> Option<Rational> {
    let s = surface.to_lowercase();
    if s == "a" || s == "an" {
        return Some(Rational::ONE);
    }
    let first = s.chars().next()?;
    if first.is_ascii_digit() {
        if s.chars().all(|c| c.is_ascii_digit() || c == '.') && s.matches('.').count() <= 1 && !s.ends_with('.') {
            return s.parse().ok();
        }
        return None;
    }
    word_number(&s, &UNITS, &TENS).map(|n| Rational::from_integer(n as i128))
}

/// Value of an ordinal: `1st`, `22nd`, `first`, `twenty-first`.
pub fn ordinal_value(surface: &str) -> Option<u32> {
    let s = surface.to_lowercase();
    for suffix in ["st", "nd", "rd", "th"] {
        if let Some(digits) = s.strip_suffix(suffix) {
            if !digits.is_empty() && digits.len() <= 3 && digits.chars().all(|c| c.is_ascii_digit()) {
                return digits.parse().ok().filter(|&n| n > 0);
            }
        }
    }
    if let Some(n) = ORD_UNITS.iter().position(|u| *u == s) {
        return Some(n as u32).filter(|&n| n > 0);
    }
    if let Some(n) = ORD_TENS.iter().position(|t| !t.is_empty() && *t == s) {
        return Some(n as u32 * 10);
    }
    let (tens_word, unit_word) = s.split_once('-')?;
    let t = TENS.iter().position(|t| !t.is_empty() && *t == tens_word)?;
    let u = ORD_UNITS.iter().position(|u| *u == unit_word).filter(|&u| (1..10).contains(&u))?;
    Some((t * 10 + u) as u32)
}

/// `MM/DD/YY`, `MM/DD/YYYY` or `YYYY-MM-DD` shapes; calendar validity is
/// checked during composition.
pub(crate) fn is_date_literal(s: &str) -> bool {
    let numeric_parts = |sep: char| -> Option<Vec<usize>> {
        let parts: Vec<&str> = s.split(sep).collect();
        if parts.len() == 3 && parts.iter().all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit())) {
            Some(parts.iter().map(|p| p.len()).collect())
        } else {
            None
        }
    };
    if let Some(lens) = numeric_parts('/') {
        return lens[0] <= 2 && lens[1] <= 2 && (lens[2] == 2 || lens[2] == 4);
    }
    matches!(numeric_parts('-').as_deref(), Some([4, 2, 2]))
}

fn builtin_classes(surface: &str) -> BTreeSet<Nonterminal> {
    let mut classes = BTreeSet::new();
    if is_date_literal(surface) {
        classes.insert(Nonterminal::DateLit);
        return classes;
    }
    let lower = surface.to_lowercase();
    if lower != "a" && lower != "an" && number_value(&lower).is_some() {
        classes.insert(Nonterminal::Num);
        if lower.len() == 4 && lower.chars().all(|c| c.is_ascii_digit()) {
            let year: u32 = lower.parse().expect("digits");
            if (1000..3000).contains(&year) {
                classes.insert(Nonterminal::YearNum);
            }
        }
    }
    if ordinal_value(&lower).is_some() {
        classes.insert(Nonterminal::Ordinal);
    }
    classes
}

struct RawToken {
    char_span: (usize, usize),
    byte_span: (usize, usize),
}

fn segment(text: &str) -> Vec<RawToken> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map(|(b, _)| *b).unwrap_or(text.len());
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        loop {
            match chars.get(i) {
                Some((_, c)) if c.is_alphanumeric() => i += 1,
                Some((_, c)) if matches!(c, '-' | '/' | '.') => {
                    let prev = chars[i - 1].1;
                    let next = chars.get(i + 1).map(|(_, c)| *c);
                    let joins = match (c, next) {
                        ('.', Some(n)) => prev.is_ascii_digit() && n.is_ascii_digit(),
                        (_, Some(n)) => n.is_alphanumeric(),
                        _ => false,
                    };
                    if joins {
                        i += 2;
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        out.push(RawToken { char_span: (start, i), byte_span: (byte_at(start), byte_at(i)) });
    }
    out
}

/// Split `text` into word tokens and tag each with its lexical classes.
///
/// Separators (whitespace and punctuation) are never part of a token, except
/// inside lexicalized multi-word entries such as "later in", which become a
/// single token spanning the original text.
pub fn tokenize(text: &str, grammar: &Grammar) -> Vec<Token> {
    let raw = segment(text);
    let max_words = grammar.lexicon().keys().map(|k| k.split(' ').count()).max().unwrap_or(1);
    let mut tokens = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let mut taken = 1;
        for n in (2..=max_words.min(raw.len() - i)).rev() {
            let group = &raw[i..i + n];
            let whitespace_only = group.windows(2).all(|w| {
                text[w[0].byte_span.1..w[1].byte_span.0].chars().all(char::is_whitespace)
            });
            if !whitespace_only {
                continue;
            }
            let surface = &text[group[0].byte_span.0..group[n - 1].byte_span.1];
            if grammar.lookup(surface).is_some() {
                taken = n;
                break;
            }
        }
        let first = &raw[i];
        let last = &raw[i + taken - 1];
        let byte_span = (first.byte_span.0, last.byte_span.1);
        let surface = &text[byte_span.0..byte_span.1];
        let mut classes = builtin_classes(surface);
        if let Some(listed) = grammar.lookup(surface) {
            classes.extend(listed.iter().copied());
        }
        tokens.push(Token {
            surface: surface.to_string(),
            span: (first.char_span.0, last.char_span.1),
            byte_span,
            lexical_classes: classes,
        });
        i += taken;
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::shipped;
    use proptest::prelude::*;
    use Nonterminal::*;

    fn classes(text: &str) -> Vec<Vec<Nonterminal>> {
        tokenize(text, shipped()).into_iter().map(|t| t.lexical_classes.into_iter().collect()).collect()
    }

    #[test]
    fn three_days_ago() {
        assert_eq!(classes("three days ago"), vec![vec![Num], vec![Unit], vec![AgoMarker]]);
    }

    #[test]
    fn empty_and_unknown() {
        assert!(tokenize("", shipped()).is_empty());
        let toks = tokenize("hello world", shipped());
        assert_eq!(toks.len(), 2);
        assert!(toks.iter().all(|t| !t.is_lexical()));
    }

    #[test]
    fn numerals_and_dates() {
        assert_eq!(classes("3 1st"), vec![vec![Num], vec![Ordinal]]);
        assert_eq!(classes("2001"), vec![vec![Num, YearNum]]);
        assert_eq!(classes("01/01/01"), vec![vec![DateLit]]);
        assert_eq!(classes("2001-01-01"), vec![vec![DateLit]]);
        assert_eq!(classes("twenty-one"), vec![vec![Num]]);
        assert_eq!(classes("1.5"), vec![vec![Num]]);
        assert_eq!(number_value("ninety-nine"), Some(Rational::from_integer(99)));
        assert_eq!(number_value("1.5"), Some(Rational::new(3, 2).unwrap()));
        assert_eq!(ordinal_value("twenty-first"), Some(21));
        assert_eq!(ordinal_value("fourth"), Some(4));
        assert_eq!(ordinal_value("22nd"), Some(22));
        assert_eq!(ordinal_value("0th"), None);
    }

    #[test]
    fn january_first_with_comma() {
        let toks = tokenize("on January 1st, 2001", shipped());
        let surfaces: Vec<&str> = toks.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(surfaces, ["on", "January", "1st", "2001"]);
        assert!(toks[1].lexical_classes.contains(&MonthName));
    }

    #[test]
    fn bigram_is_lexicalized() {
        let toks = tokenize("Later  in the day", shipped());
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[0].surface, "Later  in");
        assert_eq!(toks[0].lexical_classes.iter().copied().collect::<Vec<_>>(), vec![ModLaterIn]);
        // not across punctuation
        assert_eq!(tokenize("later, in the day", shipped()).len(), 4);
    }

    #[test]
    fn lookup_is_case_insensitive() {
        assert_eq!(classes("DECEMBER"), classes("december"));
        assert_eq!(classes("Monday"), vec![vec![WeekdayName]]);
    }

    #[test]
    fn offsets_are_character_based() {
        let toks = tokenize("été in 3 days", shipped());
        assert_eq!(toks[0].span, (0, 3));
        assert_eq!(toks[1].span, (4, 6));
        assert_eq!(toks[1].byte_span, (6, 8));
    }

    proptest! {
        #[test]
        fn tokenization_is_lossless(text in "[a-zA-Z0-9 ,./\\-é]{0,40}") {
            let toks = tokenize(&text, shipped());
            let mut rebuilt = String::new();
            let mut cursor = 0;
            for t in &toks {
                prop_assert!(t.byte_span.0 >= cursor);
                rebuilt.push_str(&text[cursor..t.byte_span.0]);
                prop_assert_eq!(&text[t.byte_span.0..t.byte_span.1], t.surface.as_str());
                rebuilt.push_str(&t.surface);
                cursor = t.byte_span.1;
            }
            rebuilt.push_str(&text[cursor..]);
            prop_assert_eq!(rebuilt, text.clone());
            // separators contain no alphanumerics
            let covered: usize = toks.iter().map(|t| t.span.1 - t.span.0).sum();
            let alnum = text.chars().filter(|c| c.is_alphanumeric()).count();
            prop_assert!(covered >= alnum);
        }

        #[test]
        fn tokenization_is_deterministic(text in "[a-z ]{0,30}") {
            prop_assert_eq!(tokenize(&text, shipped()), tokenize(&text, shipped()));
        }
    }
}
