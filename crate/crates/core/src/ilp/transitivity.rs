//! Transitivity triples: `(r1, r2, r3)` means `x r1 y` and `y r2 z`
//! together force `x r3 z`.

use std::collections::BTreeSet;

use crate::bridge::RelationLabel;
use crate::{Error, Result};

pub type Triple = (RelationLabel, RelationLabel, RelationLabel);

/// Shipped table in the on-disk format read by [`parse_table`].
pub const DEFAULT_TABLE: &str = "\
# r1 r2 r3: x r1 y and y r2 z force x r3 z.
# Only compositions with a single possible outcome are listed.
s s s
s b b
b s b
s a a
a s a
s i i
i s i
s ii ii
ii s ii
b b b
a a a
i i i
ii ii ii
b i b
a i a
ii b b
ii a a
";

pub fn parse_table(text: &str) -> Result<BTreeSet<Triple>> {
    let mut out = BTreeSet::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let labels: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| Error::InvalidArgument(format!("transitivity table line {}: {msg}", n + 1));
        let [r1, r2, r3] = labels[..] else {
            return Err(bad(format!("expected three labels, found {}", labels.len())));
        };
        let triple: Triple = (
            r1.parse().map_err(|e: Error| bad(e.to_string()))?,
            r2.parse().map_err(|e: Error| bad(e.to_string()))?,
            r3.parse().map_err(|e: Error| bad(e.to_string()))?,
        );
        if [triple.0, triple.1, triple.2].contains(&RelationLabel::Vague) {
            return Err(bad("the vague relation cannot take part in transitivity".into()));
        }
        out.insert(triple);
    }
    Ok(out)
}

/// Shipped triples whose three labels all belong to `relation_set`.
pub fn default_transitivity_table(relation_set: &[RelationLabel]) -> BTreeSet<Triple> {
    parse_table(DEFAULT_TABLE)
        .expect("shipped table parses")
        .into_iter()
        .filter(|(a, b, c)| [a, b, c].iter().all(|r| relation_set.contains(r)))
        .collect()
}
