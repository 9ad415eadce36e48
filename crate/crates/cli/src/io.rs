use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::de::DeserializeOwned;
use stage_core::records::CueRecord;

/// Read a whole input; `-` means standard input.
pub fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).context("reading standard input")?;
        return Ok(text);
    }
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Parse one JSON record per non-blank line, naming the file and line on
/// failure.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let text = read_input(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l)
                .map(|r| (n + 1, r))
                .map_err(|e| anyhow!("{}: line {}: {e}", path.display(), n + 1))
        })
        .collect()
}

/// Cue lines are either plain text or `{"text": ..., "dct": ...}` records.
pub fn read_cues(path: &Path) -> Result<Vec<(usize, CueRecord)>> {
    let text = read_input(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cue = if trimmed.starts_with('{') {
            serde_json::from_str(trimmed).map_err(|e| anyhow!("{}: line {}: {e}", path.display(), n + 1))?
        } else {
            CueRecord { id: None, text: trimmed.to_string(), dct: None }
        };
        out.push((n + 1, cue));
    }
    Ok(out)
}

/// Where finished output goes. Nothing is written until the whole payload
/// exists.
pub struct Sink(pub Option<PathBuf>);

impl Sink {
    pub fn write(&self, payload: &str) -> Result<()> {
        match &self.0 {
            Some(path) => fs::write(path, payload).with_context(|| format!("cannot write {}", path.display())),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(payload.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

pub fn json_line<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}
