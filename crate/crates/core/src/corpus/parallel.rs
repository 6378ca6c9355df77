use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

use super::tokenize::tokenize;
use super::types::Sentence;

/// Reads a line-aligned source/target pair of files.
pub fn ingest_parallel(source_file: &Path, target_file: &Path) -> Result<Vec<(Sentence, Sentence)>> {
    let src = std::fs::read_to_string(source_file).map_err(|e| Error::io(source_file, e))?;
    let tgt = std::fs::read_to_string(target_file).map_err(|e| Error::io(target_file, e))?;
    ingest_parallel_text(&src, &tgt)
}

/// Pairs line `i` of `source` with line `i` of `target`. Pairs where either
/// side is blank are skipped.
pub fn ingest_parallel_text(source: &str, target: &str) -> Result<Vec<(Sentence, Sentence)>> {
    let src: Vec<&str> = source.lines().collect();
    let tgt: Vec<&str> = target.lines().collect();
    if src.len() != tgt.len() {
        return Err(Error::Alignment {
            source_lines: src.len(),
            target_lines: tgt.len(),
        });
    }
    let mut pairs = Vec::with_capacity(src.len());
    for (i, (s, t)) in src.iter().zip(&tgt).enumerate() {
        if s.trim().is_empty() || t.trim().is_empty() {
            warn!("parallel corpus line {}: blank side skipped", i + 1);
            continue;
        }
        let mut s = tokenize(s)?.sentences.remove(0);
        let mut t = tokenize(t)?.sentences.remove(0);
        s.index = i;
        t.index = i;
        pairs.push((s, t));
    }
    Ok(pairs)
}
