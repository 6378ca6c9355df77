//! Ground-truth record of every replacement.
//!
//! Text layout:
//!
//! ```text
//! # seed=42<TAB>rate=10<TAB>...
//! #doc<TAB>talk-001<TAB>10
//! talk-001<TAB>3<TAB>7<TAB>engineering<TAB>performance
//! ```
//!
//! The first line carries the seed and pipeline parameters, `#doc` lines
//! list every processed document with its replacement count, and each
//! remaining line is one replacement with zero-based indices.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRecord {
    pub doc_id: String,
    pub sentence_index: usize,
    pub token_index: usize,
    pub original: String,
    pub replacement: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorruptionManifest {
    pub seed: u64,
    /// Pipeline parameter snapshot, in insertion order.
    pub params: Vec<(String, String)>,
    /// Every processed document and its number of replacements.
    pub documents: Vec<(String, usize)>,
    pub records: Vec<ManifestRecord>,
}

impl CorruptionManifest {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn records_for<'a>(&'a self, doc_id: &'a str) -> impl Iterator<Item = &'a ManifestRecord> + 'a {
        self.records.iter().filter(move |r| r.doc_id == doc_id)
    }

    /// Record counts per document as found in the record lines.
    pub fn record_counts(&self) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for r in &self.records {
            *m.entry(r.doc_id.as_str()).or_default() += 1;
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# seed={}", self.seed);
        for (k, v) in &self.params {
            let _ = write!(out, "\t{k}={v}");
        }
        out.push('\n');
        for (id, n) in &self.documents {
            let _ = writeln!(out, "#doc\t{id}\t{n}");
        }
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                r.doc_id, r.sentence_index, r.token_index, r.original, r.replacement
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let bad = |n: usize, detail: &str| Error::format("manifest", format!("line {}: {detail}", n + 1));
        let (_, header) = lines.next().ok_or_else(|| bad(0, "missing header"))?;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| bad(0, "header must start with '# '"))?;
        let mut m = CorruptionManifest::default();
        let mut seed = None;
        for field in header.split('\t') {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| bad(0, "expected key=value"))?;
            if k == "seed" {
                seed = Some(v.parse().map_err(|_| bad(0, "seed is not an integer"))?);
            } else {
                m.params.push((k.to_string(), v.to_string()));
            }
        }
        m.seed = seed.ok_or_else(|| bad(0, "missing seed"))?;

        for (n, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.first() == Some(&"#doc") {
                if fields.len() != 3 {
                    return Err(bad(n, "expected #doc<TAB>id<TAB>count"));
                }
                let count = fields[2].parse().map_err(|_| bad(n, "bad count"))?;
                m.documents.push((fields[1].to_string(), count));
                continue;
            }
            if fields.len() != 5 {
                return Err(bad(n, "expected 5 tab-separated fields"));
            }
            m.records.push(ManifestRecord {
                doc_id: fields[0].to_string(),
                sentence_index: fields[1].parse().map_err(|_| bad(n, "bad sentence index"))?,
                token_index: fields[2].parse().map_err(|_| bad(n, "bad token index"))?,
                original: fields[3].to_string(),
                replacement: fields[4].to_string(),
            });
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
