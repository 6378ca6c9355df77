//! Out-of-context replacement: candidate selection, appearance window,
//! inflection matching and the seeded corruption pass with its replay.

use std::collections::{BTreeSet, HashMap};

use log::warn;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

use super::manifest::{CorruptionManifest, ManifestRecord};
use super::pos::{is_plural, lemma, Capitalization};
use super::types::{Document, Label, Pos, Token};
use super::vocab::Vocabulary;

/// `(sentence_index, token_index)` within a document.
pub type Position = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorruptionConfig {
    /// Replacements per document.
    pub rate: usize,
    /// Appearance-window radius in frequency ranks.
    pub window: usize,
    /// Minimum number of noun occurrences of a lemma within the document.
    pub min_lemma_freq: usize,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            rate: 10,
            window: 50,
            min_lemma_freq: 2,
        }
    }
}

impl CorruptionConfig {
    pub fn params(&self) -> Vec<(String, String)> {
        vec![
            ("rate".into(), self.rate.to_string()),
            ("window".into(), self.window.to_string()),
            ("min_lemma_freq".into(), self.min_lemma_freq.to_string()),
        ]
    }
}

/// In-vocabulary noun positions whose lemma occurs as a noun at least
/// `min_lemma_freq` times in the document, in reading order.
pub fn select_candidates(doc: &Document, vocab: &Vocabulary, min_lemma_freq: usize) -> Vec<Position> {
    let mut lemma_freq: HashMap<String, usize> = HashMap::new();
    for t in doc.tokens().filter(|t| t.pos == Pos::Noun) {
        *lemma_freq.entry(lemma(&t.lower)).or_default() += 1;
    }
    let mut out = Vec::new();
    for s in &doc.sentences {
        for (j, t) in s.tokens.iter().enumerate() {
            if t.pos == Pos::Noun
                && vocab.contains(&t.lower)
                && lemma_freq.get(&lemma(&t.lower)).copied().unwrap_or(0) >= min_lemma_freq
            {
                out.push((s.index, j));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    /// Lowercase vocabulary form.
    pub surface: String,
    pub rank: usize,
}

/// Nouns whose frequency rank lies within `±radius` of the token's rank,
/// excluding the token's own lemma family. Sorted by rank.
pub fn appearance_window(token: &Token, vocab: &Vocabulary, radius: usize) -> Result<Vec<Candidate>> {
    let id = vocab
        .get(&token.lower)
        .ok_or_else(|| Error::contract(format!("appearance window for out-of-vocabulary token {:?}", token.surface)))?;
    let rank = vocab.rank(id).expect("in-vocabulary ids have a rank");
    let own = lemma(&token.lower);
    let lo = rank.saturating_sub(radius).max(1);
    let hi = (rank + radius).min(vocab.max_rank());
    Ok((lo..=hi)
        .filter(|&r| r != rank)
        .filter_map(|r| vocab.id_at_rank(r).map(|id| (r, id)))
        .filter(|&(_, id)| vocab.is_noun(id) && lemma(vocab.word(id)) != own)
        .map(|(r, id)| Candidate {
            surface: vocab.word(id).to_string(),
            rank: r,
        })
        .collect())
}

/// Picks the candidate with the same grammatical number as `original`,
/// closest in rank to `original_rank` (ties lexicographic), rendered in the
/// original's capitalization.
pub fn match_inflection(original: &Token, original_rank: usize, candidates: &[Candidate]) -> Option<String> {
    let plural = is_plural(&original.lower);
    candidates
        .iter()
        .filter(|c| is_plural(&c.surface) == plural && c.surface != original.lower)
        .min_by(|a, b| {
            a.rank
                .abs_diff(original_rank)
                .cmp(&b.rank.abs_diff(original_rank))
                .then_with(|| a.surface.cmp(&b.surface))
        })
        .map(|c| Capitalization::of(&original.surface).apply(&c.surface))
}

fn replace_at(doc: &mut Document, (si, ti): Position, replacement: &str) {
    let t = &mut doc.sentences[si].tokens[ti];
    t.set_surface(replacement);
    t.label = Label::OutOfContext;
}

/// Corrupts every document with up to `cfg.rate` replacements. Each
/// document draws positions from its own stream derived from
/// `(seed, doc_id)`, so the result does not depend on document order.
pub fn corrupt_corpus(
    docs: &[Document],
    vocab: &Vocabulary,
    cfg: &CorruptionConfig,
    seed: u64,
) -> Result<(Vec<Document>, CorruptionManifest)> {
    if cfg.rate == 0 {
        return Err(Error::contract("replacement rate must be at least 1"));
    }
    let mut manifest = CorruptionManifest {
        seed,
        params: cfg.params(),
        ..Default::default()
    };
    let mut out = Vec::with_capacity(docs.len());
    for doc in docs {
        let mut rng = seed::stream(seed, &[seed::CORRUPT, &doc.id]);
        let mut positions = select_candidates(doc, vocab, cfg.min_lemma_freq);
        if positions.is_empty() {
            warn!("document {}: no replacement candidates", doc.id);
        }
        positions.shuffle(&mut rng);

        let mut corrupted = doc.clone();
        let mut records = Vec::new();
        for pos in positions {
            if records.len() == cfg.rate {
                break;
            }
            let token = &doc.sentences[pos.0].tokens[pos.1];
            let rank = vocab
                .get(&token.lower)
                .and_then(|id| vocab.rank(id))
                .expect("candidates are in vocabulary");
            let window = appearance_window(token, vocab, cfg.window)?;
            let Some(replacement) = match_inflection(token, rank, &window) else {
                continue;
            };
            replace_at(&mut corrupted, pos, &replacement);
            records.push(ManifestRecord {
                doc_id: doc.id.clone(),
                sentence_index: pos.0,
                token_index: pos.1,
                original: token.surface.clone(),
                replacement,
            });
        }
        if records.len() < cfg.rate {
            warn!(
                "document {}: {} of {} replacements applied",
                doc.id,
                records.len(),
                cfg.rate
            );
        }
        records.sort_by_key(|r| (r.sentence_index, r.token_index));
        manifest.documents.push((doc.id.clone(), records.len()));
        manifest.records.extend(records);
        out.push(corrupted);
    }
    Ok((out, manifest))
}

fn check_record(doc: &Document, r: &ManifestRecord, expect: impl Fn(&Token) -> bool) -> Result<Position> {
    let t = doc
        .sentences
        .get(r.sentence_index)
        .and_then(|s| s.tokens.get(r.token_index))
        .ok_or_else(|| {
            Error::format(
                "manifest",
                format!(
                    "document {}: no token at ({}, {})",
                    r.doc_id, r.sentence_index, r.token_index
                ),
            )
        })?;
    if !expect(t) {
        return Err(Error::format(
            "manifest",
            format!(
                "document {}: token {:?} at ({}, {}) does not match record {} -> {}",
                r.doc_id, t.surface, r.sentence_index, r.token_index, r.original, r.replacement
            ),
        ));
    }
    Ok((r.sentence_index, r.token_index))
}

/// Re-applies a manifest to the clean (filtered) corpus. The manifest must
/// cover exactly the documents of `clean` with the declared record counts.
pub fn replay(manifest: &CorruptionManifest, clean: &[Document]) -> Result<Vec<Document>> {
    let declared: BTreeSet<&str> = manifest.documents.iter().map(|(d, _)| d.as_str()).collect();
    let present: BTreeSet<&str> = clean.iter().map(|d| d.id.as_str()).collect();
    let not_in_manifest: Vec<&str> = present.difference(&declared).copied().collect();
    if !not_in_manifest.is_empty() {
        return Err(Error::format(
            "manifest",
            format!("partial manifest, missing documents: {}", not_in_manifest.join(", ")),
        ));
    }
    let not_in_corpus: Vec<&str> = declared.difference(&present).copied().collect();
    if !not_in_corpus.is_empty() {
        return Err(Error::format(
            "corpus",
            format!("clean corpus is missing documents: {}", not_in_corpus.join(", ")),
        ));
    }
    let counts = manifest.record_counts();
    let short: Vec<String> = manifest
        .documents
        .iter()
        .filter(|(d, n)| counts.get(d.as_str()).copied().unwrap_or(0) != *n)
        .map(|(d, n)| format!("{d} ({} of {n} records)", counts.get(d.as_str()).copied().unwrap_or(0)))
        .collect();
    if !short.is_empty() {
        return Err(Error::format(
            "manifest",
            format!("partial manifest, incomplete documents: {}", short.join(", ")),
        ));
    }

    let mut out = clean.to_vec();
    let index: HashMap<String, usize> = out
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.clone(), i))
        .collect();
    for r in &manifest.records {
        let doc = &mut out[index[&r.doc_id]];
        let pos = check_record(doc, r, |t| t.surface == r.original)?;
        replace_at(doc, pos, &r.replacement);
    }
    Ok(out)
}

/// Marks manifest positions as out-of-context in already corrupted
/// documents. Records for documents not in `docs` are ignored.
pub fn apply_labels(docs: &mut [Document], manifest: &CorruptionManifest) -> Result<()> {
    let index: HashMap<String, usize> = docs
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.clone(), i))
        .collect();
    for r in &manifest.records {
        let Some(&i) = index.get(&r.doc_id) else { continue };
        let (si, ti) = check_record(&docs[i], r, |t| t.surface == r.replacement)?;
        docs[i].sentences[si].tokens[ti].label = Label::OutOfContext;
    }
    Ok(())
}
