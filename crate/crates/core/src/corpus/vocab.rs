use std::collections::HashMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::types::{Document, Pos, Sentence};

pub const UNK: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const PAD: usize = 3;
pub const RESERVED: [&str; 4] = ["<unk>", "<s>", "</s>", "<pad>"];

/// Frequency-ranked, lowercased word types with four reserved ids in front.
/// The word at id `RESERVED.len() + r - 1` has frequency rank `r` (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    nouns: Vec<bool>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Keeps the `size - 4` most frequent types (ties by lexicographic
    /// order). A type is flagged as noun when at least half of its
    /// occurrences are tagged as nouns.
    pub fn build(docs: &[Document], size: usize) -> Result<Self> {
        Self::build_from_sentences(docs.iter().flat_map(|d| d.sentences.iter()), size)
    }

    pub fn build_from_sentences<'a>(sentences: impl IntoIterator<Item = &'a Sentence>, size: usize) -> Result<Self> {
        if size < RESERVED.len() + 1 {
            return Err(Error::contract(format!(
                "vocabulary size {size} must be at least {} (including {} reserved symbols)",
                RESERVED.len() + 1,
                RESERVED.len()
            )));
        }
        let mut freq: HashMap<&str, (u64, u64)> = HashMap::new();
        for s in sentences {
            for t in &s.tokens {
                let e = freq.entry(t.lower.as_str()).or_default();
                e.0 += 1;
                if t.pos == Pos::Noun {
                    e.1 += 1;
                }
            }
        }
        let mut types: Vec<(&str, (u64, u64))> = freq
            .into_iter()
            .filter(|(w, _)| !RESERVED.contains(w))
            .collect();
        types.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then_with(|| a.0.cmp(b.0)));
        types.truncate(size - RESERVED.len());

        let mut words: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let mut counts = vec![0; RESERVED.len()];
        let mut nouns = vec![false; RESERVED.len()];
        for (w, (c, n)) in types {
            words.push(w.to_string());
            counts.push(c);
            nouns.push(2 * n >= c && n > 0);
        }
        Ok(Self::from_parts(words, counts, nouns))
    }

    fn from_parts(words: Vec<String>, counts: Vec<u64>, nouns: Vec<bool>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self {
            words,
            counts,
            nouns,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Id of a surface (case-insensitive), `<unk>` when absent.
    pub fn id(&self, surface: &str) -> usize {
        self.get(surface).unwrap_or(UNK)
    }

    pub fn get(&self, surface: &str) -> Option<usize> {
        self.index
            .get(surface)
            .or_else(|| self.index.get(&surface.to_lowercase()))
            .copied()
            .filter(|&i| i >= RESERVED.len())
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.get(surface).is_some()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn is_noun(&self, id: usize) -> bool {
        self.nouns[id]
    }

    /// Frequency rank (1 = most frequent); `None` for reserved ids.
    pub fn rank(&self, id: usize) -> Option<usize> {
        (id >= RESERVED.len() && id < self.words.len()).then(|| id - RESERVED.len() + 1)
    }

    pub fn id_at_rank(&self, rank: usize) -> Option<usize> {
        let id = rank.checked_add(RESERVED.len())?.checked_sub(1)?;
        (rank >= 1 && id < self.words.len()).then_some(id)
    }

    /// Highest rank in the vocabulary.
    pub fn max_rank(&self) -> usize {
        self.words.len() - RESERVED.len()
    }

    /// Writes vocabulary ids into every token.
    pub fn assign(&self, doc: &mut Document) {
        for s in &mut doc.sentences {
            self.assign_sentence(s);
        }
    }

    pub fn assign_sentence(&self, s: &mut Sentence) {
        for t in &mut s.tokens {
            t.vocab_id = self.id(&t.lower);
        }
    }

    /// Short hash over the id-ordered word list.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for w in &self.words {
            h.update(w.as_bytes());
            h.update(b"\n");
        }
        h.finalize()[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// One line per id: `word<TAB>count<TAB>noun-flag`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((w, c), n) in self.words.iter().zip(&self.counts).zip(&self.nouns) {
            let _ = writeln!(out, "{w}\t{c}\t{}", u8::from(*n));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut nouns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = || Error::format("vocabulary", format!("line {}: {line:?}", i + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            words.push(fields[0].to_string());
            counts.push(fields[1].parse().map_err(|_| bad())?);
            nouns.push(match fields[2] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            });
        }
        if words.len() <= RESERVED.len() || words[..RESERVED.len()] != RESERVED {
            return Err(Error::format("vocabulary", "missing reserved symbols"));
        }
        Ok(Self::from_parts(words, counts, nouns))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}
