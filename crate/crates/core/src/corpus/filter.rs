use log::warn;

use super::types::Document;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FilterConfig {
    pub max_sentence_len: usize,
    /// Documents with fewer sentences are dropped; one more than the
    /// context window so every document has a full-window sentence.
    pub min_sentences: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            max_sentence_len: 50,
            min_sentences: 11,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub sentences_dropped: usize,
    pub documents_dropped: usize,
}

/// Drops empty or overlong sentences, then documents that end up too short.
/// Surviving sentences are renumbered.
pub fn filter_dataset(docs: Vec<Document>, cfg: &FilterConfig) -> (Vec<Document>, FilterReport) {
    if docs.is_empty() {
        warn!("filter_dataset: empty corpus");
    }
    let mut report = FilterReport::default();
    let mut kept = Vec::with_capacity(docs.len());
    for mut doc in docs {
        let before = doc.sentences.len();
        doc.sentences
            .retain(|s| !s.is_empty() && s.len() <= cfg.max_sentence_len);
        report.sentences_dropped += before - doc.sentences.len();
        if doc.sentences.len() < cfg.min_sentences {
            report.documents_dropped += 1;
            continue;
        }
        doc.reindex();
        kept.push(doc);
    }
    (kept, report)
}
