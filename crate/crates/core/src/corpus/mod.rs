//! Corpus ingestion, vocabulary construction and the out-of-context
//! replacement pipeline that produces labeled benchmark data.

mod corrupt;
mod filter;
mod io;
mod manifest;
mod parallel;
mod pos;
mod split;
mod tokenize;
mod types;
mod vocab;

pub use corrupt::{
    appearance_window, apply_labels, corrupt_corpus, match_inflection, replay, select_candidates, Candidate,
    CorruptionConfig, Position,
};
pub use filter::{filter_dataset, FilterConfig, FilterReport};
pub use io::{document_text, read_corpus_dir, read_document, write_corpus_dir, write_document};
pub use manifest::{CorruptionManifest, ManifestRecord};
pub use parallel::{ingest_parallel, ingest_parallel_text};
pub use pos::{is_plural, lemma, pos_tag, Capitalization};
pub use split::{split_corpus, Splits};
pub use tokenize::{tokenize, tokenize_document};
pub use types::{Document, Label, Pos, Sentence, Token};
pub use vocab::{Vocabulary, BOS, EOS, PAD, RESERVED, UNK};
