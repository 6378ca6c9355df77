//! Python bindings: corpus corruption, trained-model scoring and the
//! threshold sweep.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ooc_core::corpus::{
    corrupt_corpus, document_text, pos_tag, tokenize_document, CorruptionConfig, Document, Label, Vocabulary,
};
use ooc_core::evaluation::{self, Thresholds, TokenScore};
use ooc_core::synthetic::{topic_corpus_texts, TopicCorpusConfig};
use ooc_core::training::Checkpoint;
use ooc_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn documents(texts: &[(String, String)]) -> PyResult<Vec<Document>> {
    texts
        .iter()
        .map(|(id, text)| {
            let mut d = tokenize_document(id, text).map_err(py_err)?;
            pos_tag(&mut d);
            Ok(d)
        })
        .collect()
}

fn token_scores(scores: &[f64], labels: &[bool]) -> PyResult<Vec<TokenScore>> {
    if scores.len() != labels.len() {
        return Err(PyValueError::new_err(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(scores
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&score, &l))| TokenScore {
            doc_id: String::new(),
            sentence_index: 0,
            token_index: i,
            score,
            label: if l { Label::OutOfContext } else { Label::Valid },
        })
        .collect())
}

/// Threshold sweep over every `t`; returns `(t, precision, recall, f)` rows
/// and the index of the operating point.
#[pyfunction]
fn sweep(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<(Vec<(usize, f64, f64, f64)>, usize)> {
    let curve = evaluation::sweep(&token_scores(&scores, &labels)?, &Thresholds::All).map_err(py_err)?;
    let rows = curve
        .points
        .iter()
        .map(|p| (p.threshold, p.precision, p.recall, p.f_score))
        .collect();
    Ok((rows, curve.chosen))
}

/// `exp` of the mean negative log-likelihood.
#[pyfunction]
fn perplexity(nlls: Vec<f64>) -> PyResult<f64> {
    let labels = vec![false; nlls.len()];
    evaluation::perplexity_from_scores(&token_scores(&nlls, &labels)?).map_err(py_err)
}

/// `(id, pre-tagged text)` pairs of the synthetic two-topic corpus.
#[pyfunction]
#[pyo3(signature = (documents=200, seed=0))]
fn topic_corpus(documents: usize, seed: u64) -> Vec<(String, String)> {
    topic_corpus_texts(&TopicCorpusConfig {
        documents,
        seed,
        ..Default::default()
    })
}

/// Corrupts `(id, text)` documents; returns the corrupted documents and the
/// manifest text.
#[pyfunction]
#[pyo3(signature = (texts, rate=10, seed=0, k=50, vocab_size=30000))]
fn corrupt(
    texts: Vec<(String, String)>,
    rate: usize,
    seed: u64,
    k: usize,
    vocab_size: usize,
) -> PyResult<(Vec<(String, String)>, String)> {
    let docs = documents(&texts)?;
    let vocab = Vocabulary::build(&docs, vocab_size).map_err(py_err)?;
    let cfg = CorruptionConfig {
        rate,
        window: k,
        ..Default::default()
    };
    let (out, manifest) = corrupt_corpus(&docs, &vocab, &cfg, seed).map_err(py_err)?;
    Ok((
        out.iter().map(|d| (d.id.clone(), document_text(d))).collect(),
        manifest.to_text(),
    ))
}

/// A trained model loaded from a checkpoint.
#[pyclass(frozen)]
struct Model {
    inner: ooc_core::models::Model,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let ckpt = Checkpoint::load(&path, None).map_err(py_err)?;
        Ok(Self {
            inner: ckpt.to_model().map_err(py_err)?,
        })
    }

    #[getter]
    fn topology(&self) -> &'static str {
        self.inner.topology().as_str()
    }

    #[getter]
    fn fingerprint(&self) -> String {
        self.inner.vocab.fingerprint()
    }

    /// Per-token scores `(doc_id, sentence, token, score)`; higher means
    /// more likely out of context.
    fn score(&self, texts: Vec<(String, String)>) -> PyResult<Vec<(String, usize, usize, f64)>> {
        let docs = documents(&texts)?;
        Ok(evaluation::score(&self.inner, &docs)
            .map_err(py_err)?
            .into_iter()
            .map(|s| (s.doc_id, s.sentence_index, s.token_index, s.score))
            .collect())
    }

    fn perplexity(&self, texts: Vec<(String, String)>) -> PyResult<f64> {
        evaluation::perplexity(&self.inner, &documents(&texts)?).map_err(py_err)
    }
}

#[pymodule]
pub fn ooc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(perplexity, m)?)?;
    m.add_function(wrap_pyfunction!(topic_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(corrupt, m)?)?;
    m.add_class::<Model>()?;
    Ok(())
}
