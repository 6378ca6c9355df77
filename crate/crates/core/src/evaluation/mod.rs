//! Per-token scoring, threshold sweep, perplexity and the dev→test
//! reporting protocol.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::corpus::{Document, Label};
use crate::error::{Error, Result};
use crate::models::{Instance, Model};
use crate::training::instances;

/// Score of one token; higher means more likely out of context.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenScore {
    pub doc_id: String,
    pub sentence_index: usize,
    pub token_index: usize,
    pub score: f64,
    pub label: Label,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    /// Number of top-scored tokens predicted out of context.
    pub threshold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
    /// Index into `points` of the operating point.
    pub chosen: usize,
    /// Number of scored tokens.
    pub total: usize,
    pub positives: usize,
}

impl SweepCurve {
    pub fn operating_point(&self) -> SweepPoint {
        self.points[self.chosen]
    }

    /// Tab-separated `threshold  precision  recall  f_score`, one line per
    /// threshold after a header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("threshold\tprecision\trecall\tf_score\n");
        for p in &self.points {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", p.threshold, p.precision, p.recall, p.f_score);
        }
        out
    }
}

/// Which `t` values to sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Thresholds {
    /// Every `t` in `1..=N`.
    All,
    List(Vec<usize>),
}

fn score_docs(model: &Model, docs: &[Document], zero_context: bool) -> Result<Vec<TokenScore>> {
    let prepared = model.prepare(docs);
    let cache = model.sentence_cache(&prepared)?;
    let all: Vec<Instance> = instances(&prepared);
    let mut out = Vec::with_capacity(docs.iter().map(Document::token_count).sum());
    for chunk in all.chunks(100) {
        let scores = model.score_batch(&prepared, cache.as_ref(), chunk, zero_context)?;
        for (inst, row) in chunk.iter().zip(scores) {
            let sentence = &docs[inst.doc].sentences[inst.sentence];
            if row.len() != sentence.tokens.len() {
                return Err(Error::contract(format!(
                    "document {}: sentence {} has {} tokens but {} scores",
                    docs[inst.doc].id,
                    inst.sentence,
                    sentence.tokens.len(),
                    row.len()
                )));
            }
            for ((t, tok), score) in sentence.tokens.iter().enumerate().zip(row) {
                out.push(TokenScore {
                    doc_id: docs[inst.doc].id.clone(),
                    sentence_index: sentence.index,
                    token_index: t,
                    score,
                    label: tok.label,
                });
            }
        }
    }
    Ok(out)
}

/// `-ln P(w_t | w_<t, C)` for every token of `docs`.
pub fn score_lm(model: &Model, docs: &[Document]) -> Result<Vec<TokenScore>> {
    if !model.topology().is_lm() {
        return Err(Error::contract(format!("score_lm needs a language model, got {}", model.topology())));
    }
    score_docs(model, docs, false)
}

/// `P(out-of-context)` for every token of `docs`.
pub fn score_binclass(model: &Model, docs: &[Document]) -> Result<Vec<TokenScore>> {
    if model.topology().is_lm() {
        return Err(Error::contract(format!("score_binclass needs a classifier, got {}", model.topology())));
    }
    score_docs(model, docs, false)
}

/// Scores with whichever rule fits the topology.
pub fn score(model: &Model, docs: &[Document]) -> Result<Vec<TokenScore>> {
    score_docs(model, docs, false)
}

/// Scores with the context vector forced to zero.
pub fn score_zero_context(model: &Model, docs: &[Document]) -> Result<Vec<TokenScore>> {
    score_docs(model, docs, true)
}

/// Descending by score; ties by position.
fn ranking(scores: &[TokenScore]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&scores[a], &scores[b]);
        y.score
            .total_cmp(&x.score)
            .then_with(|| x.doc_id.cmp(&y.doc_id))
            .then_with(|| x.sentence_index.cmp(&y.sentence_index))
            .then_with(|| x.token_index.cmp(&y.token_index))
    });
    order
}

/// Precision, recall and F1 at `t` from a true-positive count.
pub fn point(threshold: usize, tp: usize, positives: usize) -> SweepPoint {
    let precision = tp as f64 / threshold as f64;
    let recall = tp as f64 / positives as f64;
    let f_score = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    SweepPoint {
        threshold,
        precision,
        recall,
        f_score,
    }
}

/// Classifies the top-`t` tokens as out of context for every requested
/// `t` and picks the `t` with maximal F-score (smallest `t` on ties).
pub fn sweep(scores: &[TokenScore], thresholds: &Thresholds) -> Result<SweepCurve> {
    let n = scores.len();
    if n == 0 {
        return Err(Error::contract("cannot sweep an empty score list"));
    }
    let positives = scores.iter().filter(|s| s.label.is_positive()).count();
    if positives == 0 {
        return Err(Error::contract("no gold out-of-context tokens: recall is undefined"));
    }
    let ts: Vec<usize> = match thresholds {
        Thresholds::All => (1..=n).collect(),
        Thresholds::List(l) => {
            if let Some(&bad) = l.iter().find(|&&t| t == 0 || t > n) {
                return Err(Error::contract(format!("threshold {bad} outside 1..={n}")));
            }
            if l.is_empty() {
                return Err(Error::contract("empty threshold list"));
            }
            l.clone()
        }
    };
    let order = ranking(scores);
    let mut tp_prefix = Vec::with_capacity(n + 1);
    tp_prefix.push(0usize);
    for &i in &order {
        let last = *tp_prefix.last().expect("seeded");
        tp_prefix.push(last + usize::from(scores[i].label.is_positive()));
    }
    let points: Vec<SweepPoint> = ts.iter().map(|&t| point(t, tp_prefix[t], positives)).collect();
    let mut chosen = 0;
    for (i, p) in points.iter().enumerate() {
        let best = &points[chosen];
        match p.f_score.total_cmp(&best.f_score) {
            Ordering::Greater => chosen = i,
            Ordering::Equal if p.threshold < best.threshold => chosen = i,
            _ => {}
        }
    }
    Ok(SweepCurve {
        points,
        chosen,
        total: n,
        positives,
    })
}

/// `exp` of the mean per-token NLL.
pub fn perplexity_from_scores(scores: &[TokenScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::contract("perplexity of an empty dataset"));
    }
    let total: f64 = scores.iter().map(|s| s.score).sum();
    Ok((total / scores.len() as f64).exp())
}

pub fn perplexity(model: &Model, docs: &[Document]) -> Result<f64> {
    perplexity_from_scores(&score_lm(model, docs)?)
}

/// Dev operating point transferred to a test set of a different size.
pub fn transfer_threshold(dev_t: usize, dev_size: usize, test_size: usize) -> usize {
    let t = (dev_t as f64 * test_size as f64 / dev_size as f64).round() as usize;
    t.clamp(1, test_size.max(1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub model: String,
    /// Test perplexity for language models.
    pub perplexity: Option<f64>,
    pub dev_curve: SweepCurve,
    pub test_threshold: usize,
    pub test_tokens: usize,
    pub test: SweepPoint,
}

impl Report {
    pub fn header() -> &'static str {
        "model\tperplexity\tprecision\trecall\tf_score"
    }

    pub fn row(&self) -> String {
        let ppl = self.perplexity.map_or_else(|| "-".to_string(), |p| p.to_string());
        format!(
            "{}\t{ppl}\t{}\t{}\t{}",
            self.model, self.test.precision, self.test.recall, self.test.f_score
        )
    }

    pub fn to_tsv(&self) -> String {
        format!("{}\n{}\n", Self::header(), self.row())
    }

    /// Dev and test thresholds with their dataset sizes.
    pub fn operating_point_tsv(&self) -> String {
        format!(
            "dev_threshold\tdev_tokens\ttest_threshold\ttest_tokens\n{}\t{}\t{}\t{}\n",
            self.dev_curve.operating_point().threshold,
            self.dev_curve.total,
            self.test_threshold,
            self.test_tokens
        )
    }
}

/// Sweeps the dev set, rescales the chosen threshold to the test size and
/// reports test precision, recall, F-score and (for language models)
/// perplexity.
pub fn evaluate(model: &Model, dev: &[Document], test: &[Document], thresholds: &Thresholds) -> Result<Report> {
    let dev_scores = score(model, dev)?;
    let dev_curve = sweep(&dev_scores, thresholds)?;
    let test_scores = score(model, test)?;
    let test_threshold = transfer_threshold(dev_curve.operating_point().threshold, dev_scores.len(), test_scores.len());
    let test_curve = sweep(&test_scores, &Thresholds::List(vec![test_threshold]))?;
    let perplexity = if model.topology().is_lm() {
        Some(perplexity_from_scores(&test_scores)?)
    } else {
        None
    };
    Ok(Report {
        model: model.config.display_name(),
        perplexity,
        dev_curve,
        test_threshold,
        test_tokens: test_scores.len(),
        test: test_curve.operating_point(),
    })
}
