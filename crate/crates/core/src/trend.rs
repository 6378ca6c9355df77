//! Desk-scale comparison of contextual and sentence-level models on the
//! two-topic corpus.

use log::info;

use crate::corpus::{corrupt_corpus, split_corpus, CorruptionConfig, Vocabulary};
use crate::error::Result;
use crate::evaluation::{evaluate, Thresholds};
use crate::models::{pretrain_sentenc_nmt, Model, ModelConfig, PretrainConfig, SentenceRepr, Topology};
use crate::synthetic::{topic_corpus, TopicCorpusConfig};
use crate::training::{train, TrainConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct TrendConfig {
    pub corpus: TopicCorpusConfig,
    /// Replacements per document.
    pub rate: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub pretrain_epochs: usize,
    pub train: TrainConfig,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            corpus: TopicCorpusConfig::default(),
            rate: 6,
            embed_dim: 16,
            hidden_dim: 32,
            pretrain_epochs: 30,
            train: TrainConfig {
                epochs: 30,
                batch_size: 20,
                lr: 0.01,
                clip: Some(5.0),
                seed: 0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendRow {
    pub topology: Topology,
    /// Dev perplexity or dev loss at the best epoch.
    pub dev_metric: f64,
    pub best_epoch: usize,
    pub test_f: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendResult {
    pub seed: u64,
    /// Baseline LM, context LM, baseline classifier, context classifier.
    pub rows: Vec<TrendRow>,
}

impl TrendResult {
    /// The context LM has strictly lower dev perplexity and strictly higher
    /// test F than the baseline LM.
    pub fn lm_improves(&self) -> bool {
        let (b, c) = (&self.rows[0], &self.rows[1]);
        c.dev_metric < b.dev_metric && c.test_f > b.test_f
    }

    pub fn binclass_improves(&self) -> bool {
        self.rows[3].test_f > self.rows[2].test_f
    }

    pub fn summary(&self) -> String {
        let mut line = format!("seed {}:", self.seed);
        for r in &self.rows {
            line += &format!(
                "  {}: dev {:.3} (ep {}) F {:.3}",
                r.topology, r.dev_metric, r.best_epoch, r.test_f
            );
        }
        line
    }
}

/// Builds, corrupts and splits the corpus for `seed`, pre-trains a
/// translation encoder on copy pairs of the training sentences, then trains
/// and evaluates the four compared models.
///
/// Copy pairs stand in for a parallel corpus: reconstructing its input forces
/// the encoder to keep every token, nouns included, in its final state.
pub fn run_trend(seed: u64, cfg: &TrendConfig) -> Result<TrendResult> {
    let docs = topic_corpus(&TopicCorpusConfig {
        seed,
        ..cfg.corpus.clone()
    })?;
    let vocab = Vocabulary::build(&docs, 1000)?;
    let corruption = CorruptionConfig {
        rate: cfg.rate,
        ..Default::default()
    };
    let (corrupted, _) = corrupt_corpus(&docs, &vocab, &corruption, seed)?;
    let splits = split_corpus(corrupted, seed)?;
    let vocab = Vocabulary::build(&splits.train, 1000)?;
    let tc = TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    let pc = PretrainConfig {
        embed_dim: cfg.embed_dim,
        hidden_dim: cfg.hidden_dim,
        train: TrainConfig {
            epochs: cfg.pretrain_epochs,
            ..tc.clone()
        },
    };
    let pairs: Vec<_> = splits
        .train
        .iter()
        .flat_map(|d| d.sentences.iter().map(|s| (s.clone(), s.clone())))
        .collect();
    let encoder = pretrain_sentenc_nmt(&pairs, &vocab, &vocab, &pc)?.encoder;

    let mut rows = Vec::new();
    for topology in [
        Topology::BaselineLm,
        Topology::ContextLm,
        Topology::BaselineBinclass,
        Topology::ContextBinclass,
    ] {
        let mut mc = ModelConfig::new(topology, vocab.len());
        mc.embed_dim = cfg.embed_dim;
        mc.hidden_dim = cfg.hidden_dim;
        mc.seed = seed;
        mc.sentence_repr = if topology.is_contextual() {
            SentenceRepr::NmtCr
        } else {
            SentenceRepr::None
        };
        let model = Model::new(mc, vocab.clone(), topology.is_contextual().then_some(&encoder))?;
        let out = train(model, &splits.train, &splits.dev, &tc)?;
        out.check()?;
        let best = out.best.to_model()?;
        let report = evaluate(&best, &splits.dev, &splits.test, &Thresholds::All)?;
        let row = TrendRow {
            topology,
            dev_metric: out.metrics[out.best_epoch].dev_metric,
            best_epoch: out.best_epoch,
            test_f: report.test.f_score,
        };
        info!("seed {seed} {topology}: {row:?}");
        rows.push(row);
    }
    Ok(TrendResult { seed, rows })
}
