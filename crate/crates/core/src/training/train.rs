use std::fmt::Write as _;

use log::{info, warn};
use rand::seq::SliceRandom;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::models::{Instance, Model, PreparedDoc, ReprCache};
use crate::params::{Binding, BoundParams, ParamStore};
use crate::seed;

use super::adam::{adam_step, AdamState};
use super::checkpoint::Checkpoint;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Global gradient-norm clip.
    pub clip: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 100,
            lr: 0.001,
            clip: None,
            seed: 0,
        }
    }
}

/// Sentence instances of one mini-batch plus the mask of active token
/// positions, `mask[r][t]` for `t` below the longest sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub instances: Vec<Instance>,
    pub mask: Vec<Vec<bool>>,
}

impl Batch {
    pub fn new(docs: &[PreparedDoc], instances: Vec<Instance>) -> Self {
        let lens: Vec<usize> = instances
            .iter()
            .map(|i| docs[i.doc].sentences[i.sentence].len())
            .collect();
        let width = lens.iter().copied().max().unwrap_or(0);
        let mask = lens.iter().map(|&n| (0..width).map(|t| t < n).collect()).collect();
        Self { instances, mask }
    }

    pub fn width(&self) -> usize {
        self.mask.first().map_or(0, Vec::len)
    }

    pub fn active(&self) -> usize {
        self.mask.iter().flatten().filter(|&&m| m).count()
    }
}

/// Every sentence of `docs` in document order.
pub fn instances(docs: &[PreparedDoc]) -> Vec<Instance> {
    docs.iter()
        .enumerate()
        .flat_map(|(d, doc)| (0..doc.sentences.len()).map(move |s| Instance { doc: d, sentence: s }))
        .collect()
}

/// Shuffles with the stream of `(seed, shuffle, epoch)` and cuts batches.
pub fn epoch_batches(docs: &[PreparedDoc], seed: u64, epoch: usize, batch_size: usize) -> Vec<Batch> {
    let mut all = instances(docs);
    let mut rng = seed::stream(seed, &[seed::SHUFFLE, &epoch.to_string()]);
    all.shuffle(&mut rng);
    all.chunks(batch_size.max(1))
        .map(|c| Batch::new(docs, c.to_vec()))
        .collect()
}

/// Moves the gradients of one backward pass into the store, optionally
/// clips them, and applies one Adam update.
pub fn apply_gradients(
    params: &mut ParamStore,
    trainable: &[bool],
    adam: &mut AdamState,
    clip: Option<f64>,
    g: &Graph,
    bound: &BoundParams,
) -> Result<()> {
    params.zero_grad();
    params.accumulate(g, bound);
    if let Some(c) = clip {
        params.clip_grad_norm(c);
    }
    adam_step(params, adam, trainable)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    /// Dev perplexity for language models, dev loss for classifiers.
    pub dev_metric: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Checkpoint with the best dev metric seen.
    pub best: Checkpoint,
    pub best_epoch: usize,
    /// State after the last completed epoch.
    pub last: Checkpoint,
    pub metrics: Vec<EpochMetrics>,
    /// Set when training stopped on a non-finite loss or gradient.
    pub divergence: Option<String>,
}

impl TrainOutcome {
    /// `Err(Numeric)` if training diverged.
    pub fn check(&self) -> Result<()> {
        match &self.divergence {
            Some(m) => Err(Error::Numeric(m.clone())),
            None => Ok(()),
        }
    }

    /// Tab-separated `epoch  train_loss  dev_metric` lines.
    pub fn log_tsv(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tdev_metric\n");
        for m in &self.metrics {
            let _ = writeln!(out, "{}\t{}\t{}", m.epoch, m.train_loss, m.dev_metric);
        }
        out
    }
}

/// Dev perplexity (language models, over real tokens) or mean dev binary
/// cross-entropy (classifiers).
pub fn dev_metric(model: &Model, docs: &[PreparedDoc], cache: Option<&ReprCache>) -> Result<f64> {
    let all = instances(docs);
    if all.is_empty() {
        return Err(Error::contract("dev set is empty"));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for chunk in all.chunks(100) {
        if model.topology().is_lm() {
            for row in model.score_batch(docs, cache, chunk, false)? {
                total += row.iter().sum::<f64>();
                count += row.len();
            }
        } else {
            let mut g = Graph::new();
            let mut b = Binding::new(&model.params);
            let (loss, n) = model.batch_loss(&mut g, &mut b, docs, cache, chunk)?;
            total += g.value(loss).item() * n as f64;
            count += n;
        }
    }
    let mean = total / count as f64;
    Ok(if model.topology().is_lm() { mean.exp() } else { mean })
}

fn run_epoch(
    model: &mut Model,
    adam: &mut AdamState,
    trainable: &[bool],
    docs: &[PreparedDoc],
    cache: Option<&ReprCache>,
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<f64> {
    let mut total = 0.0;
    let mut active = 0usize;
    for batch in epoch_batches(docs, cfg.seed, epoch, cfg.batch_size) {
        let mut g = Graph::new();
        let mut b = Binding::new(&model.params);
        let (loss, n) = model.batch_loss(&mut g, &mut b, docs, cache, &batch.instances)?;
        let value = g.value(loss).item();
        if !value.is_finite() {
            return Err(Error::Numeric(format!("epoch {epoch}: training loss is {value}")));
        }
        g.backward(loss)?;
        let bound = b.finish();
        apply_gradients(&mut model.params, trainable, adam, cfg.clip, &g, &bound)?;
        total += value * n as f64;
        active += n;
    }
    Ok(total / active.max(1) as f64)
}

/// Trains `model` on `train_docs`, evaluating on `dev_docs` after every
/// epoch and keeping the best checkpoint (lowest dev perplexity or loss).
/// A non-finite loss stops training; the outcome then carries the
/// divergence message and the best checkpoint so far.
pub fn train(model: Model, train_docs: &[Document], dev_docs: &[Document], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let adam = AdamState::new(&model.params, cfg.lr);
    train_from(model, adam, 0, train_docs, dev_docs, cfg)
}

/// Continues training from a checkpoint's parameters, optimizer state and
/// epoch counter up to `cfg.epochs` total epochs.
pub fn resume(ckpt: &Checkpoint, train_docs: &[Document], dev_docs: &[Document], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let model = ckpt.to_model()?;
    let adam = ckpt
        .adam
        .clone()
        .unwrap_or_else(|| AdamState::new(&model.params, cfg.lr));
    train_from(model, adam, ckpt.epoch, train_docs, dev_docs, cfg)
}

fn train_from(
    mut model: Model,
    mut adam: AdamState,
    start_epoch: usize,
    train_docs: &[Document],
    dev_docs: &[Document],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if dev_docs.is_empty() {
        return Err(Error::contract("dev set is empty"));
    }
    let train = model.prepare(train_docs);
    let dev = model.prepare(dev_docs);
    if instances(&train).is_empty() {
        return Err(Error::contract("training set is empty"));
    }
    // The frozen encoder never changes, so its sentence vectors are
    // computed once.
    let train_cache = model.sentence_cache(&train)?;
    let dev_cache = model.sentence_cache(&dev)?;
    let trainable = model.trainable();

    let mut metrics = Vec::new();
    let mut best: Option<(f64, Checkpoint, usize)> = None;
    let mut divergence = None;
    for epoch in start_epoch..cfg.epochs {
        let train_loss = match run_epoch(&mut model, &mut adam, &trainable, &train, train_cache.as_ref(), cfg, epoch) {
            Ok(l) => l,
            Err(Error::Numeric(m)) => {
                warn!("training diverged: {m}");
                divergence = Some(m);
                break;
            }
            Err(e) => return Err(e),
        };
        let dev_metric = dev_metric(&model, &dev, dev_cache.as_ref())?;
        info!(
            "{} epoch {epoch}: train loss {train_loss:.6}, dev {} {dev_metric:.6}",
            model.topology(),
            if model.topology().is_lm() { "perplexity" } else { "loss" }
        );
        if !dev_metric.is_finite() {
            divergence = Some(format!("epoch {epoch}: dev metric is {dev_metric}"));
            break;
        }
        metrics.push(EpochMetrics {
            epoch,
            train_loss,
            dev_metric,
        });
        if best.as_ref().is_none_or(|(m, _, _)| dev_metric < *m) {
            best = Some((dev_metric, Checkpoint::from_model(&model, Some(adam.clone()), epoch + 1), epoch));
        }
    }
    let last_epoch = start_epoch + metrics.len();
    let last = Checkpoint::from_model(&model, Some(adam), last_epoch);
    let (best, best_epoch) = match best {
        Some((_, c, e)) => (c, e),
        None => (last.clone(), last_epoch),
    };
    Ok(TrainOutcome {
        best,
        best_epoch,
        last,
        metrics,
        divergence,
    })
}
