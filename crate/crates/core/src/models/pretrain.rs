//! Pre-training of the two sentence encoders: a plain sentence-level
//! language model (LM-CR) and a sequence-to-sequence translation model
//! whose source encoder is kept (NMT-CR).

use log::info;
use rand::seq::SliceRandom;

use crate::corpus::{Document, Sentence, Vocabulary, BOS, EOS, PAD};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nn::{Embedding, Linear, LstmCell, LstmState};
use crate::params::{Binding, ParamStore};
use crate::seed;
use crate::training::{apply_gradients, epoch_batches, AdamState, TrainConfig};

use super::config::{ModelConfig, SentenceRepr, Topology};
use super::encoder::{self, SentenceEncoder, ENCODER_PREFIX};
use super::model::Model;

#[derive(Clone, Debug, PartialEq)]
pub struct PretrainConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub train: TrainConfig,
}

#[derive(Clone, Debug)]
pub struct Pretrained {
    pub encoder: SentenceEncoder,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Trains a context-free sentence language model and keeps its embedding
/// and LSTM as an `lm-cr` encoder.
pub fn pretrain_sentenc_lm(train_docs: &[Document], vocab: &Vocabulary, cfg: &PretrainConfig) -> Result<Pretrained> {
    let mut mc = ModelConfig::new(Topology::BaselineLm, vocab.len());
    mc.embed_dim = cfg.embed_dim;
    mc.hidden_dim = cfg.hidden_dim;
    mc.seed = cfg.train.seed;
    let mut model = Model::new(mc, vocab.clone(), None)?;
    let docs = model.prepare(train_docs);
    let trainable = model.trainable();
    let mut adam = AdamState::new(&model.params, cfg.train.lr);
    let mut epoch_losses = Vec::with_capacity(cfg.train.epochs);
    for epoch in 0..cfg.train.epochs {
        let mut total = 0.0;
        let mut active = 0;
        for batch in epoch_batches(&docs, cfg.train.seed, epoch, cfg.train.batch_size) {
            let mut g = Graph::new();
            let mut b = Binding::new(&model.params);
            let (loss, n) = model.batch_loss(&mut g, &mut b, &docs, None, &batch.instances)?;
            let value = finite(g.value(loss).item(), epoch)?;
            g.backward(loss)?;
            let bound = b.finish();
            apply_gradients(&mut model.params, &trainable, &mut adam, cfg.train.clip, &g, &bound)?;
            total += value * n as f64;
            active += n;
        }
        if active == 0 {
            return Err(Error::contract("no training sentences for sentence-encoder pre-training"));
        }
        info!("lm-cr epoch {epoch}: loss {:.6}", total / active as f64);
        epoch_losses.push(total / active as f64);
    }

    let mut params = ParamStore::new();
    for (name, t) in model.params.iter() {
        if let Some(rest) = name.strip_prefix("decoder.") {
            if rest.starts_with("embed.") || rest.starts_with("lstm.") {
                params.add(format!("{ENCODER_PREFIX}.{rest}"), t.clone());
            }
        }
    }
    Ok(Pretrained {
        encoder: SentenceEncoder::from_store(SentenceRepr::LmCr, &params)?,
        epoch_losses,
    })
}

/// Source-encoder / target-decoder translation model. The encoder's final
/// state initializes the decoder.
#[derive(Clone, Debug)]
pub struct Seq2Seq {
    pub params: ParamStore,
    src_embed: Embedding,
    encoder: LstmCell,
    tgt_embed: Embedding,
    decoder: LstmCell,
    head: Linear,
}

impl Seq2Seq {
    pub fn new(src_vocab: usize, tgt_vocab: usize, embed_dim: usize, hidden_dim: usize, seed: u64) -> Self {
        let mut rng = seed::stream(seed, &[seed::INIT, "nmt"]);
        let mut params = ParamStore::new();
        let src_embed = Embedding::new(&mut params, &format!("{ENCODER_PREFIX}.embed"), src_vocab, embed_dim, &mut rng);
        let encoder = LstmCell::new(&mut params, &format!("{ENCODER_PREFIX}.lstm"), embed_dim, hidden_dim, &mut rng);
        let tgt_embed = Embedding::new(&mut params, "target.embed", tgt_vocab, embed_dim, &mut rng);
        let decoder = LstmCell::new(&mut params, "target.lstm", embed_dim, hidden_dim, &mut rng);
        let head = Linear::new(&mut params, "target.head", hidden_dim, tgt_vocab, &mut rng);
        Self {
            params,
            src_embed,
            encoder,
            tgt_embed,
            decoder,
            head,
        }
    }

    /// Mean cross-entropy of `t₁ … tₘ </s>` given the sources; returns the
    /// loss and the number of predicted positions.
    pub fn loss(&self, g: &mut Graph, b: &mut Binding, pairs: &[(&[usize], &[usize])]) -> Result<(crate::graph::Var, usize)> {
        if pairs.iter().any(|(_, t)| t.is_empty()) {
            return Err(Error::contract("empty target sentence"));
        }
        let sources: Vec<&[usize]> = pairs.iter().map(|p| p.0).collect();
        let s0 = encoder::encode_state_in_graph(g, b, &self.src_embed, &self.encoder, &sources)?;
        let mut state = LstmState { h: s0.h, c: s0.c };
        let steps = pairs.iter().map(|p| p.1.len() + 1).max().unwrap_or(0);
        let mut total = None;
        let mut active = 0;
        for t in 0..steps {
            let ids: Vec<usize> = pairs
                .iter()
                .map(|(_, tgt)| match t {
                    0 => BOS,
                    _ => tgt.get(t - 1).copied().unwrap_or(PAD),
                })
                .collect();
            let targets: Vec<Option<usize>> = pairs
                .iter()
                .map(|(_, tgt)| match t.cmp(&tgt.len()) {
                    std::cmp::Ordering::Less => Some(tgt[t]),
                    std::cmp::Ordering::Equal => Some(EOS),
                    std::cmp::Ordering::Greater => None,
                })
                .collect();
            active += targets.iter().flatten().count();
            let x = self.tgt_embed.forward(g, b, &ids)?;
            state = self.decoder.step(g, b, x, &state)?;
            let logits = self.head.forward(g, b, state.h)?;
            let part = g.cross_entropy_sum(logits, &targets)?;
            total = Some(match total {
                None => part,
                Some(acc) => g.add(acc, part)?,
            });
        }
        let total = total.ok_or_else(|| Error::contract("empty batch"))?;
        Ok((g.scale(total, 1.0 / active as f64), active))
    }

    pub fn encoder(&self) -> Result<SentenceEncoder> {
        SentenceEncoder::from_store(SentenceRepr::NmtCr, &self.params)
    }
}

/// Trains a translation model on aligned pairs and keeps its source
/// encoder as an `nmt-cr` encoder. Source ids come from `source_vocab`
/// (the main corpus vocabulary); targets use their own vocabulary.
pub fn pretrain_sentenc_nmt(
    pairs: &[(Sentence, Sentence)],
    source_vocab: &Vocabulary,
    target_vocab: &Vocabulary,
    cfg: &PretrainConfig,
) -> Result<Pretrained> {
    let data: Vec<(Vec<usize>, Vec<usize>)> = pairs
        .iter()
        .map(|(s, t)| {
            (
                s.tokens.iter().map(|w| source_vocab.id(&w.lower)).collect(),
                t.tokens.iter().map(|w| target_vocab.id(&w.lower)).collect(),
            )
        })
        .collect();
    if data.is_empty() {
        return Err(Error::contract("no sentence pairs for translation pre-training"));
    }
    let mut model = Seq2Seq::new(
        source_vocab.len(),
        target_vocab.len(),
        cfg.embed_dim,
        cfg.hidden_dim,
        cfg.train.seed,
    );
    let trainable = vec![true; model.params.len()];
    let mut adam = AdamState::new(&model.params, cfg.train.lr);
    let mut epoch_losses = Vec::with_capacity(cfg.train.epochs);
    for epoch in 0..cfg.train.epochs {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut seed::stream(cfg.train.seed, &[seed::SHUFFLE, "nmt", &epoch.to_string()]));
        let mut total = 0.0;
        let mut active = 0;
        for chunk in order.chunks(cfg.train.batch_size.max(1)) {
            let batch: Vec<(&[usize], &[usize])> = chunk
                .iter()
                .map(|&i| (data[i].0.as_slice(), data[i].1.as_slice()))
                .collect();
            let mut g = Graph::new();
            let mut b = Binding::new(&model.params);
            let (loss, n) = model.loss(&mut g, &mut b, &batch)?;
            let value = finite(g.value(loss).item(), epoch)?;
            g.backward(loss)?;
            let bound = b.finish();
            apply_gradients(&mut model.params, &trainable, &mut adam, cfg.train.clip, &g, &bound)?;
            total += value * n as f64;
            active += n;
        }
        info!("nmt-cr epoch {epoch}: loss {:.6}", total / active as f64);
        epoch_losses.push(total / active as f64);
    }
    Ok(Pretrained {
        encoder: model.encoder()?,
        epoch_losses,
    })
}

fn finite(v: f64, epoch: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("epoch {epoch}: pre-training loss is {v}")))
    }
}
