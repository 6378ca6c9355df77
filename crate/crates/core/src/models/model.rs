use std::collections::HashMap;

use crate::corpus::{Document, Vocabulary, BOS, EOS, PAD};
use crate::error::{Error, Result};
use crate::graph::{Graph, Var};
use crate::nn::{BahdanauAttention, Embedding, Linear, LstmCell, LstmState, Memory};
use crate::params::{Binding, ParamStore};
use crate::seed;
use crate::tensor::{self, Tensor};

use super::config::{ModelConfig, SentenceRepr, Topology};
use super::encoder::{self, SentenceEncoder, ENCODER_PREFIX};

/// A document reduced to vocabulary ids and gold labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedDoc {
    pub id: String,
    pub sentences: Vec<Vec<usize>>,
    pub labels: Vec<Vec<f64>>,
}

impl PreparedDoc {
    pub fn new(doc: &Document, vocab: &Vocabulary) -> Self {
        Self {
            id: doc.id.clone(),
            sentences: doc
                .sentences
                .iter()
                .map(|s| s.tokens.iter().map(|t| vocab.id(&t.lower)).collect())
                .collect(),
            labels: doc
                .sentences
                .iter()
                .map(|s| s.tokens.iter().map(|t| t.label.as_f64()).collect())
                .collect(),
        }
    }
}

/// One sentence of one prepared document.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub doc: usize,
    pub sentence: usize,
}

/// Precomputed `H(s)` for every sentence of a set of documents, indexed
/// `[doc][sentence]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReprCache {
    pub reprs: Vec<Vec<Vec<f64>>>,
}

/// Context summary of the sentences preceding `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextVector {
    pub c: Tensor,
    /// Sentence indices that fed the context-level LSTM.
    pub window: std::ops::Range<usize>,
    /// Per-step context-LSTM hidden states (the attention memory).
    pub states: Vec<Vec<f64>>,
}

/// Per-position outputs of a language-model decoder over `<s> w₁ … wₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LmOutput {
    /// Row `t` is the distribution over the token following position `t`.
    pub distributions: Vec<Vec<f64>>,
    /// `-ln P` of `w₁ … wₙ </s>`.
    pub token_nll: Vec<f64>,
    pub total_nll: f64,
    /// Attention weights per decoder step, for the attention topology.
    pub attention: Vec<Vec<f64>>,
}

enum Conditioning {
    Zero,
    Init(Var),
    Attend { memory: Memory, h0: Var },
}

struct Decoded {
    logits: Vec<Var>,
    attention: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub params: ParamStore,
    embed: Embedding,
    decoder: LstmCell,
    head: Linear,
    context: Option<LstmCell>,
    attention: Option<BahdanauAttention>,
    encoder: Option<(Embedding, LstmCell)>,
}

impl Model {
    /// Builds a freshly initialized model. Contextual topologies copy the
    /// encoder's parameters in under the `sentenc.` prefix.
    pub fn new(config: ModelConfig, vocab: Vocabulary, encoder: Option<&SentenceEncoder>) -> Result<Self> {
        config.validate()?;
        if vocab.len() != config.vocab_size {
            return Err(Error::Config(format!(
                "configured vocabulary size {} differs from vocabulary with {} entries",
                config.vocab_size,
                vocab.len()
            )));
        }
        let mut rng = seed::stream(config.seed, &[seed::INIT]);
        let mut params = ParamStore::new();
        let (d, h, v) = (config.embed_dim, config.hidden_dim, config.vocab_size);
        let out = if config.topology.is_lm() { v } else { 1 };
        let dec_in = if config.topology == Topology::ContextAttnLm {
            d + h
        } else {
            d
        };
        Embedding::new(&mut params, "decoder.embed", v, d, &mut rng);
        LstmCell::new(&mut params, "decoder.lstm", dec_in, h, &mut rng);
        Linear::new(&mut params, "head", h, out, &mut rng);

        match (config.topology.is_contextual(), encoder) {
            (false, Some(_)) => {
                return Err(Error::Config(format!(
                    "topology {} takes no sentence encoder",
                    config.topology
                )))
            }
            (true, None) => {
                return Err(Error::Config(format!(
                    "topology {} needs a pre-trained sentence encoder",
                    config.topology
                )))
            }
            (true, Some(enc)) => {
                if enc.tag != config.sentence_repr {
                    return Err(Error::Config(format!(
                        "sentence encoder is tagged {} but the configuration asks for {}",
                        enc.tag, config.sentence_repr
                    )));
                }
                if enc.vocab_size() != v {
                    return Err(Error::Config(format!(
                        "sentence encoder vocabulary has {} entries, model has {v}",
                        enc.vocab_size()
                    )));
                }
                LstmCell::new(&mut params, "context.lstm", enc.hidden_dim(), h, &mut rng);
                if config.topology == Topology::ContextAttnLm {
                    BahdanauAttention::new(&mut params, "attention", h, h, h, &mut rng);
                }
                for (name, t) in enc.params.iter() {
                    params.add(name, t.clone());
                }
            }
            (false, None) => {}
        }
        Self::from_params(config, vocab, params)
    }

    /// Re-attaches a model to a complete parameter set.
    pub fn from_params(config: ModelConfig, vocab: Vocabulary, params: ParamStore) -> Result<Self> {
        config.validate()?;
        let missing = |n: &str| Error::format("parameter set", format!("missing {n}"));
        let table = params
            .id("decoder.embed.table")
            .ok_or_else(|| missing("decoder.embed.table"))?;
        let embed = Embedding::from_param(&params, table);
        let decoder = LstmCell::from_store(&params, "decoder.lstm")?;
        let head = Linear::from_params(
            &params,
            params.id("head.weight").ok_or_else(|| missing("head.weight"))?,
            params.id("head.bias").ok_or_else(|| missing("head.bias"))?,
        );
        let contextual = config.topology.is_contextual();
        let context = contextual
            .then(|| LstmCell::from_store(&params, "context.lstm"))
            .transpose()?;
        let attention = (config.topology == Topology::ContextAttnLm)
            .then(|| BahdanauAttention::from_store(&params, "attention"))
            .transpose()?;
        let encoder = contextual.then(|| encoder::handles(&params)).transpose()?;

        let expected_out = if config.topology.is_lm() {
            config.vocab_size
        } else {
            1
        };
        if embed.vocab_size != config.vocab_size
            || embed.embed_dim != config.embed_dim
            || decoder.hidden_dim != config.hidden_dim
            || head.out_dim != expected_out
            || vocab.len() != config.vocab_size
        {
            return Err(Error::format(
                "parameter set",
                "tensor shapes do not match the model configuration",
            ));
        }
        Ok(Self {
            config,
            vocab,
            params,
            embed,
            decoder,
            head,
            context,
            attention,
            encoder,
        })
    }

    pub fn topology(&self) -> Topology {
        self.config.topology
    }

    /// Which parameters the optimizer may update; the sentence encoder is
    /// frozen unless fine-tuning is configured.
    pub fn trainable(&self) -> Vec<bool> {
        self.params
            .ids()
            .map(|id| {
                self.config.finetune_encoder || !self.params.name(id).starts_with(&format!("{ENCODER_PREFIX}."))
            })
            .collect()
    }

    /// The embedded sentence encoder with its current parameters.
    pub fn sentence_encoder(&self) -> Option<SentenceEncoder> {
        self.encoder.as_ref()?;
        SentenceEncoder::from_store(self.config.sentence_repr, &self.params).ok()
    }

    /// Sets the output projection to zero, making every prediction
    /// uniform (language models) or 0.5 (classifiers).
    pub fn zero_head(&mut self) {
        self.head.zero(&mut self.params);
    }

    /// Copies every parameter of `other` whose name and shape match one of
    /// ours. Returns how many tensors were copied.
    pub fn copy_shared_from(&mut self, other: &Model) -> usize {
        let mut copied = 0;
        for (name, t) in other.params.iter() {
            if let Some(id) = self.params.id(name) {
                if self.params.get(id).shape() == t.shape() {
                    self.params
                        .set_data(id, t.data())
                        .expect("shapes checked");
                    copied += 1;
                }
            }
        }
        copied
    }

    pub fn prepare(&self, docs: &[Document]) -> Vec<PreparedDoc> {
        docs.iter().map(|d| PreparedDoc::new(d, &self.vocab)).collect()
    }

    /// Precomputes sentence representations when the encoder is frozen.
    /// Fine-tuned and baseline models return `None`.
    pub fn sentence_cache(&self, docs: &[PreparedDoc]) -> Result<Option<ReprCache>> {
        if self.encoder.is_none() || self.config.finetune_encoder {
            return Ok(None);
        }
        let enc = self.sentence_encoder().expect("contextual model has an encoder");
        let mut reprs = Vec::with_capacity(docs.len());
        for d in docs {
            let seqs: Vec<&[usize]> = d.sentences.iter().map(Vec::as_slice).collect();
            let mut rows = Vec::with_capacity(seqs.len());
            for chunk in seqs.chunks(256) {
                rows.extend(enc.encode_batch(chunk)?);
            }
            reprs.push(rows);
        }
        Ok(Some(ReprCache { reprs }))
    }

    fn window(&self, j: usize) -> std::ops::Range<usize> {
        j.saturating_sub(self.config.context_window)..j
    }

    /// Context-level LSTM over each instance's window of sentence
    /// representations. Windows are left-padded so that every row ends on
    /// its last real sentence. Returns the final states and the per-step
    /// states with their validity mask `[batch × steps]`.
    fn context_states(
        &self,
        g: &mut Graph,
        b: &mut Binding,
        docs: &[PreparedDoc],
        cache: Option<&ReprCache>,
        batch: &[Instance],
    ) -> Result<(Var, Vec<Var>, Vec<bool>)> {
        let cell = self.context.as_ref().expect("contextual topology");
        let hidden = self.config.hidden_dim;
        let windows: Vec<_> = batch.iter().map(|i| self.window(i.sentence)).collect();
        let longest = windows.iter().map(|w| w.len()).max().unwrap_or(0);
        if longest == 0 {
            let z = g.leaf(&Tensor::zeros(&[batch.len(), hidden]));
            return Ok((z, vec![z], vec![true; batch.len()]));
        }

        // Every sentence that appears in some window, encoded once.
        let mut rows: HashMap<(usize, usize), usize> = HashMap::new();
        let mut order = Vec::new();
        for (inst, w) in batch.iter().zip(&windows) {
            for s in w.clone() {
                rows.entry((inst.doc, s)).or_insert_with(|| {
                    order.push((inst.doc, s));
                    order.len() - 1
                });
            }
        }
        let encoded = match cache {
            Some(c) => {
                let data: Vec<Vec<f64>> = order.iter().map(|&(d, s)| c.reprs[d][s].clone()).collect();
                g.leaf_owned(Tensor::from_rows(&data)?)
            }
            None => {
                let (emb, lstm) = self.encoder.as_ref().expect("contextual topology");
                let seqs: Vec<&[usize]> = order
                    .iter()
                    .map(|&(d, s)| docs[d].sentences[s].as_slice())
                    .collect();
                encoder::encode_in_graph(g, b, emb, lstm, &seqs)?
            }
        };

        let mut state = LstmState::zeros(g, batch.len(), hidden);
        let mut slots = Vec::with_capacity(longest);
        let mut valid = vec![false; batch.len() * longest];
        for k in 0..longest {
            let mut ids = Vec::with_capacity(batch.len());
            let mut mask = Vec::with_capacity(batch.len());
            for (r, (inst, w)) in batch.iter().zip(&windows).enumerate() {
                let offset = longest - w.len();
                if k >= offset {
                    ids.push(rows[&(inst.doc, w.start + k - offset)]);
                    mask.push(1.0);
                    valid[r * longest + k] = true;
                } else {
                    ids.push(0);
                    mask.push(0.0);
                }
            }
            let x = g.gather_rows(encoded, &ids)?;
            state = cell.step_masked(g, b, x, &state, &mask)?;
            slots.push(state.h);
        }
        // A row with an empty window attends to a single zero state.
        for (r, w) in windows.iter().enumerate() {
            if w.is_empty() {
                valid[r * longest + longest - 1] = true;
            }
        }
        Ok((state.h, slots, valid))
    }

    fn condition(
        &self,
        g: &mut Graph,
        b: &mut Binding,
        docs: &[PreparedDoc],
        cache: Option<&ReprCache>,
        batch: &[Instance],
        zero_context: bool,
    ) -> Result<Conditioning> {
        let hidden = self.config.hidden_dim;
        match self.config.topology {
            Topology::BaselineLm | Topology::BaselineBinclass => Ok(Conditioning::Zero),
            Topology::ContextLm | Topology::ContextBinclass => {
                let h0 = if zero_context {
                    g.leaf(&Tensor::zeros(&[batch.len(), hidden]))
                } else {
                    self.context_states(g, b, docs, cache, batch)?.0
                };
                Ok(Conditioning::Init(h0))
            }
            Topology::ContextAttnLm => {
                let (h0, slots, mask) = if zero_context {
                    let z = g.leaf(&Tensor::zeros(&[batch.len(), hidden]));
                    (z, vec![z], vec![true; batch.len()])
                } else {
                    self.context_states(g, b, docs, cache, batch)?
                };
                let attn = self.attention.as_ref().expect("attention topology");
                let memory = attn.prepare(g, b, slots, mask)?;
                Ok(Conditioning::Attend { memory, h0 })
            }
        }
    }

    /// Decoder inputs for one sentence: `<s> w₁ … wₙ` for language models,
    /// `w₁ … wₙ` for classifiers.
    fn inputs(&self, ids: &[usize]) -> Vec<usize> {
        if self.config.topology.is_lm() {
            std::iter::once(BOS).chain(ids.iter().copied()).collect()
        } else {
            ids.to_vec()
        }
    }

    fn decode(&self, g: &mut Graph, b: &mut Binding, seqs: &[&[usize]], cond: Conditioning) -> Result<Decoded> {
        if seqs.iter().any(|s| s.is_empty()) {
            return Err(Error::contract("cannot decode an empty sentence"));
        }
        let inputs: Vec<Vec<usize>> = seqs.iter().map(|s| self.inputs(s)).collect();
        let steps = inputs.iter().map(Vec::len).max().unwrap_or(0);
        let batch = seqs.len();
        let (mut state, memory) = match cond {
            Conditioning::Zero => (LstmState::zeros(g, batch, self.config.hidden_dim), None),
            Conditioning::Init(h0) => (LstmState::from_hidden(g, h0), None),
            Conditioning::Attend { memory, h0 } => (LstmState::from_hidden(g, h0), Some(memory)),
        };
        let mut logits = Vec::with_capacity(steps);
        let mut attention = Vec::new();
        for t in 0..steps {
            let ids: Vec<usize> = inputs.iter().map(|s| s.get(t).copied().unwrap_or(PAD)).collect();
            let mut x = self.embed.forward(g, b, &ids)?;
            if let Some(mem) = &memory {
                let attn = self.attention.as_ref().expect("attention topology");
                let (ctx, w) = attn.attend_batched(g, b, mem, state.h)?;
                attention.push(w);
                x = g.concat_cols(&[x, ctx])?;
            }
            state = self.decoder.step(g, b, x, &state)?;
            logits.push(self.head.forward(g, b, state.h)?);
        }
        Ok(Decoded { logits, attention })
    }

    fn check_batch(&self, docs: &[PreparedDoc], batch: &[Instance]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::contract("empty batch"));
        }
        for i in batch {
            let bound = docs.get(i.doc).map_or(0, |d| d.sentences.len());
            if i.sentence >= bound {
                return Err(Error::Index {
                    op: "instance",
                    index: i.sentence,
                    bound,
                });
            }
        }
        Ok(())
    }

    /// Mean training loss over the active positions of `batch`: token
    /// cross-entropy of `w₁ … wₙ </s>` for language models, binary
    /// cross-entropy of the labels for classifiers. Returns the loss and
    /// the number of active positions.
    pub fn batch_loss(
        &self,
        g: &mut Graph,
        b: &mut Binding,
        docs: &[PreparedDoc],
        cache: Option<&ReprCache>,
        batch: &[Instance],
    ) -> Result<(Var, usize)> {
        self.check_batch(docs, batch)?;
        let cond = self.condition(g, b, docs, cache, batch, false)?;
        let seqs: Vec<&[usize]> = batch
            .iter()
            .map(|i| docs[i.doc].sentences[i.sentence].as_slice())
            .collect();
        let out = self.decode(g, b, &seqs, cond)?;
        let mut total = None;
        let mut active = 0;
        for (t, &logits) in out.logits.iter().enumerate() {
            let part = if self.config.topology.is_lm() {
                let targets: Vec<Option<usize>> = seqs
                    .iter()
                    .map(|s| match t.cmp(&s.len()) {
                        std::cmp::Ordering::Less => Some(s[t]),
                        std::cmp::Ordering::Equal => Some(EOS),
                        std::cmp::Ordering::Greater => None,
                    })
                    .collect();
                active += targets.iter().flatten().count();
                g.cross_entropy_sum(logits, &targets)?
            } else {
                let targets: Vec<Option<f64>> = batch
                    .iter()
                    .map(|i| docs[i.doc].labels[i.sentence].get(t).copied())
                    .collect();
                active += targets.iter().flatten().count();
                g.bce_with_logits_sum(logits, &targets)?
            };
            total = Some(match total {
                None => part,
                Some(acc) => g.add(acc, part)?,
            });
        }
        let total = total.expect("nonempty sentences");
        Ok((g.scale(total, 1.0 / active as f64), active))
    }

    /// Per-token scores for each instance: `-ln P(w_t | w_<t, C)` for
    /// language models, `P(out-of-context)` for classifiers. Framing
    /// positions are not scored. With `zero_context` the context vector is
    /// forced to zero.
    pub fn score_batch(
        &self,
        docs: &[PreparedDoc],
        cache: Option<&ReprCache>,
        batch: &[Instance],
        zero_context: bool,
    ) -> Result<Vec<Vec<f64>>> {
        self.check_batch(docs, batch)?;
        let mut g = Graph::new();
        let mut b = Binding::new(&self.params);
        let cond = self.condition(&mut g, &mut b, docs, cache, batch, zero_context)?;
        let seqs: Vec<&[usize]> = batch
            .iter()
            .map(|i| docs[i.doc].sentences[i.sentence].as_slice())
            .collect();
        let out = self.decode(&mut g, &mut b, &seqs, cond)?;
        let cols = g.shape(out.logits[0])[1];
        Ok(seqs
            .iter()
            .enumerate()
            .map(|(r, s)| {
                (0..s.len())
                    .map(|t| {
                        let row = &g.data(out.logits[t])[r * cols..(r + 1) * cols];
                        if self.config.topology.is_lm() {
                            -tensor::log_softmax(row)[s[t]]
                        } else {
                            tensor::sigmoid(row[0])
                        }
                    })
                    .collect()
            })
            .collect())
    }

    fn single_doc(&self, ids: &[usize]) -> [PreparedDoc; 1] {
        [PreparedDoc {
            id: String::new(),
            sentences: vec![ids.to_vec()],
            labels: vec![vec![0.0; ids.len()]],
        }]
    }

    fn lm_output(&self, g: &Graph, ids: &[usize], out: &Decoded) -> LmOutput {
        let mut distributions = Vec::with_capacity(out.logits.len());
        let mut token_nll = Vec::with_capacity(out.logits.len());
        for (t, &l) in out.logits.iter().enumerate() {
            let lp = tensor::log_softmax(g.data(l));
            let target = ids.get(t).copied().unwrap_or(EOS);
            token_nll.push(-lp[target]);
            distributions.push(lp.iter().map(|v| v.exp()).collect());
        }
        LmOutput {
            distributions,
            total_nll: token_nll.iter().sum(),
            token_nll,
            attention: out.attention.iter().map(|&w| g.data(w).to_vec()).collect(),
        }
    }

    fn require_lm(&self, op: &str) -> Result<()> {
        if !self.config.topology.is_lm() {
            return Err(Error::contract(format!("{op} needs a language-model topology, got {}", self.config.topology)));
        }
        Ok(())
    }
}

/// `H(s)` of a single sentence.
pub fn encode_sentence(enc: &SentenceEncoder, ids: &[usize]) -> Result<Tensor> {
    enc.encode_sentence(ids)
}

/// Runs the context-level LSTM over sentences `max(0, j−p) .. j−1` of
/// `doc`; `j = 0` yields the zero vector.
pub fn encode_context(model: &Model, doc: &PreparedDoc, j: usize) -> Result<ContextVector> {
    if !model.config.topology.is_contextual() {
        return Err(Error::contract(format!("topology {} has no context encoder", model.config.topology)));
    }
    if j >= doc.sentences.len() {
        return Err(Error::Index {
            op: "encode_context",
            index: j,
            bound: doc.sentences.len(),
        });
    }
    let window = model.window(j);
    let hidden = model.config.hidden_dim;
    if window.is_empty() {
        return Ok(ContextVector {
            c: Tensor::zeros(&[hidden]),
            window,
            states: Vec::new(),
        });
    }
    let mut g = Graph::new();
    let mut b = Binding::new(&model.params);
    let docs = std::slice::from_ref(doc);
    let (h, slots, _) = model.context_states(&mut g, &mut b, docs, None, &[Instance { doc: 0, sentence: j }])?;
    Ok(ContextVector {
        c: Tensor::vector(g.data(h).to_vec()),
        window,
        states: slots.iter().map(|&s| g.data(s).to_vec()).collect(),
    })
}

/// Language-model pass over `<s> w₁ … wₙ`. Contextual topologies start the
/// decoder from `h₀ = C`; the baseline ignores the context.
pub fn lm_forward(model: &Model, ids: &[usize], context: &ContextVector) -> Result<LmOutput> {
    model.require_lm("lm_forward")?;
    if model.config.topology == Topology::ContextAttnLm {
        return attn_lm_forward(model, ids, &context.states);
    }
    let mut g = Graph::new();
    let mut b = Binding::new(&model.params);
    let cond = context_init(model, &mut g, context)?;
    let out = model.decode(&mut g, &mut b, &[ids], cond)?;
    Ok(model.lm_output(&g, ids, &out))
}

/// Attention language model over the memory `encoder_states` (one row per
/// context step). An empty memory becomes a single zero row.
pub fn attn_lm_forward(model: &Model, ids: &[usize], encoder_states: &[Vec<f64>]) -> Result<LmOutput> {
    if model.config.topology != Topology::ContextAttnLm {
        return Err(Error::contract(format!(
            "attn_lm_forward needs the context-attn-lm topology, got {}",
            model.config.topology
        )));
    }
    let hidden = model.config.hidden_dim;
    if let Some(bad) = encoder_states.iter().find(|r| r.len() != hidden) {
        return Err(Error::Dimension {
            op: "attn_lm_forward",
            left: vec![bad.len()],
            right: vec![hidden],
        });
    }
    let mut g = Graph::new();
    let mut b = Binding::new(&model.params);
    let slots: Vec<Var> = if encoder_states.is_empty() {
        vec![g.leaf(&Tensor::zeros(&[1, hidden]))]
    } else {
        encoder_states
            .iter()
            .map(|r| g.leaf_owned(Tensor::new(&[1, hidden], r.clone()).expect("checked width")))
            .collect()
    };
    let h0 = *slots.last().expect("nonempty memory");
    let attn = model.attention.as_ref().expect("attention topology");
    let n = slots.len();
    let memory = attn.prepare(&mut g, &mut b, slots, vec![true; n])?;
    let out = model.decode(&mut g, &mut b, &[ids], Conditioning::Attend { memory, h0 })?;
    Ok(model.lm_output(&g, ids, &out))
}

/// Per-token `P(out-of-context)` of a classifier topology.
pub fn binclass_forward(model: &Model, ids: &[usize], context: &ContextVector) -> Result<Vec<f64>> {
    if model.config.topology.is_lm() {
        return Err(Error::contract(format!(
            "binclass_forward needs a classifier topology, got {}",
            model.config.topology
        )));
    }
    let mut g = Graph::new();
    let mut b = Binding::new(&model.params);
    let cond = context_init(model, &mut g, context)?;
    let out = model.decode(&mut g, &mut b, &[ids], cond)?;
    Ok(out.logits.iter().map(|&l| tensor::sigmoid(g.data(l)[0])).collect())
}

fn context_init(model: &Model, g: &mut Graph, context: &ContextVector) -> Result<Conditioning> {
    if !model.config.topology.is_contextual() {
        return Ok(Conditioning::Zero);
    }
    let hidden = model.config.hidden_dim;
    if context.c.numel() != hidden {
        return Err(Error::Dimension {
            op: "context",
            left: context.c.shape().to_vec(),
            right: vec![hidden],
        });
    }
    Ok(Conditioning::Init(g.leaf_owned(Tensor::new(&[1, hidden], context.c.data().to_vec())?)))
}

impl Model {
    /// Context vector for sentence `j` of `doc`, for use with the
    /// single-sentence forward functions.
    pub fn context_for(&self, doc: &PreparedDoc, j: usize) -> Result<ContextVector> {
        if self.config.topology.is_contextual() {
            encode_context(self, doc, j)
        } else {
            Ok(ContextVector {
                c: Tensor::zeros(&[self.config.hidden_dim]),
                window: j..j,
                states: Vec::new(),
            })
        }
    }

    pub fn sentence_repr(&self) -> SentenceRepr {
        self.config.sentence_repr
    }

    /// One-document convenience for [`Model::score_batch`].
    pub fn score_sentence(&self, ids: &[usize]) -> Result<Vec<f64>> {
        let docs = self.single_doc(ids);
        Ok(self
            .score_batch(&docs, None, &[Instance { doc: 0, sentence: 0 }], false)?
            .remove(0))
    }
}
