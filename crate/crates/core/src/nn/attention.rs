use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Var};
use crate::params::{Binding, ParamId, ParamStore};

/// Additive attention: `e_i = vᵀ tanh(W_enc·mem_i + W_dec·query)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BahdanauAttention {
    pub w_enc: ParamId,
    pub w_dec: ParamId,
    pub v: ParamId,
    pub memory_dim: usize,
    pub query_dim: usize,
    pub attn_dim: usize,
}

/// Batched attention memory: `slots[k]` is `[batch × memory_dim]` and
/// `mask[r * slots.len() + k]` says whether slot `k` exists for row `r`.
#[derive(Clone, Debug)]
pub struct Memory {
    slots: Vec<Var>,
    projected: Vec<Var>,
    mask: Vec<bool>,
    batch: usize,
}

impl Memory {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

impl BahdanauAttention {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        memory_dim: usize,
        query_dim: usize,
        attn_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let w_enc = store.add_uniform(format!("{name}.w_enc"), &[memory_dim, attn_dim], rng);
        let w_dec = store.add_uniform(format!("{name}.w_dec"), &[query_dim, attn_dim], rng);
        let v = store.add_uniform(format!("{name}.v"), &[attn_dim, 1], rng);
        Self {
            w_enc,
            w_dec,
            v,
            memory_dim,
            query_dim,
            attn_dim,
        }
    }

    pub fn from_store(store: &ParamStore, name: &str) -> Result<Self> {
        let get = |part: &str| {
            store
                .id(&format!("{name}.{part}"))
                .ok_or_else(|| Error::format("parameter set", format!("missing {name}.{part}")))
        };
        let (w_enc, w_dec, v) = (get("w_enc")?, get("w_dec")?, get("v")?);
        let es = store.get(w_enc).shape();
        let ds = store.get(w_dec).shape();
        Ok(Self {
            w_enc,
            w_dec,
            v,
            memory_dim: es[0],
            query_dim: ds[0],
            attn_dim: es[1],
        })
    }

    /// Single-query attention over the rows of `memory[m × memory_dim]`.
    /// Returns the context `[memory_dim]` and weights `[m]`.
    pub fn attend(&self, g: &mut Graph, b: &mut Binding, memory: Var, query: Var) -> Result<(Var, Var)> {
        let ms = g.shape(memory).to_vec();
        if ms.len() != 2 || ms[1] != self.memory_dim {
            return Err(Error::Dimension {
                op: "attend",
                left: ms,
                right: vec![self.memory_dim],
            });
        }
        let q = g.reshape(query, &[1, self.query_dim])?;
        let we = b.var(g, self.w_enc);
        let wd = b.var(g, self.w_dec);
        let v = b.var(g, self.v);
        let keys = g.matmul(memory, we)?;
        let qp = g.matmul(q, wd)?;
        let qp = g.reshape(qp, &[self.attn_dim])?;
        let pre = g.add_bias(keys, qp)?;
        let act = g.tanh(pre);
        let scores = g.matmul(act, v)?;
        let scores = g.reshape(scores, &[1, ms[0]])?;
        let weights = g.softmax_rows(scores)?;
        let ctx = g.matmul(weights, memory)?;
        let ctx = g.reshape(ctx, &[self.memory_dim])?;
        let weights = g.reshape(weights, &[ms[0]])?;
        Ok((ctx, weights))
    }

    /// Projects memory slots once so repeated queries reuse the keys.
    pub fn prepare(&self, g: &mut Graph, b: &mut Binding, slots: Vec<Var>, mask: Vec<bool>) -> Result<Memory> {
        let first = *slots
            .first()
            .ok_or_else(|| Error::contract("attention memory must have at least one slot"))?;
        let batch = g.shape(first)[0];
        if mask.len() != batch * slots.len() {
            return Err(Error::Dimension {
                op: "attention_memory",
                left: vec![batch, slots.len()],
                right: vec![mask.len()],
            });
        }
        let we = b.var(g, self.w_enc);
        let projected = slots
            .iter()
            .map(|&s| g.matmul(s, we))
            .collect::<Result<Vec<_>>>()?;
        Ok(Memory {
            slots,
            projected,
            mask,
            batch,
        })
    }

    /// Batched attention for `query[batch × query_dim]`. Returns the context
    /// `[batch × memory_dim]` and weights `[batch × slots]`.
    pub fn attend_batched(&self, g: &mut Graph, b: &mut Binding, mem: &Memory, query: Var) -> Result<(Var, Var)> {
        if g.shape(query) != [mem.batch, self.query_dim] {
            return Err(Error::Dimension {
                op: "attend",
                left: g.shape(query).to_vec(),
                right: vec![mem.batch, self.query_dim],
            });
        }
        let wd = b.var(g, self.w_dec);
        let v = b.var(g, self.v);
        let qp = g.matmul(query, wd)?;
        let mut scores = Vec::with_capacity(mem.len());
        for &k in &mem.projected {
            let pre = g.add(k, qp)?;
            let act = g.tanh(pre);
            scores.push(g.matmul(act, v)?);
        }
        let scores = g.concat_cols(&scores)?;
        let weights = g.masked_softmax(scores, &mem.mask)?;
        let mut ctx = None;
        for (k, &slot) in mem.slots.iter().enumerate() {
            let w = g.slice_cols(weights, k, 1)?;
            let part = g.mul_col(slot, w)?;
            ctx = Some(match ctx {
                None => part,
                Some(acc) => g.add(acc, part)?,
            });
        }
        Ok((ctx.expect("memory is nonempty"), weights))
    }
}
