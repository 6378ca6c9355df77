use rand_chacha::ChaCha8Rng;

use crate::corpus::PAD;
use crate::error::{Error, Result};
use crate::graph::{Graph, Var};
use crate::nn::{Embedding, LstmCell, LstmState};
use crate::params::{Binding, ParamStore};
use crate::tensor::Tensor;

use super::config::SentenceRepr;

/// Parameter-name prefix of every sentence-encoder tensor.
pub const ENCODER_PREFIX: &str = "sentenc";

/// Embedding table plus LSTM cell whose final hidden state represents a
/// sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceEncoder {
    pub tag: SentenceRepr,
    pub params: ParamStore,
    pub embedding: Embedding,
    pub lstm: LstmCell,
}

impl SentenceEncoder {
    pub fn new(
        tag: SentenceRepr,
        vocab_size: usize,
        embed_dim: usize,
        hidden_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut params = ParamStore::new();
        let embedding = Embedding::new(&mut params, &format!("{ENCODER_PREFIX}.embed"), vocab_size, embed_dim, rng);
        let lstm = LstmCell::new(&mut params, &format!("{ENCODER_PREFIX}.lstm"), embed_dim, hidden_dim, rng);
        Self {
            tag,
            params,
            embedding,
            lstm,
        }
    }

    /// Rebuilds an encoder from the `sentenc.*` tensors of `store`.
    pub fn from_store(tag: SentenceRepr, store: &ParamStore) -> Result<Self> {
        if tag == SentenceRepr::None {
            return Err(Error::Config("a sentence encoder needs the lm-cr or nmt-cr tag".into()));
        }
        let mut params = ParamStore::new();
        for (name, t) in store.iter() {
            if name.starts_with(&format!("{ENCODER_PREFIX}.")) {
                params.add(name, t.clone());
            }
        }
        let (embedding, lstm) = handles(&params)?;
        Ok(Self {
            tag,
            params,
            embedding,
            lstm,
        })
    }

    pub fn hidden_dim(&self) -> usize {
        self.lstm.hidden_dim
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.vocab_size
    }

    /// `H(s)`: the final hidden state over the embedded tokens.
    pub fn encode_sentence(&self, ids: &[usize]) -> Result<Tensor> {
        let rows = self.encode_batch(&[ids])?;
        Ok(Tensor::vector(rows.into_iter().next().expect("one row")))
    }

    /// Encodes many sentences at once; each row equals the single-sentence
    /// encoding bit for bit.
    pub fn encode_batch(&self, seqs: &[&[usize]]) -> Result<Vec<Vec<f64>>> {
        let mut g = Graph::new();
        let mut b = Binding::new(&self.params);
        let h = encode_in_graph(&mut g, &mut b, &self.embedding, &self.lstm, seqs)?;
        let dim = self.hidden_dim();
        Ok(g.data(h).chunks(dim).map(<[f64]>::to_vec).collect())
    }
}

/// Looks up the encoder embedding and LSTM inside `store`.
pub(crate) fn handles(store: &ParamStore) -> Result<(Embedding, LstmCell)> {
    let name = format!("{ENCODER_PREFIX}.embed.table");
    let table = store
        .id(&name)
        .ok_or_else(|| Error::format("parameter set", format!("missing {name}")))?;
    let embedding = Embedding::from_param(store, table);
    let lstm = LstmCell::from_store(store, &format!("{ENCODER_PREFIX}.lstm"))?;
    Ok((embedding, lstm))
}

/// Runs the encoder over left-padded sentences and returns the final hidden
/// states `[n × hidden]`. Padding steps leave a row's state untouched, so
/// each row sees exactly its own tokens from a zero state.
pub(crate) fn encode_in_graph(
    g: &mut Graph,
    b: &mut Binding,
    embedding: &Embedding,
    lstm: &LstmCell,
    seqs: &[&[usize]],
) -> Result<Var> {
    Ok(encode_state_in_graph(g, b, embedding, lstm, seqs)?.h)
}

/// Like [`encode_in_graph`] but returns the full final state.
pub(crate) fn encode_state_in_graph(
    g: &mut Graph,
    b: &mut Binding,
    embedding: &Embedding,
    lstm: &LstmCell,
    seqs: &[&[usize]],
) -> Result<LstmState> {
    if seqs.is_empty() {
        return Err(Error::contract("nothing to encode"));
    }
    if seqs.iter().any(|s| s.is_empty()) {
        return Err(Error::contract("cannot encode an empty sentence"));
    }
    let longest = seqs.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut state = LstmState::zeros(g, seqs.len(), lstm.hidden_dim);
    for k in 0..longest {
        let mut ids = Vec::with_capacity(seqs.len());
        let mut mask = Vec::with_capacity(seqs.len());
        for s in seqs {
            let offset = longest - s.len();
            if k >= offset {
                ids.push(s[k - offset]);
                mask.push(1.0);
            } else {
                ids.push(PAD);
                mask.push(0.0);
            }
        }
        let x = embedding.forward(g, b, &ids)?;
        state = lstm.step_masked(g, b, x, &state, &mask)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn encoder() -> SentenceEncoder {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        SentenceEncoder::new(SentenceRepr::LmCr, 20, 4, 6, &mut rng)
    }

    #[test]
    fn single_token_is_one_step_from_zero() {
        let enc = encoder();
        let h = enc.encode_sentence(&[7]).unwrap();
        let mut g = Graph::new();
        let mut b = Binding::new(&enc.params);
        let x = enc.embedding.forward(&mut g, &mut b, &[7]).unwrap();
        let s0 = LstmState::zeros(&mut g, 1, 6);
        let s1 = enc.lstm.step(&mut g, &mut b, x, &s0).unwrap();
        assert_eq!(h.data(), g.data(s1.h));
        assert_eq!(h.numel(), enc.hidden_dim());
    }

    #[test]
    fn batch_rows_match_single_encodings() {
        let enc = encoder();
        let seqs: [&[usize]; 3] = [&[4, 5, 6, 7], &[9], &[10, 11]];
        let rows = enc.encode_batch(&seqs).unwrap();
        for (s, row) in seqs.iter().zip(&rows) {
            assert_eq!(enc.encode_sentence(s).unwrap().data(), row.as_slice());
        }
    }

    #[test]
    fn deterministic_and_order_sensitive() {
        let enc = encoder();
        let a = enc.encode_sentence(&[4, 5, 6]).unwrap();
        assert_eq!(a, enc.encode_sentence(&[4, 5, 6]).unwrap());
        assert_ne!(a, enc.encode_sentence(&[6, 5, 4]).unwrap());
    }

    #[test]
    fn empty_sentence_is_contract_error() {
        assert!(matches!(encoder().encode_sentence(&[]), Err(Error::Contract(_))));
    }

    #[test]
    fn store_round_trip() {
        let enc = encoder();
        let back = SentenceEncoder::from_store(SentenceRepr::LmCr, &enc.params).unwrap();
        assert_eq!(back, enc);
        assert!(SentenceEncoder::from_store(SentenceRepr::None, &enc.params).is_err());
    }
}
