use log::warn;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{Graph, Var};
use crate::params::{Binding, ParamId, ParamStore};

/// Word embedding lookup table of shape `[vocab_size × embed_dim]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub table: ParamId,
    pub vocab_size: usize,
    pub embed_dim: usize,
}

impl Embedding {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        vocab_size: usize,
        embed_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        if embed_dim >= vocab_size {
            warn!("embedding {name}: dimension {embed_dim} is not smaller than vocabulary {vocab_size}");
        }
        let table = store.add_uniform(format!("{name}.table"), &[vocab_size, embed_dim], rng);
        Self {
            table,
            vocab_size,
            embed_dim,
        }
    }

    pub fn from_param(store: &ParamStore, table: ParamId) -> Self {
        let shape = store.get(table).shape();
        Self {
            table,
            vocab_size: shape[0],
            embed_dim: shape[1],
        }
    }

    /// Returns `[ids.len() × embed_dim]`; row `i` is table row `ids[i]`.
    pub fn forward(&self, g: &mut Graph, b: &mut Binding, ids: &[usize]) -> Result<Var> {
        let t = b.var(g, self.table);
        g.gather_rows(t, ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::tensor::Tensor;

    fn identity_table() -> (ParamStore, Embedding) {
        let mut s = ParamStore::new();
        let id = s.add(
            "emb.table",
            Tensor::from_rows(&[
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ])
            .unwrap(),
        );
        let e = Embedding::from_param(&s, id);
        (s, e)
    }

    #[test]
    fn lookup_returns_basis_row() {
        let (s, e) = identity_table();
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let r = e.forward(&mut g, &mut b, &[2]).unwrap();
        assert_eq!(g.data(r), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn repeated_id_accumulates_and_others_stay_zero() {
        let (mut s, e) = identity_table();
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let r = e.forward(&mut g, &mut b, &[1, 1]).unwrap();
        assert_eq!(&g.data(r)[..3], &g.data(r)[3..]);
        let sum = g.sum(r);
        g.backward(sum).unwrap();
        let bound = b.finish();
        s.accumulate(&g, &bound);
        assert_eq!(s.get(e.table).grad(), &[0.0, 0.0, 0.0, 2.0, 2.0, 2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_id_is_index_error() {
        let (s, e) = identity_table();
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        assert!(matches!(e.forward(&mut g, &mut b, &[3]), Err(Error::Index { .. })));
    }
}
