use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Var};
use crate::params::{Binding, ParamId, ParamStore};

/// Affine output projection `h · W + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    pub fn new(store: &mut ParamStore, name: &str, in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let weight = store.add_uniform(format!("{name}.weight"), &[in_dim, out_dim], rng);
        let bias = store.add_uniform(format!("{name}.bias"), &[out_dim], rng);
        Self {
            weight,
            bias,
            in_dim,
            out_dim,
        }
    }

    pub fn from_params(store: &ParamStore, weight: ParamId, bias: ParamId) -> Self {
        let s = store.get(weight).shape();
        Self {
            weight,
            bias,
            in_dim: s[0],
            out_dim: s[1],
        }
    }

    /// Sets weight and bias to zero.
    pub fn zero(&self, store: &mut ParamStore) {
        store.get_mut(self.weight).data_mut().fill(0.0);
        store.get_mut(self.bias).data_mut().fill(0.0);
    }

    pub fn forward(&self, g: &mut Graph, b: &mut Binding, h: Var) -> Result<Var> {
        let w = b.var(g, self.weight);
        let bias = b.var(g, self.bias);
        let h = if g.shape(h).len() == 1 {
            let n = g.shape(h)[0];
            g.reshape(h, &[1, n])?
        } else {
            h
        };
        if g.shape(h)[1] != self.in_dim {
            return Err(Error::Dimension {
                op: "project",
                left: g.shape(h).to_vec(),
                right: vec![self.in_dim, self.out_dim],
            });
        }
        let z = g.matmul(h, w)?;
        g.add_bias(z, bias)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;
    use rand::SeedableRng;

    #[test]
    fn zero_head_gives_zero_logits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = ParamStore::new();
        let l = Linear::new(&mut s, "head", 3, 4, &mut rng);
        l.zero(&mut s);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let h = g.leaf(&Tensor::full(&[2, 3], 0.7));
        let z = l.forward(&mut g, &mut b, h).unwrap();
        assert_eq!(g.shape(z), &[2, 4]);
        assert!(g.data(z).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_weight_passes_through() {
        let mut s = ParamStore::new();
        let w = s.add("w", Tensor::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
        let bias = s.add("b", Tensor::zeros(&[2]));
        let l = Linear::from_params(&s, w, bias);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let h = g.leaf(&Tensor::vector(vec![3.0, -1.5]));
        let z = l.forward(&mut g, &mut b, h).unwrap();
        assert_eq!(g.data(z), &[3.0, -1.5]);
        let bad = g.leaf(&Tensor::zeros(&[1, 3]));
        assert!(l.forward(&mut g, &mut b, bad).is_err());
    }
}
