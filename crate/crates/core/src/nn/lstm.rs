use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Var};
use crate::params::{Binding, ParamId, ParamStore};
use crate::tensor::Tensor;

/// Input, hidden and bias parameters of one gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub w_x: ParamId,
    pub w_h: ParamId,
    pub bias: ParamId,
}

/// Single-layer LSTM cell with separate input, forget, output and candidate
/// weights. The forget-gate bias starts at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCell {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub input: Gate,
    pub forget: Gate,
    pub output: Gate,
    pub candidate: Gate,
}

/// Batched recurrent state, both `[batch × hidden]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LstmState {
    pub h: Var,
    pub c: Var,
}

impl LstmState {
    pub fn zeros(g: &mut Graph, batch: usize, hidden: usize) -> Self {
        let h = g.leaf(&Tensor::zeros(&[batch, hidden]));
        let c = g.leaf(&Tensor::zeros(&[batch, hidden]));
        Self { h, c }
    }

    /// State whose hidden part is `h` and whose cell part is zero.
    pub fn from_hidden(g: &mut Graph, h: Var) -> Self {
        let shape = g.shape(h).to_vec();
        let c = g.leaf(&Tensor::zeros(&shape));
        Self { h, c }
    }
}

const GATES: [&str; 4] = ["input", "forget", "output", "candidate"];

impl LstmCell {
    pub fn new(store: &mut ParamStore, name: &str, input_dim: usize, hidden_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut gates = GATES.iter().map(|gate| {
            let w_x = store.add_uniform(format!("{name}.{gate}.w_x"), &[input_dim, hidden_dim], rng);
            let w_h = store.add_uniform(format!("{name}.{gate}.w_h"), &[hidden_dim, hidden_dim], rng);
            let bias = store.add_uniform(format!("{name}.{gate}.bias"), &[hidden_dim], rng);
            Gate { w_x, w_h, bias }
        });
        let input = gates.next().unwrap();
        let forget = gates.next().unwrap();
        let output = gates.next().unwrap();
        let candidate = gates.next().unwrap();
        store.get_mut(forget.bias).data_mut().fill(1.0);
        Self {
            input_dim,
            hidden_dim,
            input,
            forget,
            output,
            candidate,
        }
    }

    /// Re-attaches a cell to parameters stored under `name`.
    pub fn from_store(store: &ParamStore, name: &str) -> Result<Self> {
        let lookup = |gate: &str, part: &str| {
            store
                .id(&format!("{name}.{gate}.{part}"))
                .ok_or_else(|| Error::format("parameter set", format!("missing {name}.{gate}.{part}")))
        };
        let gate = |g: &str| -> Result<Gate> {
            Ok(Gate {
                w_x: lookup(g, "w_x")?,
                w_h: lookup(g, "w_h")?,
                bias: lookup(g, "bias")?,
            })
        };
        let input = gate("input")?;
        let shape = store.get(input.w_x).shape();
        Ok(Self {
            input_dim: shape[0],
            hidden_dim: shape[1],
            input,
            forget: gate("forget")?,
            output: gate("output")?,
            candidate: gate("candidate")?,
        })
    }

    pub fn gates(&self) -> [Gate; 4] {
        [self.input, self.forget, self.output, self.candidate]
    }

    /// Zeroes every weight and bias, including the forget bias.
    pub fn zero(&self, store: &mut ParamStore) {
        for gate in self.gates() {
            for id in [gate.w_x, gate.w_h, gate.bias] {
                store.get_mut(id).data_mut().fill(0.0);
            }
        }
    }

    fn gate_pre(&self, g: &mut Graph, b: &mut Binding, gate: Gate, x: Var, h: Var) -> Result<Var> {
        let wx = b.var(g, gate.w_x);
        let wh = b.var(g, gate.w_h);
        let bias = b.var(g, gate.bias);
        let a = g.matmul(x, wx)?;
        let r = g.matmul(h, wh)?;
        let s = g.add(a, r)?;
        g.add_bias(s, bias)
    }

    /// One step: `c' = f∘c + i∘g`, `h' = o∘tanh(c')`.
    pub fn step(&self, g: &mut Graph, b: &mut Binding, x: Var, s: &LstmState) -> Result<LstmState> {
        let xs = g.shape(x);
        let hs = g.shape(s.h);
        if xs.len() != 2 || xs[1] != self.input_dim || hs.len() != 2 || hs[1] != self.hidden_dim || xs[0] != hs[0] {
            return Err(Error::Dimension {
                op: "lstm_step",
                left: xs.to_vec(),
                right: hs.to_vec(),
            });
        }
        let i = self.gate_pre(g, b, self.input, x, s.h)?;
        let i = g.sigmoid(i);
        let f = self.gate_pre(g, b, self.forget, x, s.h)?;
        let f = g.sigmoid(f);
        let o = self.gate_pre(g, b, self.output, x, s.h)?;
        let o = g.sigmoid(o);
        let cand = self.gate_pre(g, b, self.candidate, x, s.h)?;
        let cand = g.tanh(cand);
        let keep = g.mul(f, s.c)?;
        let write = g.mul(i, cand)?;
        let c = g.add(keep, write)?;
        let tc = g.tanh(c);
        let h = g.mul(o, tc)?;
        Ok(LstmState { h, c })
    }

    /// A step applied only to rows with `mask[r] == 1`; other rows keep `s`.
    pub fn step_masked(
        &self,
        g: &mut Graph,
        b: &mut Binding,
        x: Var,
        s: &LstmState,
        mask: &[f64],
    ) -> Result<LstmState> {
        let next = self.step(g, b, x, s)?;
        if mask.iter().all(|&m| m == 1.0) {
            return Ok(next);
        }
        let inverse: Vec<f64> = mask.iter().map(|m| 1.0 - m).collect();
        let blend = |g: &mut Graph, new: Var, old: Var| -> Result<Var> {
            let a = g.scale_rows(new, mask)?;
            let o = g.scale_rows(old, &inverse)?;
            g.add(a, o)
        };
        let h = blend(g, next.h, s.h)?;
        let c = blend(g, next.c, s.c)?;
        Ok(LstmState { h, c })
    }

    /// Folds `step` over `xs`, returning every hidden state and the final state.
    pub fn run(&self, g: &mut Graph, b: &mut Binding, xs: &[Var], s0: LstmState) -> Result<(Vec<Var>, LstmState)> {
        if xs.is_empty() {
            return Err(Error::contract("lstm_run needs a nonempty input sequence"));
        }
        let mut s = s0;
        let mut hs = Vec::with_capacity(xs.len());
        for &x in xs {
            s = self.step(g, b, x, &s)?;
            hs.push(s.h);
        }
        Ok((hs, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn cell(input: usize, hidden: usize) -> (ParamStore, LstmCell) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = ParamStore::new();
        let c = LstmCell::new(&mut s, "lstm", input, hidden, &mut rng);
        (s, c)
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let (s, c) = cell(2, 3);
        assert_eq!(s.get(c.forget.bias).data(), &[1.0; 3]);
        assert_eq!(s.len(), 12);
    }

    #[test]
    fn zero_weights_zero_state() {
        let (mut s, c) = cell(2, 3);
        c.zero(&mut s);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let x = g.leaf(&Tensor::full(&[1, 2], 0.3));
        let s0 = LstmState::zeros(&mut g, 1, 3);
        let s1 = c.step(&mut g, &mut b, x, &s0).unwrap();
        assert_eq!(g.data(s1.h), &[0.0; 3]);
        assert_eq!(g.data(s1.c), &[0.0; 3]);
    }

    #[test]
    fn zero_weights_halve_cell() {
        let (mut s, c) = cell(2, 3);
        c.zero(&mut s);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let x = g.leaf(&Tensor::full(&[1, 2], -1.0));
        let c0 = vec![0.4, -2.0, 1.0];
        let s0 = LstmState {
            h: g.leaf(&Tensor::zeros(&[1, 3])),
            c: g.leaf(&Tensor::matrix(1, 3, c0.clone()).unwrap()),
        };
        let s1 = c.step(&mut g, &mut b, x, &s0).unwrap();
        for k in 0..3 {
            assert_eq!(g.data(s1.c)[k], 0.5 * c0[k]);
            assert_eq!(g.data(s1.h)[k], 0.5 * (0.5 * c0[k]).tanh());
        }
    }

    #[test]
    fn step_does_not_alter_input_state() {
        let (s, c) = cell(2, 3);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let x = g.leaf(&Tensor::full(&[1, 2], 0.5));
        let s0 = LstmState::zeros(&mut g, 1, 3);
        let _ = c.step(&mut g, &mut b, x, &s0).unwrap();
        assert_eq!(g.data(s0.h), &[0.0; 3]);
        assert_eq!(g.data(s0.c), &[0.0; 3]);
    }

    #[test]
    fn run_matches_manual_steps() {
        let (s, c) = cell(2, 3);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let xs: Vec<Var> = (0..4)
            .map(|i| g.leaf(&Tensor::full(&[1, 2], i as f64 * 0.25)))
            .collect();
        let s0 = LstmState::zeros(&mut g, 1, 3);
        let (hs, last) = c.run(&mut g, &mut b, &xs, s0).unwrap();
        assert_eq!(hs.len(), 4);
        let mut manual = s0;
        for &x in &xs {
            manual = c.step(&mut g, &mut b, x, &manual).unwrap();
        }
        assert_eq!(g.data(last.h), g.data(manual.h));
        assert_eq!(g.data(hs[3]), g.data(manual.h));

        let (one, st) = c.run(&mut g, &mut b, &xs[..1], s0).unwrap();
        let single = c.step(&mut g, &mut b, xs[0], &s0).unwrap();
        assert_eq!(g.data(one[0]), g.data(single.h));
        assert_eq!(g.data(st.c), g.data(single.c));
    }

    #[test]
    fn empty_run_is_contract_error() {
        let (s, c) = cell(2, 3);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let s0 = LstmState::zeros(&mut g, 1, 3);
        assert!(matches!(c.run(&mut g, &mut b, &[], s0), Err(Error::Contract(_))));
    }

    #[test]
    fn masked_rows_keep_state() {
        let (s, c) = cell(2, 3);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let x = g.leaf(&Tensor::full(&[2, 2], 0.5));
        let s0 = LstmState::zeros(&mut g, 2, 3);
        let s1 = c.step_masked(&mut g, &mut b, x, &s0, &[0.0, 1.0]).unwrap();
        let full = c.step(&mut g, &mut b, x, &s0).unwrap();
        assert_eq!(&g.data(s1.h)[..3], &[0.0; 3]);
        assert_eq!(&g.data(s1.h)[3..], &g.data(full.h)[3..]);
    }

    #[test]
    fn shape_mismatch_is_dimension_error() {
        let (s, c) = cell(2, 3);
        let mut g = Graph::new();
        let mut b = Binding::new(&s);
        let x = g.leaf(&Tensor::zeros(&[1, 4]));
        let s0 = LstmState::zeros(&mut g, 1, 3);
        assert!(matches!(c.step(&mut g, &mut b, x, &s0), Err(Error::Dimension { .. })));
    }
}
