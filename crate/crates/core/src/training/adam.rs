use crate::error::{Error, Result};
use crate::params::ParamStore;

/// Adam moments and hyper-parameters for every tensor of a [`ParamStore`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Number of updates applied so far.
    pub t: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Zero moments with the usual defaults β₁=0.9, β₂=0.999, ε=1e-8.
    pub fn new(store: &ParamStore, alpha: f64) -> Self {
        let zeros: Vec<Vec<f64>> = store.iter().map(|(_, t)| vec![0.0; t.numel()]).collect();
        Self {
            alpha,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One bias-corrected Adam update from the gradients stored in `store`.
/// Tensors with `trainable[i] == false` are left untouched. A non-finite
/// gradient aborts before anything is modified.
pub fn adam_step(store: &mut ParamStore, state: &mut AdamState, trainable: &[bool]) -> Result<()> {
    if state.m.len() != store.len() || trainable.len() != store.len() {
        return Err(Error::contract(format!(
            "optimizer state covers {} tensors, trainable mask {}, store has {}",
            state.m.len(),
            trainable.len(),
            store.len()
        )));
    }
    for id in store.ids() {
        if !trainable[id.index()] {
            continue;
        }
        if let Some(i) = store.get(id).grad().iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite gradient {} in {} at index {i}",
                store.get(id).grad()[i],
                store.name(id)
            )));
        }
    }

    state.t += 1;
    let t = state.t as f64;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powf(t);
    let c2 = 1.0 - b2.powf(t);
    for (k, (_, tensor)) in store.tensors_mut().enumerate() {
        if !trainable[k] {
            continue;
        }
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        let grad = tensor.grad().to_vec();
        for (((x, g), m), v) in tensor.data_mut().iter_mut().zip(&grad).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *x -= state.alpha * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn scalar_store(x: f64) -> ParamStore {
        let mut s = ParamStore::new();
        s.add("x", Tensor::vector(vec![x]));
        s
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = scalar_store(3.0);
        let mut a = AdamState::new(&s, 0.001);
        adam_step(&mut s, &mut a, &[true]).unwrap();
        assert_eq!(s.iter().next().unwrap().1.data(), &[3.0]);
        assert_eq!(a.t, 1);
    }

    #[test]
    fn first_step_moves_by_alpha() {
        for g in [2.0, -0.5, 1e3] {
            let mut s = scalar_store(1.0);
            s.tensors_mut().next().unwrap().1.grad_mut()[0] = g;
            let mut a = AdamState::new(&s, 0.001);
            adam_step(&mut s, &mut a, &[true]).unwrap();
            let delta = s.iter().next().unwrap().1.data()[0] - 1.0;
            assert!((delta + 0.001 * g.signum()).abs() < 1e-6, "{g}: {delta}");
        }
    }

    #[test]
    fn frozen_tensor_untouched() {
        let mut s = scalar_store(1.0);
        s.tensors_mut().next().unwrap().1.grad_mut()[0] = 1.0;
        let mut a = AdamState::new(&s, 0.1);
        adam_step(&mut s, &mut a, &[false]).unwrap();
        assert_eq!(s.iter().next().unwrap().1.data(), &[1.0]);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut s = scalar_store(1.0);
        s.tensors_mut().next().unwrap().1.grad_mut()[0] = f64::NAN;
        let mut a = AdamState::new(&s, 0.1);
        let err = adam_step(&mut s, &mut a, &[true]).unwrap_err();
        assert!(matches!(&err, Error::Numeric(m) if m.contains(" x ")), "{err}");
        assert_eq!(a.t, 0);
    }
}
