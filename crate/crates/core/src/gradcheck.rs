//! Finite-difference gradient checking.
//!
//! Relative error per coordinate is `|a - n| / max(|a|, |n|, floor)` where
//! `a` is the autodiff gradient and `n` the central difference.

use crate::error::{Error, Result};
use crate::graph::{Graph, Var};
use crate::params::{Binding, ParamStore};
use crate::tensor::Tensor;

pub const DEFAULT_FLOOR: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct Coordinate {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub tolerance: f64,
    /// Worst coordinates, largest error first.
    pub worst: Vec<Coordinate>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

fn rel_error(a: f64, n: f64, floor: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(floor)
}

fn check_step(h: f64) -> Result<()> {
    if !(1e-6..=1e-4).contains(&h) {
        return Err(Error::contract(format!("finite-difference step {h} outside [1e-6, 1e-4]")));
    }
    Ok(())
}

struct Collector {
    floor: f64,
    keep: usize,
    max: f64,
    checked: usize,
    worst: Vec<Coordinate>,
}

impl Collector {
    fn new(floor: f64) -> Self {
        Self {
            floor,
            keep: 5,
            max: 0.0,
            checked: 0,
            worst: Vec::new(),
        }
    }

    fn record(&mut self, param: &str, index: usize, analytic: f64, numeric: f64) {
        let e = rel_error(analytic, numeric, self.floor);
        let e = if e.is_nan() { f64::INFINITY } else { e };
        self.checked += 1;
        self.max = self.max.max(e);
        self.worst.push(Coordinate {
            param: param.to_string(),
            index,
            analytic,
            numeric,
            rel_error: e,
        });
        self.worst
            .sort_by(|a, b| b.rel_error.total_cmp(&a.rel_error));
        self.worst.truncate(self.keep);
    }

    fn finish(self, tolerance: f64) -> GradCheckReport {
        GradCheckReport {
            max_rel_error: self.max,
            checked: self.checked,
            tolerance,
            worst: self.worst,
        }
    }
}

/// Checks `d f(x) / d x` for a scalar-valued graph function of one input.
pub fn grad_check<F>(f: F, x: &Tensor, h: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph, Var) -> Result<Var>,
{
    check_step(h)?;
    let eval = |t: &Tensor| -> Result<f64> {
        let mut g = Graph::new();
        let v = g.leaf(t);
        let out = f(&mut g, v)?;
        Ok(g.value(out).item())
    };
    let mut g = Graph::new();
    let v = g.leaf(x);
    let out = f(&mut g, v)?;
    g.backward(out)?;
    let analytic = g.grad(v).to_vec();

    let mut c = Collector::new(DEFAULT_FLOOR);
    let mut probe = x.clone();
    for i in 0..x.numel() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + h;
        let up = eval(&probe)?;
        probe.data_mut()[i] = orig - h;
        let down = eval(&probe)?;
        probe.data_mut()[i] = orig;
        c.record("x", i, analytic[i], (up - down) / (2.0 * h));
    }
    Ok(c.finish(tol))
}

/// Checks the gradient of a scalar loss with respect to every coordinate of
/// every parameter in `store`.
pub fn grad_check_params<F>(store: &ParamStore, f: F, h: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph, &mut Binding) -> Result<Var>,
{
    check_step(h)?;
    let eval = |s: &ParamStore| -> Result<f64> {
        let mut g = Graph::new();
        let mut b = Binding::new(s);
        let out = f(&mut g, &mut b)?;
        Ok(g.value(out).item())
    };

    let mut analytic_store = store.clone();
    analytic_store.zero_grad();
    {
        let mut g = Graph::new();
        let mut b = Binding::new(store);
        let out = f(&mut g, &mut b)?;
        g.backward(out)?;
        let bound = b.finish();
        analytic_store.accumulate(&g, &bound);
    }

    let mut c = Collector::new(DEFAULT_FLOOR);
    let mut probe = store.clone();
    for id in store.ids() {
        let name = store.name(id).to_string();
        for i in 0..store.get(id).numel() {
            let orig = probe.get(id).data()[i];
            probe.get_mut(id).data_mut()[i] = orig + h;
            let up = eval(&probe)?;
            probe.get_mut(id).data_mut()[i] = orig - h;
            let down = eval(&probe)?;
            probe.get_mut(id).data_mut()[i] = orig;
            c.record(&name, i, analytic_store.get(id).grad()[i], (up - down) / (2.0 * h));
        }
    }
    Ok(c.finish(tol))
}
