//! Reverse-mode automatic differentiation over a recorded tape.
//!
//! Every operation appends a node to the [`Graph`]; nodes are therefore
//! stored in topological order and `backward` walks them in reverse.

use crate::error::{Error, Result};
use crate::tensor::{self, Tensor};

/// Handle to a node in a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementwise {
    Add,
    Sub,
    Mul,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Binary(Elementwise, Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    Scale(Var, f64),
    AddBias(Var, Var),
    ConcatCols(Vec<Var>),
    SliceCols { x: Var, start: usize },
    GatherRows { table: Var, ids: Vec<usize> },
    ScaleRows { x: Var, factors: Vec<f64> },
    MulCol { x: Var, col: Var },
    Sum(Var),
    Reshape(Var),
    MaskedSoftmax { x: Var, mask: Vec<bool> },
    CrossEntropySum { logits: Var, targets: Vec<Option<usize>>, probs: Vec<f64> },
    BceWithLogitsSum { logits: Var, targets: Vec<Option<f64>> },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

/// A single forward pass. Confined to one thread while in use.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Adds a leaf holding a copy of `t`'s data (its gradient starts at zero).
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push(Tensor::from_parts(t.shape().to_vec(), t.data().to_vec()), Op::Leaf)
    }

    pub fn leaf_owned(&mut self, t: Tensor) -> Var {
        let t = Tensor::from_parts(t.shape().to_vec(), t.into_data());
        self.push(t, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    pub fn data(&self, v: Var) -> &[f64] {
        self.nodes[v.0].value.data()
    }

    pub fn grad(&self, v: Var) -> &[f64] {
        self.nodes[v.0].value.grad()
    }

    pub fn zero_grad(&mut self) {
        for n in &mut self.nodes {
            n.value.zero_grad();
        }
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    fn matrix_dims(&self, v: Var, op: &'static str) -> Result<(usize, usize)> {
        let s = self.shape(v);
        match s.len() {
            1 => Ok((1, s[0])),
            2 => Ok((s[0], s[1])),
            _ => Err(Error::Dimension {
                op,
                left: s.to_vec(),
                right: vec![],
            }),
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.matrix_dims(a, "matmul")?;
        let (k2, n) = self.matrix_dims(b, "matmul")?;
        if k != k2 || self.shape(a).len() != 2 || self.shape(b).len() != 2 {
            return Err(Error::Dimension {
                op: "matmul",
                left: self.shape(a).to_vec(),
                right: self.shape(b).to_vec(),
            });
        }
        let mut out = vec![0.0; m * n];
        tensor::matmul_acc(self.data(a), self.data(b), &mut out, m, k, n);
        Ok(self.push(Tensor::from_parts(vec![m, n], out), Op::MatMul(a, b)))
    }

    /// Elementwise binary op on equal shapes, or with either side a scalar.
    pub fn elementwise(&mut self, op: Elementwise, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        let na = self.value(a).numel();
        let nb = self.value(b).numel();
        let shape = if sa == sb || nb == 1 {
            sa.to_vec()
        } else if na == 1 {
            sb.to_vec()
        } else {
            return Err(Error::Dimension {
                op: "elementwise",
                left: sa.to_vec(),
                right: sb.to_vec(),
            });
        };
        let n = na.max(nb);
        let (da, db) = (self.data(a), self.data(b));
        let f = |x: f64, y: f64| match op {
            Elementwise::Add => x + y,
            Elementwise::Sub => x - y,
            Elementwise::Mul => x * y,
        };
        let out: Vec<f64> = (0..n)
            .map(|i| f(da[if na == 1 { 0 } else { i }], db[if nb == 1 { 0 } else { i }]))
            .collect();
        Ok(self.push(Tensor::from_parts(shape, out), Op::Binary(op, a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(Elementwise::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(Elementwise::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(Elementwise::Mul, a, b)
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let out = self.data(x).iter().map(|v| v.tanh()).collect();
        let shape = self.shape(x).to_vec();
        self.push(Tensor::from_parts(shape, out), Op::Tanh(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = self.data(x).iter().map(|&v| tensor::sigmoid(v)).collect();
        let shape = self.shape(x).to_vec();
        self.push(Tensor::from_parts(shape, out), Op::Sigmoid(x))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let out = self.data(x).iter().map(|v| v * factor).collect();
        let shape = self.shape(x).to_vec();
        self.push(Tensor::from_parts(shape, out), Op::Scale(x, factor))
    }

    /// `x[r×c] + bias[c]`, the bias broadcast over rows.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (r, c) = self.matrix_dims(x, "add_bias")?;
        if self.value(bias).numel() != c {
            return Err(Error::Dimension {
                op: "add_bias",
                left: self.shape(x).to_vec(),
                right: self.shape(bias).to_vec(),
            });
        }
        let b = self.data(bias);
        let xs = self.data(x);
        let out = (0..r * c).map(|i| xs[i] + b[i % c]).collect();
        let shape = self.shape(x).to_vec();
        Ok(self.push(Tensor::from_parts(shape, out), Op::AddBias(x, bias)))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::contract("concat_cols needs at least one input"))?;
        let (r, _) = self.matrix_dims(first, "concat_cols")?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (pr, pc) = self.matrix_dims(p, "concat_cols")?;
            if pr != r {
                return Err(Error::Dimension {
                    op: "concat_cols",
                    left: self.shape(first).to_vec(),
                    right: self.shape(p).to_vec(),
                });
            }
            widths.push(pc);
        }
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(r * total);
        for i in 0..r {
            for (&p, &w) in parts.iter().zip(&widths) {
                out.extend_from_slice(&self.data(p)[i * w..(i + 1) * w]);
            }
        }
        Ok(self.push(Tensor::from_parts(vec![r, total], out), Op::ConcatCols(parts.to_vec())))
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        let (r, c) = self.matrix_dims(x, "slice_cols")?;
        if len == 0 || start + len > c {
            return Err(Error::Index {
                op: "slice_cols",
                index: start + len,
                bound: c,
            });
        }
        let xs = self.data(x);
        let mut out = Vec::with_capacity(r * len);
        for i in 0..r {
            out.extend_from_slice(&xs[i * c + start..i * c + start + len]);
        }
        Ok(self.push(Tensor::from_parts(vec![r, len], out), Op::SliceCols { x, start }))
    }

    /// Selects rows of a `[n×d]` table; gradients flow only into selected rows.
    pub fn gather_rows(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let (n, d) = self.matrix_dims(table, "gather_rows")?;
        if ids.is_empty() {
            return Err(Error::contract("gather_rows needs at least one id"));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
            return Err(Error::Index {
                op: "gather_rows",
                index: bad,
                bound: n,
            });
        }
        let t = self.data(table);
        let mut out = Vec::with_capacity(ids.len() * d);
        for &i in ids {
            out.extend_from_slice(&t[i * d..(i + 1) * d]);
        }
        Ok(self.push(
            Tensor::from_parts(vec![ids.len(), d], out),
            Op::GatherRows {
                table,
                ids: ids.to_vec(),
            },
        ))
    }

    /// Multiplies row `i` of `x` by the constant `factors[i]` (e.g. a 0/1 mask).
    pub fn scale_rows(&mut self, x: Var, factors: &[f64]) -> Result<Var> {
        let (r, c) = self.matrix_dims(x, "scale_rows")?;
        if factors.len() != r {
            return Err(Error::Dimension {
                op: "scale_rows",
                left: self.shape(x).to_vec(),
                right: vec![factors.len()],
            });
        }
        let xs = self.data(x);
        let out = (0..r * c).map(|i| xs[i] * factors[i / c]).collect();
        let shape = self.shape(x).to_vec();
        Ok(self.push(
            Tensor::from_parts(shape, out),
            Op::ScaleRows {
                x,
                factors: factors.to_vec(),
            },
        ))
    }

    /// `x[r×c] ∘ col[r×1]`, the column broadcast across `c`.
    pub fn mul_col(&mut self, x: Var, col: Var) -> Result<Var> {
        let (r, c) = self.matrix_dims(x, "mul_col")?;
        let (cr, cc) = self.matrix_dims(col, "mul_col")?;
        if cr != r || cc != 1 {
            return Err(Error::Dimension {
                op: "mul_col",
                left: self.shape(x).to_vec(),
                right: self.shape(col).to_vec(),
            });
        }
        let (xs, ws) = (self.data(x), self.data(col));
        let out = (0..r * c).map(|i| xs[i] * ws[i / c]).collect();
        let shape = self.shape(x).to_vec();
        Ok(self.push(Tensor::from_parts(shape, out), Op::MulCol { x, col }))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.data(x).iter().sum();
        self.push(Tensor::from_parts(vec![1], vec![s]), Op::Sum(x))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let numel: usize = shape.iter().product();
        if numel != self.value(x).numel() || shape.contains(&0) {
            return Err(Error::Dimension {
                op: "reshape",
                left: self.shape(x).to_vec(),
                right: shape.to_vec(),
            });
        }
        let data = self.data(x).to_vec();
        Ok(self.push(Tensor::from_parts(shape.to_vec(), data), Op::Reshape(x)))
    }

    /// Row-wise softmax with masked-out entries forced to weight zero.
    /// Every row must keep at least one entry.
    pub fn masked_softmax(&mut self, x: Var, mask: &[bool]) -> Result<Var> {
        let (r, c) = self.matrix_dims(x, "masked_softmax")?;
        if mask.len() != r * c {
            return Err(Error::Dimension {
                op: "masked_softmax",
                left: self.shape(x).to_vec(),
                right: vec![mask.len()],
            });
        }
        let xs = self.data(x);
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            let row = &xs[i * c..(i + 1) * c];
            let keep = &mask[i * c..(i + 1) * c];
            let max = row
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(&v, _)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return Err(Error::contract(format!("masked_softmax row {i} has no active entry")));
            }
            let mut total = 0.0;
            for j in 0..c {
                if keep[j] {
                    let e = (row[j] - max).exp();
                    out[i * c + j] = e;
                    total += e;
                }
            }
            for v in &mut out[i * c..(i + 1) * c] {
                *v /= total;
            }
        }
        let shape = self.shape(x).to_vec();
        Ok(self.push(
            Tensor::from_parts(shape, out),
            Op::MaskedSoftmax {
                x,
                mask: mask.to_vec(),
            },
        ))
    }

    pub fn softmax_rows(&mut self, x: Var) -> Result<Var> {
        let n = self.value(x).numel();
        self.masked_softmax(x, &vec![true; n])
    }

    /// Sum over rows of `-log softmax(logits)[target]`; rows with `None`
    /// contribute nothing.
    pub fn cross_entropy_sum(&mut self, logits: Var, targets: &[Option<usize>]) -> Result<Var> {
        let (r, c) = self.matrix_dims(logits, "cross_entropy")?;
        if targets.len() != r {
            return Err(Error::Dimension {
                op: "cross_entropy",
                left: self.shape(logits).to_vec(),
                right: vec![targets.len()],
            });
        }
        if let Some(&bad) = targets.iter().flatten().find(|&&t| t >= c) {
            return Err(Error::Index {
                op: "cross_entropy",
                index: bad,
                bound: c,
            });
        }
        let xs = self.data(logits);
        let mut probs = vec![0.0; r * c];
        let mut loss = 0.0;
        for (i, target) in targets.iter().enumerate() {
            let Some(t) = *target else { continue };
            let row = &xs[i * c..(i + 1) * c];
            let lp = tensor::log_softmax(row);
            loss -= lp[t];
            for (p, l) in probs[i * c..(i + 1) * c].iter_mut().zip(&lp) {
                *p = l.exp();
            }
        }
        Ok(self.push(
            Tensor::from_parts(vec![1], vec![loss]),
            Op::CrossEntropySum {
                logits,
                targets: targets.to_vec(),
                probs,
            },
        ))
    }

    /// Mean softmax cross-entropy over a batch of rows.
    pub fn softmax_cross_entropy(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let t: Vec<Option<usize>> = targets.iter().copied().map(Some).collect();
        let total = self.cross_entropy_sum(logits, &t)?;
        Ok(self.scale(total, 1.0 / targets.len().max(1) as f64))
    }

    /// Sum of binary cross-entropy of `sigmoid(logits)` against targets in
    /// [0, 1]; `logits` is `[r×1]` and `None` rows are skipped.
    pub fn bce_with_logits_sum(&mut self, logits: Var, targets: &[Option<f64>]) -> Result<Var> {
        let n = self.value(logits).numel();
        if targets.len() != n {
            return Err(Error::Dimension {
                op: "bce_with_logits",
                left: self.shape(logits).to_vec(),
                right: vec![targets.len()],
            });
        }
        let zs = self.data(logits);
        let loss = zs
            .iter()
            .zip(targets)
            .filter_map(|(&z, t)| t.map(|y| z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()))
            .sum();
        Ok(self.push(
            Tensor::from_parts(vec![1], vec![loss]),
            Op::BceWithLogitsSum {
                logits,
                targets: targets.to_vec(),
            },
        ))
    }

    /// Accumulates `∂loss/∂node` into every node reachable from `loss`.
    /// Repeated calls add to the existing gradients.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if !self.value(loss).is_scalar() {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = Vec::with_capacity(loss.0 + 1);
        grads.resize_with(loss.0 + 1, || None);
        grads[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads);
            for (acc, d) in self.nodes[i].value.grad_mut().iter_mut().zip(&g) {
                *acc += d;
            }
        }
        Ok(())
    }

    fn propagate(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[i];
        let out = node.value.data();
        let nodes = &self.nodes;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = (self.value(*a).rows(), self.value(*a).cols());
                let n = self.value(*b).cols();
                tensor::matmul_bt_acc(g, self.data(*b), slot(nodes, grads, *a), m, k, n);
                tensor::matmul_at_acc(self.data(*a), g, slot(nodes, grads, *b), m, k, n);
            }
            Op::Binary(op, a, b) => {
                let (na, nb) = (self.value(*a).numel(), self.value(*b).numel());
                let (da, db) = (self.data(*a), self.data(*b));
                let pick = |d: &[f64], n: usize, j: usize| d[if n == 1 { 0 } else { j }];
                {
                    let ga = slot(nodes, grads, *a);
                    for (j, &gj) in g.iter().enumerate() {
                        let d = match op {
                            Elementwise::Add | Elementwise::Sub => gj,
                            Elementwise::Mul => gj * pick(db, nb, j),
                        };
                        ga[if na == 1 { 0 } else { j }] += d;
                    }
                }
                let gb = slot(nodes, grads, *b);
                for (j, &gj) in g.iter().enumerate() {
                    let d = match op {
                        Elementwise::Add => gj,
                        Elementwise::Sub => -gj,
                        Elementwise::Mul => gj * pick(da, na, j),
                    };
                    gb[if nb == 1 { 0 } else { j }] += d;
                }
            }
            Op::Tanh(x) => {
                for ((a, &gj), &y) in slot(nodes, grads, *x).iter_mut().zip(g).zip(out) {
                    *a += gj * (1.0 - y * y);
                }
            }
            Op::Sigmoid(x) => {
                for ((a, &gj), &y) in slot(nodes, grads, *x).iter_mut().zip(g).zip(out) {
                    *a += gj * y * (1.0 - y);
                }
            }
            Op::Scale(x, f) => {
                for (a, &gj) in slot(nodes, grads, *x).iter_mut().zip(g) {
                    *a += gj * f;
                }
            }
            Op::AddBias(x, bias) => {
                let c = self.value(*x).cols();
                for (a, &gj) in slot(nodes, grads, *x).iter_mut().zip(g) {
                    *a += gj;
                }
                let gb = slot(nodes, grads, *bias);
                for (j, &gj) in g.iter().enumerate() {
                    gb[j % c] += gj;
                }
            }
            Op::ConcatCols(parts) => {
                let total = node.value.cols();
                let rows = node.value.rows();
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).cols();
                    let gp = slot(nodes, grads, p);
                    for r in 0..rows {
                        for j in 0..w {
                            gp[r * w + j] += g[r * total + offset + j];
                        }
                    }
                    offset += w;
                }
            }
            Op::SliceCols { x, start } => {
                let c = self.value(*x).cols();
                let len = node.value.cols();
                let gx = slot(nodes, grads, *x);
                for r in 0..node.value.rows() {
                    for j in 0..len {
                        gx[r * c + start + j] += g[r * len + j];
                    }
                }
            }
            Op::GatherRows { table, ids } => {
                let d = self.value(*table).cols();
                let gt = slot(nodes, grads, *table);
                for (r, &id) in ids.iter().enumerate() {
                    for j in 0..d {
                        gt[id * d + j] += g[r * d + j];
                    }
                }
            }
            Op::ScaleRows { x, factors } => {
                let c = node.value.cols();
                for (j, (a, &gj)) in slot(nodes, grads, *x).iter_mut().zip(g).enumerate() {
                    *a += gj * factors[j / c];
                }
            }
            Op::MulCol { x, col } => {
                let c = node.value.cols();
                let (xs, ws) = (self.data(*x), self.data(*col));
                for (j, (a, &gj)) in slot(nodes, grads, *x).iter_mut().zip(g).enumerate() {
                    *a += gj * ws[j / c];
                }
                let gw = slot(nodes, grads, *col);
                for (j, &gj) in g.iter().enumerate() {
                    gw[j / c] += gj * xs[j];
                }
            }
            Op::Sum(x) => {
                for a in slot(nodes, grads, *x).iter_mut() {
                    *a += g[0];
                }
            }
            Op::Reshape(x) => {
                for (a, &gj) in slot(nodes, grads, *x).iter_mut().zip(g) {
                    *a += gj;
                }
            }
            Op::MaskedSoftmax { x, mask } => {
                let c = node.value.cols();
                let gx = slot(nodes, grads, *x);
                for r in 0..node.value.rows() {
                    let y = &out[r * c..(r + 1) * c];
                    let gr = &g[r * c..(r + 1) * c];
                    let dot: f64 = y.iter().zip(gr).map(|(a, b)| a * b).sum();
                    for j in 0..c {
                        if mask[r * c + j] {
                            gx[r * c + j] += y[j] * (gr[j] - dot);
                        }
                    }
                }
            }
            Op::CrossEntropySum {
                logits,
                targets,
                probs,
            } => {
                let c = self.value(*logits).cols();
                let gl = slot(nodes, grads, *logits);
                for (r, t) in targets.iter().enumerate() {
                    let Some(t) = *t else { continue };
                    for j in 0..c {
                        let onehot = if j == t { 1.0 } else { 0.0 };
                        gl[r * c + j] += g[0] * (probs[r * c + j] - onehot);
                    }
                }
            }
            Op::BceWithLogitsSum { logits, targets } => {
                let zs = self.data(*logits);
                let gl = slot(nodes, grads, *logits);
                for (j, t) in targets.iter().enumerate() {
                    if let Some(y) = *t {
                        gl[j] += g[0] * (tensor::sigmoid(zs[j]) - y);
                    }
                }
            }
        }
    }
}

fn slot<'g>(nodes: &[Node], grads: &'g mut [Option<Vec<f64>>], v: Var) -> &'g mut Vec<f64> {
    let n = nodes[v.0].value.numel();
    grads[v.0].get_or_insert_with(|| vec![0.0; n])
}
