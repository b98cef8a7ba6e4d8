//! Reverse-mode automatic differentiation over dense matrices.
//!
//! A [`Tape`] records every operation as a node holding its forward value.
//! Nodes can only refer to earlier nodes, so the graph is acyclic by
//! construction and backward is a single reverse sweep. Parameters live in a
//! [`ParamStore`] outside the tape; `Tape::param` pulls a parameter onto the
//! tape once and `Tape::param_grads` hands the accumulated gradients back.
//!
//! Constant inputs do not track gradients, and neither does any node whose
//! inputs are all constant, so purely structural work costs nothing in
//! backward.

mod adam;
mod gradcheck;
mod nn;
mod params;

pub use adam::{Adam, AdamConfig};
pub use gradcheck::{grad_check, grad_check_params, GradCheckReport, DEFAULT_DENOM_FLOOR};
pub use nn::{Activation, AttentionSummarizer, Linear, LstmCell, Mlp, SummaryState, TreeCell};
pub use params::{load_checkpoint, save_checkpoint, CheckpointManifest, ParamId, ParamStore};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use std::collections::HashMap;

/// Handle to a node on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize),
    SliceRows(Var, usize),
    Transpose(Var),
    LeakyRelu(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    MaskedSoftmax(Var),
    OuterAdd(Var, Var),
    Sum(Var),
    Mean(Var),
    /// Clamped probabilities and the constant targets.
    Bce(Var, Mat),
    /// `1 - cos` for every row pair, with saved row norms.
    PairCosine(Var, Var, Vec<f64>, Vec<f64>),
}

struct Node {
    value: Mat,
    op: Op,
    needs_grad: bool,
}

pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Mat>>,
    params: HashMap<ParamId, Var>,
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}

fn shape_err<T>(op: &'static str, detail: String) -> Result<T> {
    Err(Error::Shape { op, detail })
}

fn add_into(acc: &mut Option<Mat>, g: Mat) {
    match acc {
        Some(a) => a.data.iter_mut().zip(&g.data).for_each(|(x, y)| *x += y),
        None => *acc = Some(g),
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::new(),
            grads: Vec::new(),
            params: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Mat, op: Op, needs_grad: bool) -> Var {
        debug_assert!(value.is_finite() || matches!(op, Op::Leaf), "non-finite value from {op:?}");
        self.nodes.push(Node { value, op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn value(&self, v: Var) -> &Mat {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.data[0]
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let m = &self.nodes[v.0].value;
        (m.rows, m.cols)
    }

    /// A value that is not differentiated.
    pub fn constant(&mut self, m: Mat) -> Var {
        self.push(m, Op::Leaf, false)
    }

    /// A free input whose gradient is tracked.
    pub fn input(&mut self, m: Mat) -> Var {
        self.push(m, Op::Leaf, true)
    }

    /// Put parameter `id` on the tape (once per tape).
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        if let Some(&v) = self.params.get(&id) {
            return v;
        }
        let v = self.push(store.value(id).clone(), Op::Leaf, true);
        self.params.insert(id, v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.cols != y.rows {
            return shape_err("matmul", format!("{}x{} by {}x{}", x.rows, x.cols, y.rows, y.cols));
        }
        let v = x.matmul(y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(v, Op::MatMul(a, b), ng))
    }

    fn zip(&mut self, op: &'static str, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, mk: Op) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if (x.rows, x.cols) != (y.rows, y.cols) {
            return shape_err(op, format!("{}x{} vs {}x{}", x.rows, x.cols, y.rows, y.cols));
        }
        let data = x.data.iter().zip(&y.data).map(|(p, q)| f(*p, *q)).collect();
        let v = Mat::from_vec(x.rows, x.cols, data);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(v, mk, ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("add", a, b, |p, q| p + q, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("sub", a, b, |p, q| p - q, Op::Sub(a, b))
    }

    /// Hadamard product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("mul", a, b, |p, q| p * q, Op::Mul(a, b))
    }

    /// Add a 1×c row to every row of an r×c matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (x, r) = (self.value(a), self.value(row));
        if r.rows != 1 || r.cols != x.cols {
            return shape_err("add_row", format!("{}x{} plus row {}x{}", x.rows, x.cols, r.rows, r.cols));
        }
        let mut v = x.clone();
        for i in 0..v.rows {
            v.row_mut(i).iter_mut().zip(&r.data).for_each(|(p, q)| *p += q);
        }
        let ng = self.ng(a) || self.ng(row);
        Ok(self.push(v, Op::AddRow(a, row), ng))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let v = self.value(a).map(|x| x * k);
        let ng = self.ng(a);
        self.push(v, Op::Scale(a, k), ng)
    }

    pub fn add_scalar(&mut self, a: Var, k: f64) -> Var {
        let v = self.value(a).map(|x| x + k);
        let ng = self.ng(a);
        self.push(v, Op::AddScalar(a), ng)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = match parts.first() {
            Some(&p) => self.value(p).rows,
            None => return shape_err("concat_cols", "no inputs".into()),
        };
        if let Some(&p) = parts.iter().find(|&&p| self.value(p).rows != rows) {
            return shape_err("concat_cols", format!("row count {} vs {rows}", self.value(p).rows));
        }
        let cols: usize = parts.iter().map(|&p| self.value(p).cols).sum();
        let mut v = Mat::zeros(rows, cols);
        for i in 0..rows {
            let mut off = 0;
            for &p in parts {
                let m = self.value(p);
                v.row_mut(i)[off..off + m.cols].copy_from_slice(m.row(i));
                off += m.cols;
            }
        }
        let ng = parts.iter().any(|&p| self.ng(p));
        Ok(self.push(v, Op::ConcatCols(parts.to_vec()), ng))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let cols = match parts.first() {
            Some(&p) => self.value(p).cols,
            None => return shape_err("concat_rows", "no inputs".into()),
        };
        if let Some(&p) = parts.iter().find(|&&p| self.value(p).cols != cols) {
            return shape_err("concat_rows", format!("column count {} vs {cols}", self.value(p).cols));
        }
        let mut data = Vec::new();
        for &p in parts {
            data.extend_from_slice(&self.value(p).data);
        }
        let rows = data.len() / cols.max(1);
        let rows = if cols == 0 { parts.iter().map(|&p| self.value(p).rows).sum() } else { rows };
        let v = Mat::from_vec(rows, cols, data);
        let ng = parts.iter().any(|&p| self.ng(p));
        Ok(self.push(v, Op::ConcatRows(parts.to_vec()), ng))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let x = self.value(a);
        if start + len > x.cols {
            return shape_err("slice_cols", format!("[{start}, {}) of {} columns", start + len, x.cols));
        }
        let mut v = Mat::zeros(x.rows, len);
        for i in 0..x.rows {
            v.row_mut(i).copy_from_slice(&x.row(i)[start..start + len]);
        }
        let ng = self.ng(a);
        Ok(self.push(v, Op::SliceCols(a, start), ng))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let x = self.value(a);
        if start + len > x.rows {
            return shape_err("slice_rows", format!("[{start}, {}) of {} rows", start + len, x.rows));
        }
        let v = Mat::from_vec(len, x.cols, x.data[start * x.cols..(start + len) * x.cols].to_vec());
        let ng = self.ng(a);
        Ok(self.push(v, Op::SliceRows(a, start), ng))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let v = self.value(a).transpose();
        let ng = self.ng(a);
        self.push(v, Op::Transpose(a), ng)
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let v = self.value(a).map(|x| if x > 0.0 { x } else { slope * x });
        let ng = self.ng(a);
        self.push(v, Op::LeakyRelu(a, slope), ng)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).map(sigmoid);
        let ng = self.ng(a);
        self.push(v, Op::Sigmoid(a), ng)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::tanh);
        let ng = self.ng(a);
        self.push(v, Op::Tanh(a), ng)
    }

    /// Row softmax over entries where `mask > 0`; masked entries are 0 and a
    /// row with an empty mask is all zeros (with zero gradient).
    pub fn masked_row_softmax(&mut self, a: Var, mask: &Mat) -> Result<Var> {
        let x = self.value(a);
        if (x.rows, x.cols) != (mask.rows, mask.cols) {
            return shape_err("masked_row_softmax", format!("{}x{} with mask {}x{}", x.rows, x.cols, mask.rows, mask.cols));
        }
        let mut v = Mat::zeros(x.rows, x.cols);
        for i in 0..x.rows {
            let m = x
                .row(i)
                .iter()
                .zip(mask.row(i))
                .filter(|(_, &k)| k > 0.0)
                .map(|(&e, _)| e)
                .fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                continue;
            }
            let mut s = 0.0;
            for j in 0..x.cols {
                if mask[(i, j)] > 0.0 {
                    let e = (x[(i, j)] - m).exp();
                    v[(i, j)] = e;
                    s += e;
                }
            }
            v.row_mut(i).iter_mut().for_each(|e| *e /= s);
        }
        let ng = self.ng(a);
        Ok(self.push(v, Op::MaskedSoftmax(a), ng))
    }

    /// `out[i][j] = a[i] + b[j]` for column vectors a (n×1) and b (m×1).
    pub fn outer_add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.cols != 1 || y.cols != 1 {
            return shape_err("outer_add", format!("need column vectors, got {}x{} and {}x{}", x.rows, x.cols, y.rows, y.cols));
        }
        let mut v = Mat::zeros(x.rows, y.rows);
        for i in 0..x.rows {
            for j in 0..y.rows {
                v[(i, j)] = x.data[i] + y.data[j];
            }
        }
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(v, Op::OuterAdd(a, b), ng))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = Mat::from_vec(1, 1, vec![self.value(a).sum()]);
        let ng = self.ng(a);
        self.push(v, Op::Sum(a), ng)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let n = (x.rows * x.cols).max(1) as f64;
        let v = Mat::from_vec(1, 1, vec![x.sum() / n]);
        let ng = self.ng(a);
        self.push(v, Op::Mean(a), ng)
    }

    /// Summed binary cross-entropy of probabilities `p` against constant
    /// targets, with `p` clamped into `[EPS_P, 1-EPS_P]`.
    pub fn bce(&mut self, p: Var, target: &Mat) -> Result<Var> {
        let x = self.value(p);
        if (x.rows, x.cols) != (target.rows, target.cols) {
            return shape_err("bce", format!("{}x{} vs target {}x{}", x.rows, x.cols, target.rows, target.cols));
        }
        let eps = crate::matching::EPS_P;
        let s: f64 = x
            .data
            .iter()
            .zip(&target.data)
            .map(|(&q, &t)| {
                let q = q.clamp(eps, 1.0 - eps);
                -(t * q.ln() + (1.0 - t) * (1.0 - q).ln())
            })
            .sum();
        let ng = self.ng(p);
        Ok(self.push(Mat::from_vec(1, 1, vec![s]), Op::Bce(p, target.clone()), ng))
    }

    /// Cost matrix `1 - cos(a_i, b_j)`; zero-norm rows give cost 1 and pass
    /// no gradient.
    pub fn pairwise_cosine(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.cols != y.cols {
            return shape_err("pairwise_cosine", format!("column counts {} and {}", x.cols, y.cols));
        }
        let norm = |m: &Mat, i: usize| m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        let na: Vec<f64> = (0..x.rows).map(|i| norm(x, i)).collect();
        let nb: Vec<f64> = (0..y.rows).map(|j| norm(y, j)).collect();
        let mut v = Mat::zeros(x.rows, y.rows);
        for i in 0..x.rows {
            for j in 0..y.rows {
                let sim = if na[i] == 0.0 || nb[j] == 0.0 {
                    0.0
                } else {
                    x.row(i).iter().zip(y.row(j)).map(|(p, q)| p * q).sum::<f64>() / (na[i] * nb[j])
                };
                v[(i, j)] = 1.0 - sim;
            }
        }
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(v, Op::PairCosine(a, b, na, nb), ng))
    }

    /// Reverse sweep from a 1×1 `loss`. Gradients of earlier runs are cleared.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let (r, c) = self.shape(loss);
        if (r, c) != (1, 1) {
            return shape_err("backward", format!("loss must be 1x1, got {r}x{c}"));
        }
        self.grads = vec![None; self.nodes.len()];
        self.grads[loss.0] = Some(Mat::filled(1, 1, 1.0));
        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].needs_grad {
                continue;
            }
            let Some(g) = self.grads[idx].take() else { continue };
            self.backprop(idx, &g);
            self.grads[idx] = Some(g);
        }
        Ok(())
    }

    fn send(&mut self, to: Var, g: Mat) {
        if self.nodes[to.0].needs_grad {
            add_into(&mut self.grads[to.0], g);
        }
    }

    fn backprop(&mut self, idx: usize, g: &Mat) {
        let op = self.nodes[idx].op.clone();
        match op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.ng(a) {
                    let ga = g.matmul(&self.value(b).transpose());
                    self.send(a, ga);
                }
                if self.ng(b) {
                    let gb = self.value(a).transpose().matmul(g);
                    self.send(b, gb);
                }
            }
            Op::Add(a, b) => {
                self.send(a, g.clone());
                self.send(b, g.clone());
            }
            Op::Sub(a, b) => {
                self.send(a, g.clone());
                self.send(b, g.map(|x| -x));
            }
            Op::Mul(a, b) => {
                if self.ng(a) {
                    let y = self.value(b);
                    let ga = Mat::from_vec(g.rows, g.cols, g.data.iter().zip(&y.data).map(|(p, q)| p * q).collect());
                    self.send(a, ga);
                }
                if self.ng(b) {
                    let x = self.value(a);
                    let gb = Mat::from_vec(g.rows, g.cols, g.data.iter().zip(&x.data).map(|(p, q)| p * q).collect());
                    self.send(b, gb);
                }
            }
            Op::AddRow(a, row) => {
                self.send(a, g.clone());
                let mut gr = Mat::zeros(1, g.cols);
                for i in 0..g.rows {
                    gr.data.iter_mut().zip(g.row(i)).for_each(|(p, q)| *p += q);
                }
                self.send(row, gr);
            }
            Op::Scale(a, k) => self.send(a, g.map(|x| x * k)),
            Op::AddScalar(a) => self.send(a, g.clone()),
            Op::ConcatCols(parts) => {
                let mut off = 0;
                for p in parts {
                    let cols = self.value(p).cols;
                    if self.ng(p) {
                        let mut gp = Mat::zeros(g.rows, cols);
                        for i in 0..g.rows {
                            gp.row_mut(i).copy_from_slice(&g.row(i)[off..off + cols]);
                        }
                        self.send(p, gp);
                    }
                    off += cols;
                }
            }
            Op::ConcatRows(parts) => {
                let mut off = 0;
                for p in parts {
                    let rows = self.value(p).rows;
                    if self.ng(p) {
                        let gp = Mat::from_vec(rows, g.cols, g.data[off * g.cols..(off + rows) * g.cols].to_vec());
                        self.send(p, gp);
                    }
                    off += rows;
                }
            }
            Op::SliceCols(a, start) => {
                let x = self.value(a);
                let mut ga = Mat::zeros(x.rows, x.cols);
                for i in 0..g.rows {
                    ga.row_mut(i)[start..start + g.cols].copy_from_slice(g.row(i));
                }
                self.send(a, ga);
            }
            Op::SliceRows(a, start) => {
                let x = self.value(a);
                let mut ga = Mat::zeros(x.rows, x.cols);
                ga.data[start * g.cols..(start + g.rows) * g.cols].copy_from_slice(&g.data);
                self.send(a, ga);
            }
            Op::Transpose(a) => self.send(a, g.transpose()),
            Op::LeakyRelu(a, slope) => {
                let x = self.value(a);
                let ga = Mat::from_vec(
                    g.rows,
                    g.cols,
                    g.data.iter().zip(&x.data).map(|(d, &v)| if v > 0.0 { *d } else { slope * d }).collect(),
                );
                self.send(a, ga);
            }
            Op::Sigmoid(a) => {
                let y = &self.nodes[idx].value;
                let ga = Mat::from_vec(g.rows, g.cols, g.data.iter().zip(&y.data).map(|(d, s)| d * s * (1.0 - s)).collect());
                self.send(a, ga);
            }
            Op::Tanh(a) => {
                let y = &self.nodes[idx].value;
                let ga = Mat::from_vec(g.rows, g.cols, g.data.iter().zip(&y.data).map(|(d, t)| d * (1.0 - t * t)).collect());
                self.send(a, ga);
            }
            Op::MaskedSoftmax(a) => {
                let y = &self.nodes[idx].value;
                let mut ga = Mat::zeros(y.rows, y.cols);
                for i in 0..y.rows {
                    let dot: f64 = y.row(i).iter().zip(g.row(i)).map(|(p, q)| p * q).sum();
                    for j in 0..y.cols {
                        ga[(i, j)] = y[(i, j)] * (g[(i, j)] - dot);
                    }
                }
                self.send(a, ga);
            }
            Op::OuterAdd(a, b) => {
                let ga = Mat::from_vec(g.rows, 1, (0..g.rows).map(|i| g.row(i).iter().sum()).collect());
                let gb = Mat::from_vec(g.cols, 1, (0..g.cols).map(|j| (0..g.rows).map(|i| g[(i, j)]).sum()).collect());
                self.send(a, ga);
                self.send(b, gb);
            }
            Op::Sum(a) => {
                let x = self.value(a);
                let ga = Mat::filled(x.rows, x.cols, g.data[0]);
                self.send(a, ga);
            }
            Op::Mean(a) => {
                let x = self.value(a);
                let n = (x.rows * x.cols).max(1) as f64;
                let ga = Mat::filled(x.rows, x.cols, g.data[0] / n);
                self.send(a, ga);
            }
            Op::Bce(p, t) => {
                let eps = crate::matching::EPS_P;
                let x = self.value(p);
                let d = g.data[0];
                let ga = Mat::from_vec(
                    x.rows,
                    x.cols,
                    x.data
                        .iter()
                        .zip(&t.data)
                        .map(|(&q, &t)| {
                            if q < eps || q > 1.0 - eps {
                                0.0
                            } else {
                                d * (-(t / q) + (1.0 - t) / (1.0 - q))
                            }
                        })
                        .collect(),
                );
                self.send(p, ga);
            }
            Op::PairCosine(a, b, na, nb) => {
                let (x, y) = (self.value(a).clone(), self.value(b).clone());
                let d = x.cols;
                let mut ga = Mat::zeros(x.rows, d);
                let mut gb = Mat::zeros(y.rows, d);
                for i in 0..x.rows {
                    for j in 0..y.rows {
                        if na[i] == 0.0 || nb[j] == 0.0 {
                            continue;
                        }
                        let gij = g[(i, j)];
                        if gij == 0.0 {
                            continue;
                        }
                        let dot: f64 = x.row(i).iter().zip(y.row(j)).map(|(p, q)| p * q).sum();
                        let s = dot / (na[i] * nb[j]);
                        // cost = 1 - s; ds/dx = y/(|x||y|) - s x/|x|²
                        for k in 0..d {
                            ga[(i, k)] -= gij * (y[(j, k)] / (na[i] * nb[j]) - s * x[(i, k)] / (na[i] * na[i]));
                            gb[(j, k)] -= gij * (x[(i, k)] / (na[i] * nb[j]) - s * y[(j, k)] / (nb[j] * nb[j]));
                        }
                    }
                }
                self.send(a, ga);
                self.send(b, gb);
            }
        }
    }

    /// Gradient of the last `backward` loss with respect to `v`, if any.
    pub fn grad(&self, v: Var) -> Option<&Mat> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Parameter gradients in a vector indexed like the store.
    pub fn param_grads(&self, store: &ParamStore) -> Vec<Option<Mat>> {
        let mut out = vec![None; store.len()];
        for (&id, &v) in &self.params {
            out[id.index()] = self.grad(v).cloned();
        }
        out
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity_passes_gradient() {
        let mut t = Tape::new();
        let i = t.constant(Mat::identity(2));
        let x = t.input(Mat::from_vec(2, 2, vec![1., 2., 3., 4.]));
        let y = t.matmul(i, x).unwrap();
        assert_eq!(t.value(y), t.value(x));
        let s = t.sum(y);
        t.backward(s).unwrap();
        assert_eq!(t.grad(x).unwrap(), &Mat::filled(2, 2, 1.0));
        assert!(t.grad(i).is_none());
    }

    #[test]
    fn shape_errors_name_the_op() {
        let mut t = Tape::new();
        let a = t.input(Mat::zeros(2, 3));
        let e = t.matmul(a, a).unwrap_err().to_string();
        assert!(e.contains("matmul"), "{e}");
        let s = t.sum(a);
        assert!(t.backward(a).is_err());
        assert!(t.backward(s).is_ok());
    }

    #[test]
    fn masked_softmax_edge_cases() {
        let mut t = Tape::new();
        let x = t.input(Mat::from_vec(2, 3, vec![0.3, -1.0, 2.0, 5.0, 1.0, 0.0]));
        let mask = Mat::from_vec(2, 3, vec![0., 1., 0., 0., 0., 0.]);
        let y = t.masked_row_softmax(x, &mask).unwrap();
        assert_eq!(t.value(y).data, vec![0., 1., 0., 0., 0., 0.]);
        let w = t.constant(Mat::from_vec(2, 3, vec![1., 2., 3., 4., 5., 6.]));
        let p = t.mul(y, w).unwrap();
        let s = t.sum(p);
        t.backward(s).unwrap();
        assert!(t.grad(x).unwrap().data.iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn sigmoid_chain_matches_analytic() {
        let mut t = Tape::new();
        let x = t.input(Mat::from_vec(1, 3, vec![-2.0, 0.0, 1.5]));
        let y = t.sigmoid(x);
        let s = t.sum(y);
        t.backward(s).unwrap();
        for (g, v) in t.grad(x).unwrap().data.iter().zip([-2.0f64, 0.0, 1.5]) {
            let sg = sigmoid(v);
            assert!((g - sg * (1.0 - sg)).abs() < 1e-15);
        }
    }
}
