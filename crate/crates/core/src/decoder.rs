//! Tree-structured autoregressive sampling of co-incidence rows.
//!
//! A row over `n` nodes is produced by walking a binary tree whose nodes
//! own index intervals. At an internal node two gates decide whether to
//! descend left and right; at a leaf a Bernoulli draw sets the bit. An LSTM
//! cell carries state down each descent and a tree LSTM cell merges the two
//! children on the way back up. Rows of a matrix are chained through a
//! causal self-attention summary `g` of earlier rows.
//!
//! Intervals here are 0-based and inclusive. The children of `[l, r]` are
//! `[l, m]` and `[m + 1, r]` with `m = ⌊(l + r) / 2⌋`, which matches the
//! 1-based split exactly.

use crate::autodiff::{sigmoid, Activation, AttentionSummarizer, LstmCell, Mlp, ParamId, ParamStore, SummaryState, Tape, TreeCell, Var};
use crate::complex::SparseBinary;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::matching::sinkhorn;
use crate::rng::Rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraversalMode {
    /// Gates open when the raw sigmoid probability exceeds `p_min`.
    Deterministic,
    /// Gates open when a relaxed Bernoulli sample exceeds `p_min`.
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderHyperparams {
    pub n_new_cell: usize,
    pub p_min: f64,
    /// Most ones a row may hold; clamped to the node count at run time.
    pub n_max: usize,
    pub min_nonzero: usize,
    pub max_resample_attempts: usize,
    pub mode: TraversalMode,
    pub temperature: f64,
}

impl DecoderHyperparams {
    /// Defaults for rank-1 rows (`n_max = 2`) or rank-2 rows (`n_max = 15`).
    pub fn for_rank(rank: usize, mode: TraversalMode) -> Self {
        DecoderHyperparams {
            n_new_cell: 1,
            p_min: 0.5,
            n_max: if rank == 1 { 2 } else { 15 },
            min_nonzero: 1,
            max_resample_attempts: 20,
            mode,
            temperature: 0.5,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_new_cell == 0 || self.n_max == 0 || !(self.p_min > 0.0 && self.p_min < 1.0) || !(self.temperature > 0.0) {
            return Err(Error::InvalidArgument(format!("bad decoder hyperparameters {self:?}")));
        }
        Ok(())
    }

    /// A row is kept if it is empty or has at least two ones. A singleton
    /// row cannot be a cell of rank 1 or 2, so it is resampled.
    pub fn row_is_valid(&self, ones: usize) -> bool {
        ones == 0 || ones >= self.min_nonzero.max(2)
    }
}

/// Inclusive index interval owned by a tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub lo: usize,
    pub hi: usize,
}

impl TreeNode {
    pub fn root(n: usize) -> Self {
        TreeNode { lo: 0, hi: n - 1 }
    }

    pub fn is_leaf(self) -> bool {
        self.lo == self.hi
    }

    pub fn children(self) -> (TreeNode, TreeNode) {
        let m = (self.lo + self.hi) / 2;
        (TreeNode { lo: self.lo, hi: m }, TreeNode { lo: m + 1, hi: self.hi })
    }

    fn contains_any(self, ones: &[usize]) -> bool {
        ones.iter().any(|&i| self.lo <= i && i <= self.hi)
    }
}

/// Where traversal decisions come from.
pub enum Decisions<'a> {
    /// Gates follow the mode, leaves are Bernoulli draws.
    Model(&'a mut Rng),
    /// Every gate and leaf decision is read from the list in visiting order;
    /// the model's probabilities are still computed.
    Scripted(&'a [bool], usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Left,
    Right,
}

/// Parameters of one rank's decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoder {
    pub hidden: usize,
    mlp_cat: Mlp,
    mlp_left: Mlp,
    mlp_right: Mlp,
    mlp_leaf: Mlp,
    /// Learned inputs for the LSTM cell: row 0 left, row 1 right.
    direction: ParamId,
    lstm: LstmCell,
    tree: TreeCell,
    summary: AttentionSummarizer,
}

/// One sampled row.
#[derive(Debug, Clone)]
pub struct RowSample {
    pub ones: Vec<usize>,
    pub visited: usize,
    pub g_new: Var,
}

/// A sampled matrix with zero rows removed, plus per-attempt traces.
#[derive(Debug, Clone)]
pub struct MatrixSample {
    pub matrix: SparseBinary,
    /// (ones, visited tree nodes) of every attempted row, rejected ones included.
    pub attempts: Vec<(usize, usize)>,
    /// Rows that still were singletons after the resample cap.
    pub exhausted: usize,
}

struct Walk<'a, 'b> {
    t: &'a mut Tape,
    s: &'a ParamStore,
    hp: DecoderHyperparams,
    n_max: usize,
    src: Decisions<'b>,
    ones: Vec<usize>,
    visited: usize,
    /// Soft row entries (leaf index, value) when building soft rows.
    soft: Option<Vec<(usize, Var)>>,
}

impl Decoder {
    pub fn new(store: &mut ParamStore, name: &str, hidden: usize, rng: &mut Rng) -> Self {
        let act = Activation::LeakyRelu(crate::encoder::LEAKY_SLOPE);
        let h = hidden;
        Decoder {
            hidden,
            mlp_cat: Mlp::new(store, &format!("{name}.cat"), &[2 * h, h, h], act, rng),
            mlp_left: Mlp::new(store, &format!("{name}.left"), &[h, h, 1], act, rng),
            mlp_right: Mlp::new(store, &format!("{name}.right"), &[h, h, 1], act, rng),
            mlp_leaf: Mlp::new(store, &format!("{name}.leaf"), &[h, h, 1], act, rng),
            direction: store.xavier(format!("{name}.dir"), 2, h, rng),
            lstm: LstmCell::new(store, &format!("{name}.lstm"), h, h, rng),
            tree: TreeCell::new(store, &format!("{name}.tree"), h, rng),
            summary: AttentionSummarizer::new(store, &format!("{name}.summary"), h, rng),
        }
    }

    fn zeros(&self, t: &mut Tape) -> Var {
        t.constant(Mat::zeros(1, self.hidden))
    }

    fn descend(&self, t: &mut Tape, s: &ParamStore, h: Var, c: Var, g: Gate) -> Result<(Var, Var)> {
        let d = t.param(s, self.direction);
        let x = t.slice_rows(d, usize::from(g == Gate::Right), 1)?;
        self.lstm.forward(t, s, x, h, c)
    }

    fn gate_logit(&self, t: &mut Tape, s: &ParamStore, h: Var, g: Gate) -> Result<Var> {
        match g {
            Gate::Left => self.mlp_left.forward(t, s, h),
            Gate::Right => self.mlp_right.forward(t, s, h),
        }
    }

    /// Gate value used for the threshold test: the probability itself in
    /// deterministic mode, a relaxed Bernoulli sample in stochastic mode.
    fn gate_value(t: &mut Tape, hp: &DecoderHyperparams, logit: Var, rng: Option<&mut Rng>) -> Var {
        match (hp.mode, rng) {
            (TraversalMode::Stochastic, Some(r)) => {
                let u: f64 = r.gen::<f64>().clamp(1e-12, 1.0 - 1e-12);
                let noise = u.ln() - (1.0 - u).ln();
                let z = t.add_scalar(logit, noise);
                let z = t.scale(z, 1.0 / hp.temperature);
                t.sigmoid(z)
            }
            _ => t.sigmoid(logit),
        }
    }

    fn next_scripted(src: &mut Decisions<'_>) -> Option<bool> {
        match src {
            Decisions::Scripted(list, pos) => {
                let d = list.get(*pos).copied().unwrap_or(false);
                *pos += 1;
                Some(d)
            }
            Decisions::Model(_) => None,
        }
    }

    fn walk(&self, w: &mut Walk<'_, '_>, h: Var, c: Var, node: TreeNode, path: Option<Var>) -> Result<(Var, Var)> {
        w.visited += 1;
        if w.ones.len() >= w.n_max {
            return Ok((h, c));
        }
        if node.is_leaf() {
            let logit = self.mlp_leaf.forward(w.t, w.s, h)?;
            let p = w.t.sigmoid(logit);
            let set = match Self::next_scripted(&mut w.src) {
                Some(d) => d,
                None => match &mut w.src {
                    Decisions::Model(r) => r.gen::<f64>() < w.t.scalar(p),
                    Decisions::Scripted(..) => unreachable!(),
                },
            };
            if let (Some(soft), Some(path)) = (w.soft.as_mut(), path) {
                let v = w.t.mul(path, p)?;
                soft.push((node.lo, v));
            }
            if set {
                w.ones.push(node.lo);
            }
            return Ok((h, c));
        }
        let (left, right) = node.children();
        let mut kids = [None, None];
        for (k, (g, child)) in [(Gate::Left, left), (Gate::Right, right)].into_iter().enumerate() {
            let logit = self.gate_logit(w.t, w.s, h, g)?;
            let (open, value) = match Self::next_scripted(&mut w.src) {
                Some(d) => (d, None),
                None => {
                    let rng = match &mut w.src {
                        Decisions::Model(r) => Some(&mut **r),
                        Decisions::Scripted(..) => None,
                    };
                    let v = Self::gate_value(w.t, &w.hp, logit, rng);
                    (w.t.scalar(v) > w.hp.p_min, Some(v))
                }
            };
            if open {
                let (hc, cc) = self.descend(w.t, w.s, h, c, g)?;
                let child_path = match (path, value, w.soft.is_some()) {
                    (Some(p), Some(v), true) => Some(w.t.mul(p, v)?),
                    _ => None,
                };
                kids[k] = Some(self.walk(w, hc, cc, child, child_path)?);
            }
        }
        let z = self.zeros(w.t);
        let l = kids[0].unwrap_or((z, z));
        let r = kids[1].unwrap_or((z, z));
        self.tree.forward(w.t, w.s, l, r)
    }

    /// Walk the tree once from `h_root` over `n` columns. The returned
    /// `g_new` is the root's merged hidden state.
    pub fn sample_row(&self, t: &mut Tape, s: &ParamStore, h_root: Var, n: usize, hp: &DecoderHyperparams, src: Decisions<'_>) -> Result<RowSample> {
        hp.check()?;
        if n == 0 {
            return Ok(RowSample { ones: vec![], visited: 0, g_new: h_root });
        }
        let c = self.zeros(t);
        let mut w = Walk {
            t,
            s,
            hp: *hp,
            n_max: hp.n_max.min(n),
            src,
            ones: Vec::new(),
            visited: 0,
            soft: None,
        };
        let (g_new, _) = self.walk(&mut w, h_root, c, TreeNode::root(n), None)?;
        let mut ones = w.ones;
        ones.sort_unstable();
        Ok(RowSample { ones, visited: w.visited, g_new })
    }

    fn root_input(&self, t: &mut Tape, s: &ParamStore, h_enc: Var, i: usize, g: Var) -> Result<Var> {
        let h = t.slice_rows(h_enc, i, 1)?;
        let x = t.concat_cols(&[h, g])?;
        self.mlp_cat.forward(t, s, x)
    }

    /// Sample a co-incidence matrix from the rows of `h_enc`.
    ///
    /// Each of `n_new_cell` passes visits every encoded row; a singleton row
    /// is redrawn up to `max_resample_attempts` times and then replaced by a
    /// zero row. Zero rows are dropped from the result.
    pub fn sample_matrix(&self, t: &mut Tape, s: &ParamStore, h_enc: Var, n: usize, hp: &DecoderHyperparams, rng: &mut Rng) -> Result<MatrixSample> {
        hp.check()?;
        let rows = t.shape(h_enc).0;
        let mut g = self.zeros(t);
        let mut state = SummaryState::default();
        let mut out = Vec::new();
        let mut attempts = Vec::new();
        let mut exhausted = 0;
        for _ in 0..hp.n_new_cell {
            for i in 0..rows {
                let h_root = self.root_input(t, s, h_enc, i, g)?;
                let mut kept = None;
                let mut last_g = h_root;
                for _ in 0..hp.max_resample_attempts.max(1) {
                    let r = self.sample_row(t, s, h_root, n, hp, Decisions::Model(rng))?;
                    attempts.push((r.ones.len(), r.visited));
                    last_g = r.g_new;
                    if hp.row_is_valid(r.ones.len()) {
                        kept = Some(r.ones);
                        break;
                    }
                }
                match kept {
                    Some(ones) if !ones.is_empty() => out.push(ones),
                    Some(_) => {}
                    None => exhausted += 1,
                }
                g = self.summary.push(t, s, &mut state, last_g)?;
            }
        }
        Ok(MatrixSample {
            matrix: SparseBinary::new(out, n),
            attempts,
            exhausted,
        })
    }

    fn forced(&self, w: &mut Walk<'_, '_>, h: Var, c: Var, node: TreeNode, target: &[usize], loss: &mut Vec<Var>) -> Result<(Var, Var)> {
        w.visited += 1;
        if node.is_leaf() {
            let logit = self.mlp_leaf.forward(w.t, w.s, h)?;
            let p = w.t.sigmoid(logit);
            let bit = f64::from(u8::from(target.contains(&node.lo)));
            loss.push(w.t.bce(p, &Mat::filled(1, 1, bit))?);
            if bit > 0.0 {
                w.ones.push(node.lo);
            }
            return Ok((h, c));
        }
        let (left, right) = node.children();
        let mut kids = [None, None];
        for (k, (g, child)) in [(Gate::Left, left), (Gate::Right, right)].into_iter().enumerate() {
            if w.ones.len() >= w.n_max {
                break;
            }
            let logit = self.gate_logit(w.t, w.s, h, g)?;
            let rng = match &mut w.src {
                Decisions::Model(r) => Some(&mut **r),
                Decisions::Scripted(..) => None,
            };
            let v = Self::gate_value(w.t, &w.hp, logit, rng);
            let label = child.contains_any(target);
            loss.push(w.t.bce(v, &Mat::filled(1, 1, f64::from(u8::from(label))))?);
            if label {
                let (hc, cc) = self.descend(w.t, w.s, h, c, g)?;
                kids[k] = Some(self.forced(w, hc, cc, child, target, loss)?);
            }
        }
        let z = self.zeros(w.t);
        let l = kids[0].unwrap_or((z, z));
        let r = kids[1].unwrap_or((z, z));
        self.tree.forward(w.t, w.s, l, r)
    }

    /// Teacher-forced BCE over the rows of `h_enc`.
    ///
    /// Row i is steered along `targets[i]` (a zero row when `targets` is
    /// shorter): each gate is scored against whether its half holds a target
    /// one, and only such halves are entered. Reached leaves are scored
    /// against their bit. Once `n_max` ones are placed the remaining gates of
    /// that row are not scored. In stochastic mode the scored gate value is
    /// the relaxed Bernoulli sample. Targets beyond the encoded rows are
    /// ignored.
    pub fn teacher_forced_bce(&self, t: &mut Tape, s: &ParamStore, h_enc: Var, targets: &[Vec<usize>], n: usize, hp: &DecoderHyperparams, rng: &mut Rng) -> Result<Option<Var>> {
        hp.check()?;
        let rows = t.shape(h_enc).0;
        if rows == 0 || n == 0 {
            return Ok(None);
        }
        let mut g = self.zeros(t);
        let mut state = SummaryState::default();
        let mut terms = Vec::new();
        for i in 0..rows {
            let target: &[usize] = targets.get(i).map_or(&[], |r| r.as_slice());
            let h_root = self.root_input(t, s, h_enc, i, g)?;
            let c = self.zeros(t);
            let mut w = Walk {
                t,
                s,
                hp: *hp,
                n_max: hp.n_max.min(n),
                src: Decisions::Model(rng),
                ones: Vec::new(),
                visited: 0,
                soft: None,
            };
            let (g_new, _) = self.forced(&mut w, h_root, c, TreeNode::root(n), target, &mut terms)?;
            g = self.summary.push(t, s, &mut state, g_new)?;
        }
        let all = t.concat_rows(&terms)?;
        Ok(Some(t.sum(all)))
    }

    /// Free-running soft rows: entry j is the product of the gate values on
    /// the path to leaf j times its leaf probability, 0 for leaves never
    /// reached. One row per encoded row.
    pub fn soft_rows(&self, t: &mut Tape, s: &ParamStore, h_enc: Var, n: usize, hp: &DecoderHyperparams, rng: &mut Rng) -> Result<Var> {
        hp.check()?;
        let rows = t.shape(h_enc).0;
        let mut g = self.zeros(t);
        let mut state = SummaryState::default();
        let mut out = Vec::with_capacity(rows);
        for i in 0..rows {
            let h_root = self.root_input(t, s, h_enc, i, g)?;
            let c = self.zeros(t);
            let one = t.constant(Mat::filled(1, 1, 1.0));
            let mut w = Walk {
                t,
                s,
                hp: *hp,
                n_max: hp.n_max.min(n),
                src: Decisions::Model(rng),
                ones: Vec::new(),
                visited: 0,
                soft: Some(Vec::new()),
            };
            let (g_new, _) = self.walk(&mut w, h_root, c, TreeNode::root(n), Some(one))?;
            let entries = w.soft.take().unwrap_or_default();
            let zero = t.constant(Mat::zeros(1, 1));
            let mut cols = vec![zero; n];
            for (j, v) in entries {
                cols[j] = v;
            }
            out.push(t.concat_cols(&cols)?);
            g = self.summary.push(t, s, &mut state, g_new)?;
        }
        if out.is_empty() {
            return Ok(t.constant(Mat::zeros(0, n)));
        }
        t.concat_rows(&out)
    }

    /// Sinkhorn-cosine loss between soft rows and the target matrix. Both
    /// sides are padded with zero rows to a common count; the transport plan
    /// is computed on the current costs and held fixed, so gradients flow
    /// through the cost matrix only.
    pub fn sinkhorn_cosine_loss(&self, t: &mut Tape, s: &ParamStore, h_enc: Var, target: &SparseBinary, hp: &DecoderHyperparams, epsilon: f64, iters: usize, rng: &mut Rng) -> Result<Option<Var>> {
        let n = target.num_cols;
        let soft = self.soft_rows(t, s, h_enc, n, hp, rng)?;
        let (pr, tr) = (t.shape(soft).0, target.num_rows());
        let m = pr.max(tr);
        if m == 0 || n == 0 {
            return Ok(None);
        }
        let pred = if pr < m {
            let pad = t.constant(Mat::zeros(m - pr, n));
            t.concat_rows(&[soft, pad])?
        } else {
            soft
        };
        let tgt = crate::matching::pad_rows(&target.to_dense(), m);
        let tv = t.constant(tgt);
        let cost = t.pairwise_cosine(pred, tv)?;
        let plan = sinkhorn(t.value(cost), epsilon, iters)?.plan;
        let w = t.constant(plan.map(|x| x * m as f64));
        let weighted = t.mul(cost, w)?;
        Ok(Some(t.sum(weighted)))
    }
}

/// Probability helper for callers that want gate probabilities as numbers.
pub fn probability(logit: f64) -> f64 {
    sigmoid(logit)
}
