//! Layers built on the tape: affine maps, MLPs, an LSTM cell, a binary
//! tree LSTM cell and a causal self-attention summarizer.

use super::params::{ParamId, ParamStore};
use super::{Tape, Var};
use crate::error::Result;
use crate::linalg::Mat;
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    LeakyRelu(f64),
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, t: &mut Tape, x: Var) -> Var {
        match self {
            Activation::LeakyRelu(s) => t.leaky_relu(x, s),
            Activation::Tanh => t.tanh(x),
            Activation::Identity => x,
        }
    }
}

/// `x W + b` with W: in×out, b: 1×out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
}

impl Linear {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, output: usize, rng: &mut Rng) -> Self {
        Linear {
            w: store.xavier(format!("{name}.w"), input, output, rng),
            b: store.zeros(format!("{name}.b"), 1, output),
        }
    }

    pub fn forward(&self, t: &mut Tape, store: &ParamStore, x: Var) -> Result<Var> {
        let w = t.param(store, self.w);
        let b = t.param(store, self.b);
        let y = t.matmul(x, w)?;
        t.add_row(y, b)
    }
}

/// Affine layers with `act` between them; the last layer is left linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    pub act: Activation,
}

impl Mlp {
    pub fn new(store: &mut ParamStore, name: &str, dims: &[usize], act: Activation, rng: &mut Rng) -> Self {
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, d)| Linear::new(store, &format!("{name}.{i}"), d[0], d[1], rng))
            .collect();
        Mlp { layers, act }
    }

    pub fn forward(&self, t: &mut Tape, store: &ParamStore, mut x: Var) -> Result<Var> {
        let n = self.layers.len();
        for (i, l) in self.layers.iter().enumerate() {
            x = l.forward(t, store, x)?;
            if i + 1 < n {
                x = self.act.apply(t, x);
            }
        }
        Ok(x)
    }
}

/// Standard LSTM cell on row vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    pub wx: ParamId,
    pub wh: ParamId,
    pub b: ParamId,
    pub hidden: usize,
}

impl LstmCell {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut Rng) -> Self {
        LstmCell {
            wx: store.xavier(format!("{name}.wx"), input, 4 * hidden, rng),
            wh: store.xavier(format!("{name}.wh"), hidden, 4 * hidden, rng),
            b: store.zeros(format!("{name}.b"), 1, 4 * hidden),
            hidden,
        }
    }

    pub fn forward(&self, t: &mut Tape, store: &ParamStore, x: Var, h: Var, c: Var) -> Result<(Var, Var)> {
        let hs = self.hidden;
        let (wx, wh, b) = (t.param(store, self.wx), t.param(store, self.wh), t.param(store, self.b));
        let zx = t.matmul(x, wx)?;
        let zh = t.matmul(h, wh)?;
        let z = t.add(zx, zh)?;
        let z = t.add_row(z, b)?;
        let gate = |t: &mut Tape, k: usize| t.slice_cols(z, k * hs, hs);
        let (i, f, o, u) = (gate(t, 0)?, gate(t, 1)?, gate(t, 2)?, gate(t, 3)?);
        let (i, f, o, u) = (t.sigmoid(i), t.sigmoid(f), t.sigmoid(o), t.tanh(u));
        let fc = t.mul(f, c)?;
        let iu = t.mul(i, u)?;
        let c2 = t.add(fc, iu)?;
        let tc = t.tanh(c2);
        let h2 = t.mul(o, tc)?;
        Ok((h2, c2))
    }
}

/// Binary tree LSTM: merges left and right child states with separate
/// forget gates. Missing children are passed as zero vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeCell {
    pub wl: ParamId,
    pub wr: ParamId,
    pub b: ParamId,
    pub hidden: usize,
}

impl TreeCell {
    pub fn new(store: &mut ParamStore, name: &str, hidden: usize, rng: &mut Rng) -> Self {
        TreeCell {
            wl: store.xavier(format!("{name}.wl"), hidden, 5 * hidden, rng),
            wr: store.xavier(format!("{name}.wr"), hidden, 5 * hidden, rng),
            b: store.zeros(format!("{name}.b"), 1, 5 * hidden),
            hidden,
        }
    }

    pub fn forward(&self, t: &mut Tape, store: &ParamStore, (hl, cl): (Var, Var), (hr, cr): (Var, Var)) -> Result<(Var, Var)> {
        let hs = self.hidden;
        let (wl, wr, b) = (t.param(store, self.wl), t.param(store, self.wr), t.param(store, self.b));
        let zl = t.matmul(hl, wl)?;
        let zr = t.matmul(hr, wr)?;
        let z = t.add(zl, zr)?;
        let z = t.add_row(z, b)?;
        let gate = |t: &mut Tape, k: usize| t.slice_cols(z, k * hs, hs);
        let (i, fl, fr, o, u) = (gate(t, 0)?, gate(t, 1)?, gate(t, 2)?, gate(t, 3)?, gate(t, 4)?);
        let (i, fl, fr, o, u) = (t.sigmoid(i), t.sigmoid(fl), t.sigmoid(fr), t.sigmoid(o), t.tanh(u));
        let iu = t.mul(i, u)?;
        let lc = t.mul(fl, cl)?;
        let rc = t.mul(fr, cr)?;
        let c = t.add(iu, lc)?;
        let c = t.add(c, rc)?;
        let tc = t.tanh(c);
        let h = t.mul(o, tc)?;
        Ok((h, c))
    }
}

/// Keys and values of everything summarized so far on one tape.
#[derive(Debug, Clone, Default)]
pub struct SummaryState {
    keys: Vec<Var>,
    values: Vec<Var>,
}

impl SummaryState {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// One causal self-attention layer with sinusoidal positions. Appending
/// `x` and reading the last position gives
/// `x + softmax(q Kᵀ / √H) V W_o`, where q, K, V are projections of the
/// position-encoded history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionSummarizer {
    pub wq: ParamId,
    pub wk: ParamId,
    pub wv: ParamId,
    pub wo: ParamId,
    pub hidden: usize,
}

pub fn sinusoidal(pos: usize, dim: usize) -> Mat {
    let mut m = Mat::zeros(1, dim);
    for i in 0..dim {
        let k = (i / 2 * 2) as f64 / dim as f64;
        let angle = pos as f64 / 10000f64.powf(k);
        m.data[i] = if i % 2 == 0 { angle.sin() } else { angle.cos() };
    }
    m
}

impl AttentionSummarizer {
    pub fn new(store: &mut ParamStore, name: &str, hidden: usize, rng: &mut Rng) -> Self {
        AttentionSummarizer {
            wq: store.xavier(format!("{name}.wq"), hidden, hidden, rng),
            wk: store.xavier(format!("{name}.wk"), hidden, hidden, rng),
            wv: store.xavier(format!("{name}.wv"), hidden, hidden, rng),
            wo: store.xavier(format!("{name}.wo"), hidden, hidden, rng),
            hidden,
        }
    }

    pub fn push(&self, t: &mut Tape, store: &ParamStore, state: &mut SummaryState, x: Var) -> Result<Var> {
        let pe = t.constant(sinusoidal(state.len(), self.hidden));
        let xp = t.add(x, pe)?;
        let (wq, wk, wv, wo) = (
            t.param(store, self.wq),
            t.param(store, self.wk),
            t.param(store, self.wv),
            t.param(store, self.wo),
        );
        let k = t.matmul(xp, wk)?;
        let v = t.matmul(xp, wv)?;
        state.keys.push(k);
        state.values.push(v);
        let q = t.matmul(xp, wq)?;
        let keys = t.concat_rows(&state.keys)?;
        let vals = t.concat_rows(&state.values)?;
        let kt = t.transpose(keys);
        let scores = t.matmul(q, kt)?;
        let scores = t.scale(scores, 1.0 / (self.hidden as f64).sqrt());
        let ones = Mat::filled(1, state.len(), 1.0);
        let att = t.masked_row_softmax(scores, &ones)?;
        let ctx = t.matmul(att, vals)?;
        let out = t.matmul(ctx, wo)?;
        t.add(x, out)
    }
}
