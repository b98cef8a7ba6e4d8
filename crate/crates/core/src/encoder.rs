//! Two-level higher-order attention message passing over 0-, 1- and 2-cells.
//!
//! Level 1 pushes node features to edges and edges to 2-cells (and back),
//! level 2 adds attention within 1-cells (through shared 2-cells) and within
//! 2-cells (through shared 1-cells). The encoder returns one embedding row
//! per 1-cell and per 2-cell.
//!
//! Attention weights are a softmax of `LeakyReLU(e_ij)` over each cell's
//! neighbourhood; a cell with no neighbours receives a zero row.

use crate::autodiff::{ParamId, ParamStore, Tape, Var};
use crate::complex::{is_strict_subset, Cell, CombinatorialComplex};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Width of the node features (the node count when identity features are used).
    pub input_dim: usize,
    pub hidden: usize,
}

/// Output of an equal-rank attention push-forward.
pub struct Pushed {
    pub out: Var,
    pub att: Var,
}

/// `K = (G ⊙ att) H W` with `att` a masked softmax of
/// `LeakyReLU(a₁·(HW)_i + a₂·(HW)_j)` over `G`'s row support.
pub fn cc_attention_equal(t: &mut Tape, g: &Mat, h: Var, w: Var, a: Var) -> Result<Pushed> {
    let p = t.matmul(h, w)?;
    let hid = t.shape(p).1;
    let a1 = t.slice_rows(a, 0, hid)?;
    let a2 = t.slice_rows(a, hid, hid)?;
    let si = t.matmul(p, a1)?;
    let sj = t.matmul(p, a2)?;
    let e = t.outer_add(si, sj)?;
    let e = t.leaky_relu(e, LEAKY_SLOPE);
    let att = t.masked_row_softmax(e, g)?;
    let out = t.matmul(att, p)?;
    Ok(Pushed { out, att })
}

/// Output of an unequal-rank attention block.
pub struct Block {
    /// Messages arriving at the target cells (rows of `G`).
    pub to_t: Var,
    /// Messages arriving at the source cells, when requested.
    pub to_s: Option<Var>,
    pub att_st: Var,
    pub att_ts: Option<Var>,
}

/// Attention block for a neighbourhood `G` of shape |X^t|×|X^s|.
///
/// With `P_s = H_s W_s` and `P_t = H_t W_t`, the score for target i and
/// source j is `e_ij = LeakyReLU(a[:d]·P_s[j] + a[d:]·P_t[i])`. The reverse
/// scores use `rev(a)` on the swapped concatenation, which makes `f = eᵀ`;
/// the two directions differ only in which neighbourhood normalizes them.
pub fn cc_attention_unequal(
    t: &mut Tape,
    g: &Mat,
    hs: Var,
    ht: Var,
    ws: Var,
    wt: Var,
    a: Var,
    reverse: bool,
) -> Result<Block> {
    let ps = t.matmul(hs, ws)?;
    let pt = t.matmul(ht, wt)?;
    let ds = t.shape(ps).1;
    let dt = t.shape(pt).1;
    let a_s = t.slice_rows(a, 0, ds)?;
    let a_t = t.slice_rows(a, ds, dt)?;
    let ss = t.matmul(ps, a_s)?;
    let st = t.matmul(pt, a_t)?;
    let e = t.outer_add(st, ss)?;
    let e = t.leaky_relu(e, LEAKY_SLOPE);
    let att_st = t.masked_row_softmax(e, g)?;
    let to_t = t.matmul(att_st, ps)?;
    if !reverse {
        return Ok(Block {
            to_t,
            to_s: None,
            att_st,
            att_ts: None,
        });
    }
    let f = t.transpose(e);
    let att_ts = t.masked_row_softmax(f, &g.transpose())?;
    let to_s = t.matmul(att_ts, pt)?;
    Ok(Block {
        to_t,
        to_s: Some(to_s),
        att_st,
        att_ts: Some(att_ts),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Equal {
    w: ParamId,
    a: ParamId,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Unequal {
    ws: ParamId,
    wt: ParamId,
    a: ParamId,
}

impl Equal {
    fn new(store: &mut ParamStore, name: &str, din: usize, h: usize, rng: &mut Rng) -> Self {
        Equal {
            w: store.xavier(format!("{name}.w"), din, h, rng),
            a: store.xavier(format!("{name}.a"), 2 * h, 1, rng),
        }
    }

    fn run(&self, t: &mut Tape, s: &ParamStore, g: &Mat, h: Var) -> Result<Var> {
        let (w, a) = (t.param(s, self.w), t.param(s, self.a));
        Ok(cc_attention_equal(t, g, h, w, a)?.out)
    }
}

impl Unequal {
    fn new(store: &mut ParamStore, name: &str, ds: usize, dt: usize, h: usize, rng: &mut Rng) -> Self {
        Unequal {
            ws: store.xavier(format!("{name}.ws"), ds, h, rng),
            wt: store.xavier(format!("{name}.wt"), dt, h, rng),
            a: store.xavier(format!("{name}.a"), 2 * h, 1, rng),
        }
    }

    fn run(&self, t: &mut Tape, s: &ParamStore, g: &Mat, hs: Var, ht: Var, reverse: bool) -> Result<Block> {
        let (ws, wt, a) = (t.param(s, self.ws), t.param(s, self.wt), t.param(s, self.a));
        cc_attention_unequal(t, g, hs, ht, ws, wt, a, reverse)
    }
}

/// Parameters of both levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub config: EncoderConfig,
    l1_00: Equal,
    l1_01: Unequal,
    l1_12: Unequal,
    l2_00: Equal,
    l2_11: Equal,
    l2_22: Equal,
    l2_01: Unequal,
    l2_12: Unequal,
}

/// Initial cochains and neighbourhood masks for one complex.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderInputs {
    pub h0: Mat,
    pub h1: Mat,
    pub h2: Mat,
    /// Node adjacency through edges, |X⁰|×|X⁰|.
    pub a0: Mat,
    /// Edge adjacency through 2-cells, |X¹|×|X¹|.
    pub a1: Mat,
    /// 2-cell coadjacency through shared edges, |X²|×|X²|.
    pub coa2: Mat,
    /// Transposed node-to-edge incidence, |X¹|×|X⁰|.
    pub b01t: Mat,
    /// Transposed edge-to-2-cell incidence, |X²|×|X¹|.
    pub b12t: Mat,
}

fn pattern(rows: usize, cols: usize, linked: impl Fn(usize, usize) -> bool) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if linked(i, j) {
                m[(i, j)] = 1.0;
            }
        }
    }
    m
}

fn through(b: &Mat) -> Mat {
    // boolean B Bᵀ
    let p = b.matmul(&b.transpose());
    p.map(|x| if x > 0.0 { 1.0 } else { 0.0 })
}

impl EncoderInputs {
    /// Node features when present, identity otherwise; ones for edges and
    /// 2-cells.
    pub fn from_cc(cc: &CombinatorialComplex) -> Self {
        Self::from_cells(cc.num_nodes(), cc.cells1(), cc.cells2(), cc.features())
    }

    /// Same as [`EncoderInputs::from_cc`] but for cells in any order, so cell
    /// relabelings can be tested. Cells must be sorted internally.
    pub fn from_cells(n: usize, cells1: &[Cell], cells2: &[Cell], features: Option<&Mat>) -> Self {
        let h0 = features.cloned().unwrap_or_else(|| Mat::identity(n));
        let b01t = pattern(cells1.len(), n, |e, v| cells1[e].binary_search(&v).is_ok());
        let b12t = pattern(cells2.len(), cells1.len(), |z, e| is_strict_subset(&cells1[e], &cells2[z]));
        EncoderInputs {
            h0,
            h1: Mat::filled(cells1.len(), 1, 1.0),
            h2: Mat::filled(cells2.len(), 1, 1.0),
            a0: through(&b01t.transpose()),
            a1: through(&b12t.transpose()),
            coa2: through(&b12t),
            b01t,
            b12t,
        }
    }
}

/// Intermediate or final cochains.
#[derive(Debug, Clone, Copy)]
pub struct Cochains {
    pub h0: Var,
    pub h1: Var,
    pub h2: Var,
}

impl Encoder {
    pub fn new(store: &mut ParamStore, config: EncoderConfig, rng: &mut Rng) -> Self {
        let (d0, h) = (config.input_dim, config.hidden);
        Encoder {
            config,
            l1_00: Equal::new(store, "enc.l1.00", d0, h, rng),
            l1_01: Unequal::new(store, "enc.l1.01", d0, 1, h, rng),
            l1_12: Unequal::new(store, "enc.l1.12", 1, 1, h, rng),
            l2_00: Equal::new(store, "enc.l2.00", h, h, rng),
            l2_11: Equal::new(store, "enc.l2.11", h, h, rng),
            l2_22: Equal::new(store, "enc.l2.22", h, h, rng),
            l2_01: Unequal::new(store, "enc.l2.01", h, h, h, rng),
            l2_12: Unequal::new(store, "enc.l2.12", h, h, h, rng),
        }
    }

    fn act(t: &mut Tape, x: Var) -> Var {
        t.leaky_relu(x, LEAKY_SLOPE)
    }

    fn merge(t: &mut Tape, parts: &[Var]) -> Result<Var> {
        let mut acc = Self::act(t, parts[0]);
        for &p in &parts[1..] {
            let q = Self::act(t, p);
            acc = t.add(acc, q)?;
        }
        Ok(Self::act(t, acc))
    }

    /// First level: node self-attention plus the node/edge and edge/2-cell
    /// blocks in both directions.
    pub fn level1(&self, t: &mut Tape, s: &ParamStore, x: &EncoderInputs, h: Cochains) -> Result<Cochains> {
        let m00 = self.l1_00.run(t, s, &x.a0, h.h0)?;
        let b01 = self.l1_01.run(t, s, &x.b01t, h.h0, h.h1, true)?;
        let b12 = self.l1_12.run(t, s, &x.b12t, h.h1, h.h2, true)?;
        let m10 = b01.to_s.expect("reverse requested");
        let m21 = b12.to_s.expect("reverse requested");
        Ok(Cochains {
            h0: Self::merge(t, &[m00, m10])?,
            h1: Self::merge(t, &[b01.to_t, m21])?,
            h2: Self::merge(t, &[b12.to_t])?,
        })
    }

    /// Second level: self-attention in every rank plus node-to-edge,
    /// edge-to-node and edge-to-2-cell pushes.
    pub fn level2(&self, t: &mut Tape, s: &ParamStore, x: &EncoderInputs, i: Cochains) -> Result<Cochains> {
        let m00 = self.l2_00.run(t, s, &x.a0, i.h0)?;
        let m11 = self.l2_11.run(t, s, &x.a1, i.h1)?;
        let m22 = self.l2_22.run(t, s, &x.coa2, i.h2)?;
        let b01 = self.l2_01.run(t, s, &x.b01t, i.h0, i.h1, true)?;
        let b12 = self.l2_12.run(t, s, &x.b12t, i.h1, i.h2, false)?;
        let m10 = b01.to_s.expect("reverse requested");
        Ok(Cochains {
            h0: Self::merge(t, &[m00, m10])?,
            h1: Self::merge(t, &[m11, b01.to_t])?,
            h2: Self::merge(t, &[b12.to_t, m22])?,
        })
    }

    /// Both levels; returns all three final cochains.
    pub fn forward(&self, t: &mut Tape, s: &ParamStore, x: &EncoderInputs) -> Result<Cochains> {
        if x.h0.cols != self.config.input_dim {
            return Err(Error::Shape {
                op: "encoder",
                detail: format!("node features have width {}, encoder expects {}", x.h0.cols, self.config.input_dim),
            });
        }
        let h = Cochains {
            h0: t.constant(x.h0.clone()),
            h1: t.constant(x.h1.clone()),
            h2: t.constant(x.h2.clone()),
        };
        let i = self.level1(t, s, x, h)?;
        self.level2(t, s, x, i)
    }

    /// Edge and 2-cell embeddings for `cc`.
    pub fn encode(&self, t: &mut Tape, s: &ParamStore, cc: &CombinatorialComplex) -> Result<(Var, Var)> {
        let c = self.forward(t, s, &EncoderInputs::from_cc(cc))?;
        Ok((c.h1, c.h2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize, hidden: usize) -> (ParamStore, Encoder) {
        let mut s = ParamStore::new();
        let mut r = crate::rng::stream(5, "enc-test");
        let e = Encoder::new(&mut s, EncoderConfig { input_dim: n, hidden }, &mut r);
        (s, e)
    }

    #[test]
    fn single_cell_attention_is_one() {
        let mut t = Tape::new();
        let h = t.constant(Mat::from_vec(1, 2, vec![0.3, -0.7]));
        let w = t.constant(Mat::from_vec(2, 2, vec![1., 2., 3., 4.]));
        let a = t.constant(Mat::from_vec(4, 1, vec![0.1, 0.2, 0.3, 0.4]));
        let p = cc_attention_equal(&mut t, &Mat::filled(1, 1, 1.0), h, w, a).unwrap();
        assert_eq!(t.value(p.att).data, vec![1.0]);
        let hw = Mat::from_vec(1, 2, vec![0.3, -0.7]).matmul(&Mat::from_vec(2, 2, vec![1., 2., 3., 4.]));
        assert!(t.value(p.out).max_abs_diff(&hw) < 1e-15);
    }

    #[test]
    fn zero_neighbourhood_row_gives_zero_output() {
        let mut t = Tape::new();
        let h = t.constant(Mat::from_vec(2, 1, vec![1.0, 2.0]));
        let w = t.constant(Mat::from_vec(1, 2, vec![1.0, -1.0]));
        let a = t.constant(Mat::filled(4, 1, 0.5));
        let g = Mat::from_vec(2, 2, vec![1., 1., 0., 0.]);
        let p = cc_attention_equal(&mut t, &g, h, w, a).unwrap();
        assert_eq!(t.value(p.out).row(1), &[0.0, 0.0]);
    }

    #[test]
    fn unequal_pair_and_disconnected() {
        let mut t = Tape::new();
        let hs = t.constant(Mat::filled(1, 1, 1.0));
        let ht = t.constant(Mat::filled(1, 1, 2.0));
        let ws = t.constant(Mat::filled(1, 2, 0.5));
        let wt = t.constant(Mat::filled(1, 2, -0.5));
        let a = t.constant(Mat::from_vec(4, 1, vec![1., -2., 0.5, 3.]));
        let b = cc_attention_unequal(&mut t, &Mat::filled(1, 1, 1.0), hs, ht, ws, wt, a, true).unwrap();
        assert_eq!(t.value(b.att_st).data, vec![1.0]);
        assert_eq!(t.value(b.att_ts.unwrap()).data, vec![1.0]);
        let b = cc_attention_unequal(&mut t, &Mat::zeros(1, 1), hs, ht, ws, wt, a, true).unwrap();
        assert!(t.value(b.to_t).data.iter().all(|&x| x == 0.0));
        assert!(t.value(b.to_s.unwrap()).data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn shapes_without_two_cells() {
        let cc = CombinatorialComplex::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]], vec![]).unwrap();
        let (s, e) = setup(4, 6);
        let mut t = Tape::new();
        let (h1, h2) = e.encode(&mut t, &s, &cc).unwrap();
        assert_eq!(t.shape(h1), (3, 6));
        assert_eq!(t.shape(h2), (0, 6));
        assert!(t.value(h1).is_finite());
    }

    #[test]
    fn feature_width_checked() {
        let cc = CombinatorialComplex::new(3, vec![vec![0, 1]], vec![]).unwrap();
        let (s, e) = setup(5, 4);
        assert!(e.encode(&mut Tape::new(), &s, &cc).is_err());
    }
}
