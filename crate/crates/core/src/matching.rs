//! Row costs, assignment and transport matchers, and the row-wise
//! permutation-invariant losses built from them.
//!
//! The four loss variants pair a row cost with a matcher:
//! HBCE (Hungarian, BCE), SBCE (Sinkhorn, BCE), HC (Hungarian, cosine) and
//! SC (Sinkhorn, cosine). Before matching, the matrix with fewer rows is
//! padded with zero rows.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use serde::{Deserialize, Serialize};

/// Probabilities are clamped into `[EPS_P, 1 - EPS_P]` before taking logs.
pub const EPS_P: f64 = 1e-7;
/// Default entropic regularization for training and evaluation.
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_SINKHORN_ITERS: usize = 50;

fn same_cols(op: &'static str, a: &Mat, b: &Mat) -> Result<()> {
    if a.cols != b.cols {
        return Err(Error::Shape {
            op,
            detail: format!("column counts {} and {} differ", a.cols, b.cols),
        });
    }
    Ok(())
}

/// `C_ij = -Σ_d [ t_jd ln p_id + (1 - t_jd) ln(1 - p_id) ]`.
pub fn pairwise_bce(pred: &Mat, target: &Mat) -> Result<Mat> {
    same_cols("pairwise_bce", pred, target)?;
    let mut c = Mat::zeros(pred.rows, target.rows);
    for i in 0..pred.rows {
        let p = pred.row(i);
        for j in 0..target.rows {
            let t = target.row(j);
            let mut s = 0.0;
            for (&pd, &td) in p.iter().zip(t) {
                let pd = pd.clamp(EPS_P, 1.0 - EPS_P);
                s -= td * pd.ln() + (1.0 - td) * (1.0 - pd).ln();
            }
            c[(i, j)] = s;
        }
    }
    Ok(c)
}

/// `C_ij = 1 - cos(a_i, b_j)`; a zero-norm row has similarity 0, so cost 1.
pub fn pairwise_cosine(a: &Mat, b: &Mat) -> Result<Mat> {
    same_cols("pairwise_cosine", a, b)?;
    // squared norms, so identical rows give dot / sqrt(n * n) = 1 exactly
    let sq = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let na: Vec<f64> = (0..a.rows).map(|i| sq(a.row(i))).collect();
    let nb: Vec<f64> = (0..b.rows).map(|j| sq(b.row(j))).collect();
    let mut c = Mat::zeros(a.rows, b.rows);
    for i in 0..a.rows {
        for j in 0..b.rows {
            let sim = if na[i] == 0.0 || nb[j] == 0.0 {
                0.0
            } else {
                a.row(i).iter().zip(b.row(j)).map(|(x, y)| x * y).sum::<f64>() / (na[i] * nb[j]).sqrt()
            };
            // rounding can push identical rows just past 1
            c[(i, j)] = 1.0 - sim.clamp(-1.0, 1.0);
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `sigma[i]` is the column matched to row i, `None` if row i went to a
    /// zero-cost dummy column (only when rows > cols).
    pub sigma: Vec<Option<usize>>,
    pub total_cost: f64,
}

/// Minimum-cost assignment via the O(n³) shortest augmenting path method
/// with row/column potentials. Rectangular inputs are padded with zero-cost
/// dummies. Matched costs are summed in ascending order, so the total does
/// not depend on how the rows or columns are ordered.
pub fn hungarian(c: &Mat) -> Assignment {
    let (nr, nc) = (c.rows, c.cols);
    let n = nr.max(nc);
    if n == 0 {
        return Assignment {
            sigma: vec![],
            total_cost: 0.0,
        };
    }
    let cost = |i: usize, j: usize| if i < nr && j < nc { c[(i, j)] } else { 0.0 };
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut sigma = vec![None; nr];
    for j in 1..=n {
        let i = p[j] - 1;
        if i < nr && j - 1 < nc {
            sigma[i] = Some(j - 1);
        }
    }
    let mut matched: Vec<f64> = sigma.iter().enumerate().filter_map(|(i, s)| s.map(|j| c[(i, j)])).collect();
    matched.sort_by(f64::total_cmp);
    let total_cost = matched.iter().sum();
    Assignment { sigma, total_cost }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// Plan rounded onto the transport polytope: its marginals equal the
    /// uniform targets up to floating point.
    pub plan: Mat,
    /// `rows · Σ π_ij C_ij` using the rounded plan.
    pub distance: f64,
    /// Largest absolute row or column marginal error of the unrounded
    /// iterate, before the rounding step.
    pub raw_marginal_error: f64,
}

fn logsumexp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Entropic optimal transport between uniform marginals.
///
/// Runs in the log domain on dual potentials so small `epsilon` cannot
/// overflow. The regularization is annealed: iteration k uses
/// `max(epsilon, range(C) / 2^k)`, which reaches the target within a few
/// iterations and avoids the slow mixing of plain small-epsilon Sinkhorn.
/// The final iterate is rounded onto the polytope of plans with the exact
/// marginals. The plan is uniform for a constant cost matrix.
pub fn sinkhorn(c: &Mat, epsilon: f64, iters: usize) -> Result<TransportPlan> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("sinkhorn epsilon must be > 0, got {epsilon}")));
    }
    if !c.is_finite() {
        return Err(Error::InvalidArgument("sinkhorn cost matrix has non-finite entries".into()));
    }
    let (n, m) = (c.rows, c.cols);
    if n == 0 || m == 0 {
        return Ok(TransportPlan {
            plan: Mat::zeros(n, m),
            distance: 0.0,
            raw_marginal_error: 0.0,
        });
    }
    let (lmu, lnu) = (-(n as f64).ln(), -(m as f64).ln());
    let lo = c.data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut eps = epsilon;
    for k in 0..iters {
        eps = epsilon.max(range * 0.5f64.powi(k as i32));
        for i in 0..n {
            let lse = logsumexp((0..m).map(|j| (g[j] - c[(i, j)]) / eps));
            f[i] = eps * (lmu - lse);
        }
        for j in 0..m {
            let lse = logsumexp((0..n).map(|i| (f[i] - c[(i, j)]) / eps));
            g[j] = eps * (lnu - lse);
        }
    }
    let mut plan = Mat::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            plan[(i, j)] = ((f[i] + g[j] - c[(i, j)]) / eps).exp();
        }
    }
    let (mu, nu) = (1.0 / n as f64, 1.0 / m as f64);
    let raw_marginal_error = marginal_error(&plan, mu, nu);
    round_to_polytope(&mut plan, mu, nu);
    let distance = n as f64 * plan.data.iter().zip(&c.data).map(|(p, x)| p * x).sum::<f64>();
    Ok(TransportPlan {
        plan,
        distance,
        raw_marginal_error,
    })
}

/// Largest absolute deviation of row sums from `mu` and column sums from `nu`.
pub fn marginal_error(plan: &Mat, mu: f64, nu: f64) -> f64 {
    let mut err: f64 = 0.0;
    for i in 0..plan.rows {
        err = err.max((plan.row(i).iter().sum::<f64>() - mu).abs());
    }
    for j in 0..plan.cols {
        err = err.max(((0..plan.rows).map(|i| plan[(i, j)]).sum::<f64>() - nu).abs());
    }
    err
}

/// Scale rows then columns down to their targets, then spread the missing
/// mass as a rank-one correction.
fn round_to_polytope(p: &mut Mat, mu: f64, nu: f64) {
    let (n, m) = (p.rows, p.cols);
    for i in 0..n {
        let s: f64 = p.row(i).iter().sum();
        if s > mu {
            let k = mu / s;
            p.row_mut(i).iter_mut().for_each(|x| *x *= k);
        }
    }
    for j in 0..m {
        let s: f64 = (0..n).map(|i| p[(i, j)]).sum();
        if s > nu {
            let k = nu / s;
            (0..n).for_each(|i| p[(i, j)] *= k);
        }
    }
    let er: Vec<f64> = (0..n).map(|i| mu - p.row(i).iter().sum::<f64>()).collect();
    let ec: Vec<f64> = (0..m).map(|j| nu - (0..n).map(|i| p[(i, j)]).sum::<f64>()).collect();
    let total: f64 = er.iter().sum();
    if total > 0.0 {
        for i in 0..n {
            for j in 0..m {
                p[(i, j)] += er[i] * ec[j] / total;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowLoss {
    Bce,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matcher {
    Hungarian,
    Sinkhorn { epsilon: f64, iters: usize },
}

impl Matcher {
    pub fn sinkhorn_default() -> Self {
        Matcher::Sinkhorn {
            epsilon: DEFAULT_EPSILON,
            iters: DEFAULT_SINKHORN_ITERS,
        }
    }
}

/// The four named loss variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Hbce,
    Sbce,
    Hc,
    Sc,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Hbce, Variant::Hc, Variant::Sbce, Variant::Sc];

    pub fn parts(self) -> (RowLoss, Matcher) {
        match self {
            Variant::Hbce => (RowLoss::Bce, Matcher::Hungarian),
            Variant::Sbce => (RowLoss::Bce, Matcher::sinkhorn_default()),
            Variant::Hc => (RowLoss::Cosine, Matcher::Hungarian),
            Variant::Sc => (RowLoss::Cosine, Matcher::sinkhorn_default()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Hbce => "hbce",
            Variant::Sbce => "sbce",
            Variant::Hc => "hc",
            Variant::Sc => "sc",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s.to_ascii_lowercase())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwplValue {
    pub value: f64,
    /// Set when the value is not finite.
    pub flagged: bool,
}

/// Append zero rows so `m` has `rows` rows.
pub fn pad_rows(m: &Mat, rows: usize) -> Mat {
    let mut out = m.clone();
    if rows > m.rows {
        out.data.resize(rows * m.cols, 0.0);
        out.rows = rows;
    }
    out
}

/// Row-wise permutation-invariant loss between predicted and target rows.
pub fn rwpl(pred: &Mat, target: &Mat, row_loss: RowLoss, matcher: Matcher) -> Result<RwplValue> {
    same_cols("rwpl", pred, target)?;
    let n = pred.rows.max(target.rows);
    let (p, t) = (pad_rows(pred, n), pad_rows(target, n));
    let c = match row_loss {
        RowLoss::Bce => pairwise_bce(&p, &t)?,
        RowLoss::Cosine => pairwise_cosine(&p, &t)?,
    };
    let value = match matcher {
        Matcher::Hungarian => hungarian(&c).total_cost,
        Matcher::Sinkhorn { epsilon, iters } => sinkhorn(&c, epsilon, iters)?.distance,
    };
    Ok(RwplValue {
        value,
        flagged: !value.is_finite(),
    })
}

pub fn rwpl_variant(pred: &Mat, target: &Mat, v: Variant) -> Result<RwplValue> {
    let (l, m) = v.parts();
    rwpl(pred, target, l, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bce_half_is_log2_per_column() {
        let p = Mat::filled(1, 4, 0.5);
        let t = Mat::from_vec(1, 4, vec![1., 0., 1., 1.]);
        let c = pairwise_bce(&p, &t).unwrap();
        assert!((c[(0, 0)] - 4.0 * 2f64.ln()).abs() < 1e-12);
        assert!(pairwise_bce(&p, &Mat::zeros(1, 3)).is_err());
    }

    #[test]
    fn bce_of_clamped_target_is_near_zero() {
        let t = Mat::from_vec(1, 3, vec![1., 0., 1.]);
        let c = pairwise_bce(&t, &t).unwrap();
        assert!(c[(0, 0)] < 1e-6);
    }

    #[test]
    fn cosine_conventions() {
        let a = Mat::from_vec(3, 3, vec![1., 1., 0., 0., 0., 1., 0., 0., 0.]);
        let c = pairwise_cosine(&a, &a).unwrap();
        assert!(c[(0, 0)].abs() < 1e-12);
        assert_eq!(c[(0, 1)], 1.0);
        assert_eq!(c[(2, 2)], 1.0);
    }

    #[test]
    fn hungarian_small_cases() {
        let c = Mat::from_vec(2, 2, vec![0., 1., 1., 0.]);
        let a = hungarian(&c);
        assert_eq!(a.sigma, vec![Some(0), Some(1)]);
        assert_eq!(a.total_cost, 0.0);
        let c = Mat::from_vec(2, 2, vec![1., 2., 3., 0.]);
        assert_eq!(hungarian(&c).total_cost, 1.0);
        let rect = Mat::from_vec(3, 1, vec![5., 1., 3.]);
        let a = hungarian(&rect);
        assert_eq!(a.total_cost, 1.0);
        assert_eq!(a.sigma, vec![None, Some(0), None]);
    }

    #[test]
    fn sinkhorn_constant_cost_is_uniform() {
        let c = Mat::filled(3, 4, 0.7);
        let t = sinkhorn(&c, 0.1, 50).unwrap();
        for x in &t.plan.data {
            assert!((x - 1.0 / 12.0).abs() < 1e-12);
        }
        assert!(sinkhorn(&c, 0.0, 50).is_err());
    }

    #[test]
    fn spurious_row_costs_one_under_cosine() {
        let t = Mat::from_vec(1, 3, vec![1., 1., 0.]);
        let p = Mat::from_vec(2, 3, vec![1., 1., 0., 0., 1., 1.]);
        let v = rwpl(&p, &t, RowLoss::Cosine, Matcher::Hungarian).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        assert!(!v.flagged);
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()), Some(v));
        }
    }
}
