//! Synthetic temporal networks and the constrained random baseline.

use crate::complex::{CcSeries, CoIncidenceMatrix, CombinatorialComplex, Graph, GraphSeries, SparseBinary};
use crate::error::{invalid, Result};
use crate::rng::{self, Rng};
use log::warn;
use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityDecayParams {
    pub timesteps: usize,
    pub num_communities: usize,
    pub nodes_per_community: usize,
    pub p_int: f64,
    pub p_ext: f64,
    pub f_dec: f64,
    pub decay_community: usize,
    pub seed: u64,
}

impl Default for CommunityDecayParams {
    fn default() -> Self {
        CommunityDecayParams {
            timesteps: 40,
            num_communities: 3,
            nodes_per_community: 15,
            p_int: 0.9,
            p_ext: 0.01,
            f_dec: 0.3,
            decay_community: 0,
            seed: 0,
        }
    }
}

impl CommunityDecayParams {
    fn check(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.p_int) || !unit(self.p_ext) || !unit(self.f_dec) {
            return invalid("p_int, p_ext and f_dec must lie in [0,1]");
        }
        if self.timesteps == 0 || self.num_communities == 0 {
            return invalid("timesteps and num_communities must be positive");
        }
        if self.decay_community >= self.num_communities {
            return invalid("decay_community out of range");
        }
        Ok(())
    }
}

/// A community-decay series plus any replacements that had to be skipped
/// because the chosen endpoint was already linked to every outside node.
#[derive(Debug, Clone)]
pub struct DecayRun {
    pub series: GraphSeries,
    pub warnings: Vec<String>,
}

/// Nodes are grouped in contiguous blocks: community of node i is
/// `i / nodes_per_community`.
pub fn gen_community_decay(p: &CommunityDecayParams) -> Result<DecayRun> {
    p.check()?;
    let n = p.num_communities * p.nodes_per_community;
    let comm = |i: usize| i / p.nodes_per_community;
    let mut r = rng::stream(p.seed, "community-decay");

    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            let prob = if comm(i) == comm(j) { p.p_int } else { p.p_ext };
            if r.gen::<f64>() < prob {
                edges.insert((i, j));
            }
        }
    }
    let outside: Vec<usize> = (0..n).filter(|&k| comm(k) != p.decay_community).collect();
    let mut graphs = vec![Graph::new(n, edges.iter().copied())?];
    let mut warnings = Vec::new();

    for t in 1..p.timesteps {
        let internal: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(i, j)| comm(i) == p.decay_community && comm(j) == p.decay_community)
            .collect();
        let k = (p.f_dec * internal.len() as f64).ceil() as usize;
        let k = k.min(internal.len());
        for idx in index::sample(&mut r, internal.len(), k) {
            let (a, b) = internal[idx];
            let keep = if r.gen::<bool>() { a } else { b };
            let eligible: Vec<usize> = outside
                .iter()
                .copied()
                .filter(|&o| !edges.contains(&(keep.min(o), keep.max(o))))
                .collect();
            match eligible.choose(&mut r) {
                Some(&o) => {
                    edges.remove(&(a, b));
                    edges.insert((keep.min(o), keep.max(o)));
                }
                None => {
                    let msg = format!("step {t}: node {keep} has no unlinked outside node; kept edge ({a},{b})");
                    warn!("{msg}");
                    warnings.push(msg);
                }
            }
        }
        graphs.push(Graph::new(n, edges.iter().copied())?);
    }
    Ok(DecayRun {
        series: GraphSeries::new(n, graphs, None)?,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaParams {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

/// Preferential attachment on a fixed node set of size `n`.
///
/// Timestep 0 is the complete graph on nodes `0..m`; step t attaches node
/// `m + t - 1` to m distinct earlier nodes drawn without replacement with
/// probability proportional to degree. When every candidate has degree 0
/// (only possible for m = 1 at the first arrival) the draw is uniform.
/// The series has `n - m` graphs.
pub fn gen_ba(p: &BaParams) -> Result<GraphSeries> {
    if p.m == 0 || p.m >= p.n {
        return invalid(format!("BA needs 1 <= m < n, got n={} m={}", p.n, p.m));
    }
    let mut r = rng::stream(p.seed, "ba");
    let mut edges: Vec<(usize, usize)> = (0..p.m).flat_map(|u| (u + 1..p.m).map(move |v| (u, v))).collect();
    let mut degree = vec![0usize; p.n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut graphs = vec![Graph::new(p.n, edges.iter().copied())?];
    for t in 1..(p.n - p.m) {
        let new = p.m + t - 1;
        let chosen = attach(&degree[..new], p.m, &mut r);
        for &c in &chosen {
            edges.push((c, new));
            degree[c] += 1;
            degree[new] += 1;
        }
        graphs.push(Graph::new(p.n, edges.iter().copied())?);
    }
    GraphSeries::new(p.n, graphs, None)
}

/// Draw `m` distinct indices, sequentially, each with probability
/// proportional to weight among those not yet drawn.
fn attach(weights: &[usize], m: usize, r: &mut Rng) -> Vec<usize> {
    let mut taken = vec![false; weights.len()];
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        let total: usize = weights.iter().zip(&taken).filter(|(_, &t)| !t).map(|(w, _)| *w).sum();
        let pick = if total == 0 {
            let free: Vec<usize> = (0..weights.len()).filter(|&i| !taken[i]).collect();
            *free.choose(r).expect("m < available nodes")
        } else {
            let mut x = r.gen_range(0..total);
            let mut chosen = 0;
            for (i, &w) in weights.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                if x < w {
                    chosen = i;
                    break;
                }
                x -= w;
            }
            chosen
        };
        taken[pick] = true;
        out.push(pick);
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Ba,
    CommunityDecay,
    TinyBa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub count: usize,
    pub split: [usize; 3],
    pub seed: u64,
    #[serde(default)]
    pub ba: Option<BaParams>,
    #[serde(default)]
    pub community: Option<CommunityDecayParams>,
}

impl DatasetSpec {
    /// Default sizes for a kind: BA n=50 m=4, tiny BA n=6 m=1, the standard
    /// three-community decay set.
    pub fn standard(kind: DatasetKind, count: usize, split: [usize; 3], seed: u64) -> Self {
        DatasetSpec {
            kind,
            count,
            split,
            seed,
            ba: None,
            community: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<GraphSeries>,
    pub val: Vec<GraphSeries>,
    pub test: Vec<GraphSeries>,
}

/// Generate `count` independent series and split them in order. Series i
/// uses a seed derived from the master seed and i.
pub fn gen_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.split.iter().sum::<usize>() != spec.count {
        return invalid(format!("split {:?} does not sum to count {}", spec.split, spec.count));
    }
    let mut all = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let seed = rng::child_seed(spec.seed, "dataset-series", i as u64);
        let s = match spec.kind {
            DatasetKind::Ba | DatasetKind::TinyBa => {
                let base = spec.ba.clone().unwrap_or(match spec.kind {
                    DatasetKind::TinyBa => BaParams { n: 6, m: 1, seed: 0 },
                    _ => BaParams { n: 50, m: 4, seed: 0 },
                });
                gen_ba(&BaParams { seed, ..base })?
            }
            DatasetKind::CommunityDecay => {
                let base = spec.community.clone().unwrap_or_default();
                gen_community_decay(&CommunityDecayParams { seed, ..base })?.series
            }
        };
        all.push(s);
    }
    let test = all.split_off(spec.split[0] + spec.split[1]);
    let val = all.split_off(spec.split[0]);
    Ok(Dataset { train: all, val, test })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomBaselineParams {
    /// (min, max) ones per nonzero rank-1 row.
    pub rank1: (usize, usize),
    /// (min, max) ones per nonzero rank-2 row.
    pub rank2: (usize, usize),
    pub seed: u64,
}

impl Default for RandomBaselineParams {
    fn default() -> Self {
        RandomBaselineParams {
            rank1: (2, 2),
            rank2: (3, 15),
            seed: 0,
        }
    }
}

/// One random row: n drawn uniformly from `{0} ∪ [min, max]`, then n
/// distinct columns chosen uniformly.
pub fn random_row(num_cols: usize, (min, max): (usize, usize), r: &mut Rng) -> Vec<usize> {
    let choices = max - min + 2;
    let pick = r.gen_range(0..choices);
    let n = if pick == 0 { 0 } else { min + pick - 1 };
    let mut row = index::sample(r, num_cols, n).into_vec();
    row.sort_unstable();
    row
}

/// Raw random co-incidence matrices shaped like each target timestep
/// (zero rows included). A rank whose target never has rows is not checked
/// against the column count.
pub fn random_rows(target: &CcSeries, p: &RandomBaselineParams) -> Result<Vec<(CoIncidenceMatrix, CoIncidenceMatrix)>> {
    let n = target.num_nodes;
    for (rank, (lo, hi)) in [(1, p.rank1), (2, p.rank2)] {
        if lo == 0 || lo > hi {
            return invalid(format!("rank-{rank} bounds need 0 < min <= max, got ({lo},{hi})"));
        }
        let used = target.ccs.iter().any(|c| c.num_cells(rank) > 0);
        if used && hi > n {
            return invalid(format!("rank-{rank} max {hi} exceeds {n} nodes"));
        }
    }
    let mut r = rng::stream(p.seed, "random-baseline");
    Ok(target
        .ccs
        .iter()
        .map(|cc| {
            let m1 = (0..cc.num_cells(1)).map(|_| random_row(n, p.rank1, &mut r)).collect();
            let m2 = (0..cc.num_cells(2)).map(|_| random_row(n, p.rank2, &mut r)).collect();
            (SparseBinary::new(m1, n), SparseBinary::new(m2, n))
        })
        .collect())
}

/// Random prediction series: the raw rows of [`random_rows`] read back as
/// complexes (zero rows dropped, duplicates merged).
pub fn random_prediction(target: &CcSeries, p: &RandomBaselineParams) -> Result<CcSeries> {
    let ccs = random_rows(target, p)?
        .iter()
        .map(|(a, b)| CombinatorialComplex::from_co_incidence(a, b, target.num_nodes))
        .collect::<Result<Vec<_>>>()?;
    CcSeries::new(target.num_nodes, ccs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ba_shapes() {
        let s = gen_ba(&BaParams { n: 50, m: 4, seed: 3 }).unwrap();
        assert_eq!(s.len(), 46);
        assert_eq!(s.graphs[0].num_edges(), 6);
        for (t, g) in s.graphs.iter().enumerate() {
            assert_eq!(g.num_edges(), 6 + 4 * t);
        }
        let tiny = gen_ba(&BaParams { n: 6, m: 1, seed: 1 }).unwrap();
        assert_eq!(tiny.len(), 5);
        assert!(gen_ba(&BaParams { n: 3, m: 3, seed: 0 }).is_err());
    }

    #[test]
    fn decay_without_decay_is_static() {
        let run = gen_community_decay(&CommunityDecayParams {
            f_dec: 0.0,
            timesteps: 5,
            ..Default::default()
        })
        .unwrap();
        assert!(run.series.graphs.iter().all(|g| g == &run.series.graphs[0]));
    }

    #[test]
    fn decay_standard_configuration() {
        let run = gen_community_decay(&CommunityDecayParams::default()).unwrap();
        assert_eq!(run.series.num_nodes, 45);
        assert_eq!(run.series.len(), 40);
        let e0 = run.series.graphs[0].num_edges();
        assert!(run.series.graphs.iter().all(|g| g.num_edges() == e0));
    }

    #[test]
    fn dataset_split_sizes() {
        let d = gen_dataset(&DatasetSpec::standard(DatasetKind::TinyBa, 10, [5, 2, 3], 9)).unwrap();
        assert_eq!((d.train.len(), d.val.len(), d.test.len()), (5, 2, 3));
        let one = gen_dataset(&DatasetSpec::standard(DatasetKind::TinyBa, 1, [1, 0, 0], 9)).unwrap();
        assert_eq!(one.train.len(), 1);
        assert!(gen_dataset(&DatasetSpec::standard(DatasetKind::TinyBa, 3, [1, 1, 0], 9)).is_err());
    }

    #[test]
    fn random_rows_respect_law_and_shape() {
        let cc = CombinatorialComplex::new(20, vec![vec![0, 1]; 1], vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let s = CcSeries::new(20, vec![cc]).unwrap();
        let rows = random_rows(&s, &RandomBaselineParams::default()).unwrap();
        assert_eq!(rows[0].0.num_rows(), 1);
        assert_eq!(rows[0].1.num_rows(), 2);
        let small = CcSeries::new(
            4,
            vec![CombinatorialComplex::new(4, vec![], vec![vec![0, 1, 2]]).unwrap()],
        )
        .unwrap();
        assert!(random_rows(&small, &RandomBaselineParams::default()).is_err());
    }
}
