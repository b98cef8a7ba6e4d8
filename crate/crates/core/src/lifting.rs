//! Clique lifting: every clique of size `min..=max` becomes a 2-cell.
//!
//! Maximal cliques come from pivoted Bron–Kerbosch, then every sub-clique in
//! the size window is expanded from them. Nested cliques (a triangle inside a
//! 4-clique) are kept as separate 2-cells.

use crate::complex::{CcSeries, Cell, CombinatorialComplex, Graph, GraphSeries};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftConfig {
    pub min_clique_size: usize,
    pub max_clique_size: usize,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig {
            min_clique_size: 3,
            max_clique_size: 15,
        }
    }
}

impl LiftConfig {
    pub fn new(min_clique_size: usize, max_clique_size: usize) -> Result<Self> {
        if min_clique_size < 3 || max_clique_size < min_clique_size {
            return Err(Error::InvalidArgument(format!(
                "clique sizes need 3 <= min <= max, got min={min_clique_size} max={max_clique_size}"
            )));
        }
        Ok(LiftConfig {
            min_clique_size,
            max_clique_size,
        })
    }
}

fn bron_kerbosch(adj: &[BTreeSet<usize>], r: &mut Vec<usize>, mut p: BTreeSet<usize>, mut x: BTreeSet<usize>, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() && x.is_empty() {
        out.push(r.clone());
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&&u| adj[u].intersection(&p).count())
        .copied()
        .expect("p or x nonempty");
    let candidates: Vec<usize> = p.difference(&adj[pivot]).copied().collect();
    for v in candidates {
        r.push(v);
        let np = p.intersection(&adj[v]).copied().collect();
        let nx = x.intersection(&adj[v]).copied().collect();
        bron_kerbosch(adj, r, np, nx, out);
        r.pop();
        p.remove(&v);
        x.insert(v);
    }
}

/// Maximal cliques of `g`, each sorted, in lexicographic order.
pub fn maximal_cliques(g: &Graph) -> Vec<Vec<usize>> {
    let adj: Vec<BTreeSet<usize>> = g.adjacency_lists().into_iter().map(|a| a.into_iter().collect()).collect();
    let mut out = Vec::new();
    bron_kerbosch(&adj, &mut Vec::new(), (0..g.num_nodes()).collect(), BTreeSet::new(), &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

fn subsets_into(c: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut BTreeSet<Cell>) {
    if cur.len() == k {
        out.insert(cur.clone());
        return;
    }
    for i in start..c.len() {
        if c.len() - i < k - cur.len() {
            break;
        }
        cur.push(c[i]);
        subsets_into(c, k, i + 1, cur, out);
        cur.pop();
    }
}

/// All cliques with `min <= size <= max`, in canonical order.
pub fn enumerate_cliques(g: &Graph, cfg: &LiftConfig) -> Vec<Cell> {
    let mut out = BTreeSet::new();
    for m in maximal_cliques(g) {
        let top = m.len().min(cfg.max_clique_size);
        for k in cfg.min_clique_size..=top {
            subsets_into(&m, k, 0, &mut Vec::with_capacity(k), &mut out);
        }
    }
    out.into_iter().collect()
}

/// Nodes stay 0-cells, edges become 1-cells, cliques become 2-cells.
pub fn clique_lift(g: &Graph, cfg: &LiftConfig) -> CombinatorialComplex {
    let cells1 = g.edges().iter().map(|&(u, v)| vec![u, v]).collect();
    CombinatorialComplex::new(g.num_nodes(), cells1, enumerate_cliques(g, cfg)).expect("clique lift is always a valid complex")
}

/// Lift each timestep; node features are carried over unchanged.
pub fn lift_series(gs: &GraphSeries, cfg: &LiftConfig) -> Result<CcSeries> {
    if gs.is_empty() {
        return Err(Error::InvalidArgument("cannot lift an empty series".into()));
    }
    let ccs = gs
        .graphs
        .iter()
        .enumerate()
        .map(|(t, g)| clique_lift(g, cfg).with_features(gs.features.as_ref().map(|f| f[t].clone())))
        .collect::<Result<Vec<_>>>()?;
    CcSeries::new(gs.num_nodes, ccs)
}

/// Check that `cc` is a faithful lift of `g`: same node count, skeleton equal
/// to `g`, and every 2-cell a clique of `g`. Returns a description of the
/// first failure.
pub fn check_embedding(g: &Graph, cc: &CombinatorialComplex) -> std::result::Result<(), String> {
    if cc.num_nodes() != g.num_nodes() {
        return Err("node count changed".into());
    }
    if !cc.validate().is_empty() {
        return Err(format!("lift invalid: {:?}", cc.validate()));
    }
    if &cc.skeleton() != g {
        return Err("skeleton differs from source graph".into());
    }
    for c in cc.cells2() {
        for (i, &u) in c.iter().enumerate() {
            for &v in &c[i + 1..] {
                if !g.has_edge(u, v) {
                    return Err(format!("2-cell {c:?} is not a clique: missing ({u},{v})"));
                }
            }
        }
    }
    Ok(())
}
