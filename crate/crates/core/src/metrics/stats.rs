//! Static statistics of a single graph.

use crate::complex::Graph;
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::VecDeque;

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 10_000;

pub fn degree(g: &Graph) -> Vec<usize> {
    g.adjacency_lists().iter().map(Vec::len).collect()
}

/// k_i / (n - 1); zeros when n < 2.
pub fn degree_centrality(g: &Graph) -> Vec<f64> {
    let n = g.num_nodes();
    if n < 2 {
        return vec![0.0; n];
    }
    degree(g).into_iter().map(|k| k as f64 / (n - 1) as f64).collect()
}

fn neighbour_links(adj: &[Vec<usize>], has: impl Fn(usize, usize) -> bool, i: usize) -> usize {
    let nb = &adj[i];
    let mut links = 0;
    for (a, &j) in nb.iter().enumerate() {
        for &k in &nb[a + 1..] {
            if has(j, k) {
                links += 1;
            }
        }
    }
    links
}

/// Fraction of neighbour pairs that are linked; 0 for degree below 2.
pub fn local_clustering(g: &Graph) -> Vec<f64> {
    let adj = g.adjacency_lists();
    (0..g.num_nodes())
        .map(|i| {
            let k = adj[i].len();
            if k < 2 {
                return 0.0;
            }
            2.0 * neighbour_links(&adj, |a, b| g.has_edge(a, b), i) as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

pub fn average_clustering(g: &Graph) -> f64 {
    let c = local_clustering(g);
    if c.is_empty() { 0.0 } else { c.iter().sum::<f64>() / c.len() as f64 }
}

/// Three times the triangle count over the connected-triple count; 0 when
/// there are no triples.
pub fn transitivity(g: &Graph) -> f64 {
    let adj = g.adjacency_lists();
    let closed: usize = (0..g.num_nodes()).map(|i| neighbour_links(&adj, |a, b| g.has_edge(a, b), i)).sum();
    let triples: usize = adj.iter().map(|nb| nb.len() * nb.len().saturating_sub(1) / 2).sum();
    // each triangle is closed at all three of its corners
    if triples == 0 { 0.0 } else { closed as f64 / triples as f64 }
}

/// Breadth-first hop counts from `src`; `None` for unreachable nodes.
pub fn bfs_distances(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut d = vec![None; adj.len()];
    d[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        let du = d[u].unwrap_or(0);
        for &v in &adj[u] {
            if d[v].is_none() {
                d[v] = Some(du + 1);
                q.push_back(v);
            }
        }
    }
    d
}

/// Closeness with the per-component convention: for a node reaching `r`
/// others at total distance `s`, `(r / s) * (r / (n - 1))`. Isolated nodes
/// score 0, and connected graphs reduce to `(n - 1) / s`.
pub fn closeness_centrality(g: &Graph) -> Vec<f64> {
    let n = g.num_nodes();
    let adj = g.adjacency_lists();
    (0..n)
        .map(|i| {
            let d = bfs_distances(&adj, i);
            let (r, s) = d.iter().flatten().fold((0usize, 0usize), |(r, s), &x| if x > 0 { (r + 1, s + x) } else { (r, s) });
            if r == 0 {
                0.0
            } else {
                (r as f64 / s as f64) * (r as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCentrality {
    pub values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Leading eigenvector of the adjacency matrix, unit length and
/// non-negative. Iterates on `A + I`, which has the same eigenvectors but
/// no ±λ tie on bipartite graphs, from the all-ones vector.
pub fn eigenvector_centrality(g: &Graph) -> EigenCentrality {
    let n = g.num_nodes();
    if n == 0 {
        return EigenCentrality { values: vec![], converged: true, iterations: 0 };
    }
    let adj = g.adjacency_lists();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for it in 1..=POWER_MAX_ITERS {
        let mut y: Vec<f64> = (0..n).map(|i| x[i] + adj[i].iter().map(|&j| x[j]).sum::<f64>()).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        let delta = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if delta < POWER_TOL {
            return EigenCentrality { values: x, converged: true, iterations: it };
        }
    }
    EigenCentrality {
        values: x,
        converged: false,
        iterations: POWER_MAX_ITERS,
    }
}

/// Eigenvalues of `D - A` in ascending order.
pub fn laplacian_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.num_nodes();
    if n == 0 {
        return vec![];
    }
    let a = g.adjacency_matrix();
    let deg = degree(g);
    let l = DMatrix::from_fn(n, n, |i, j| if i == j { deg[i] as f64 } else { -a[(i, j)] });
    let mut ev: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::new(leaves + 1, (1..=leaves).map(|j| (0, j))).unwrap()
    }

    #[test]
    fn path_and_complete_graph_values() {
        let p3 = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(degree(&p3), vec![1, 2, 1]);
        let c = closeness_centrality(&p3);
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-15);
        let k4 = complete(4);
        assert!(degree_centrality(&k4).iter().all(|&v| v == 1.0));
        assert!(closeness_centrality(&k4).iter().all(|&v| v == 1.0));
        assert!(local_clustering(&complete(3)).iter().all(|&v| v == 1.0));
        assert_eq!(transitivity(&complete(3)), 1.0);
    }

    #[test]
    fn star_has_no_clustering_and_symmetric_leaves() {
        let s = star(3);
        assert_eq!(local_clustering(&s)[0], 0.0);
        assert_eq!(transitivity(&s), 0.0);
        let e = eigenvector_centrality(&s);
        assert!(e.converged);
        assert!((e.values[1] - e.values[2]).abs() < 1e-9 && (e.values[2] - e.values[3]).abs() < 1e-9);
        assert!(e.values[0] > e.values[1]);
    }

    #[test]
    fn isolated_node_closeness_is_zero() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let c = closeness_centrality(&g);
        assert_eq!(c[2], 0.0);
        assert!((c[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn complete_graph_spectrum() {
        let ev = laplacian_spectrum(&complete(3));
        assert!(ev[0].abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12 && (ev[2] - 3.0).abs() < 1e-12);
    }
}
