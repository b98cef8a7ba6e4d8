//! Statistics of a graph series over time.
//!
//! "Paths available up to time t" is read as the union of all edges seen at
//! steps 0..=t.

use super::stats::{closeness_centrality, degree};
use crate::complex::{Graph, GraphSeries};
use crate::error::{invalid, Result};
use std::collections::BTreeSet;

/// Union of the edges of `graphs[0..=t]`.
pub fn cumulative_union(series: &GraphSeries, t: usize) -> Graph {
    let edges: BTreeSet<(usize, usize)> = series.graphs[..=t].iter().flat_map(|g| g.edges().iter().copied()).collect();
    Graph::new_lenient(series.num_nodes, edges).expect("edges of valid graphs")
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 { 0.0 } else { sab / (saa * sbb).sqrt() }
}

/// Mean Pearson correlation of the degree series over all node pairs; a
/// pair with a constant series contributes 0.
pub fn temporal_correlation(series: &GraphSeries) -> Result<f64> {
    if series.len() < 2 {
        return invalid(format!("temporal correlation needs at least 2 timesteps, got {}", series.len()));
    }
    let n = series.num_nodes;
    let deg: Vec<Vec<usize>> = series.graphs.iter().map(degree).collect();
    let per_node: Vec<Vec<f64>> = (0..n).map(|i| deg.iter().map(|d| d[i] as f64).collect()).collect();
    let (mut sum, mut pairs) = (0.0, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            sum += pearson(&per_node[i], &per_node[j]);
            pairs += 1;
        }
    }
    Ok(if pairs == 0 { 0.0 } else { sum / pairs as f64 })
}

/// Closeness on the cumulative union graph at `t`.
pub fn temporal_closeness(series: &GraphSeries, t: usize) -> Vec<f64> {
    closeness_centrality(&cumulative_union(series, t))
}

/// `2 E / (k (k - 1))` with k the current degree and E the links among the
/// current neighbours present in the cumulative union; 0 for k < 2.
pub fn temporal_clustering(series: &GraphSeries, t: usize) -> Vec<f64> {
    let now = &series.graphs[t];
    let union = cumulative_union(series, t);
    now.adjacency_lists()
        .iter()
        .map(|nb| {
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let mut e = 0usize;
            for (a, &j) in nb.iter().enumerate() {
                e += nb[a + 1..].iter().filter(|&&l| union.has_edge(j, l)).count();
            }
            2.0 * e as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(graphs: Vec<Vec<(usize, usize)>>, n: usize) -> GraphSeries {
        GraphSeries::new(n, graphs.into_iter().map(|e| Graph::new(n, e).unwrap()).collect(), None).unwrap()
    }

    #[test]
    fn static_series_has_constant_closeness() {
        let s = series(vec![vec![(0, 1), (1, 2)]; 4], 3);
        let first = temporal_closeness(&s, 0);
        for t in 1..4 {
            assert_eq!(temporal_closeness(&s, t), first);
        }
    }

    #[test]
    fn lockstep_degrees_correlate_fully() {
        // nodes 0 and 1 gain degree together; node 2 and 3 too
        let s = series(vec![vec![], vec![(0, 1)], vec![(0, 1), (2, 3)]], 4);
        let r = temporal_correlation(&s).unwrap();
        // pairs (0,1),(2,3) correlate 1; the 4 cross pairs correlate 0.5
        assert!((r - (2.0 + 4.0 * 0.5) / 6.0).abs() < 1e-12);
        assert!(temporal_correlation(&series(vec![vec![]], 2)).is_err());
    }

    #[test]
    fn three_node_toy_series() {
        // (1,2) exists at t0 only, so it survives in the union at t1
        let s = series(vec![vec![(0, 1), (0, 2), (1, 2)], vec![(0, 1), (0, 2)]], 3);
        assert_eq!(temporal_clustering(&s, 1), vec![1.0, 0.0, 0.0]);
        // union at t1 is the triangle
        assert_eq!(temporal_closeness(&s, 1), vec![1.0, 1.0, 1.0]);
        let s2 = series(vec![vec![(0, 1)], vec![(0, 1), (0, 2)]], 3);
        assert_eq!(temporal_clustering(&s2, 1), vec![0.0, 0.0, 0.0]);
        let c = temporal_closeness(&s2, 1);
        assert!((c[1] - 2.0 / 3.0).abs() < 1e-15);
    }
}
