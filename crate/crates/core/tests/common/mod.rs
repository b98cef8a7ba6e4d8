//! Independent brute-force oracles and random instance builders shared by
//! the integration tests. Nothing here calls the library's algorithms.
#![allow(dead_code)]

use dyncc_core::complex::{CombinatorialComplex, Graph};
use dyncc_core::rng::Rng;
use rand::seq::SliceRandom;
use rand::Rng as _;

pub fn random_graph(r: &mut Rng, n: usize, p: f64) -> Graph {
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.gen_bool(p) {
                e.push((i, j));
            }
        }
    }
    Graph::new(n, e).unwrap()
}

/// Random graph-based complex: random edges plus a few random node subsets
/// of size 2 to 6 as 2-cells, skipping subsets that coincide with an edge.
pub fn random_cc(r: &mut Rng, max_nodes: usize) -> CombinatorialComplex {
    let n = r.gen_range(1..=max_nodes);
    let p = r.gen_range(0.05..0.6);
    let g = random_graph(r, n, p);
    let mut cells2: Vec<Vec<usize>> = Vec::new();
    if n >= 2 {
        for _ in 0..r.gen_range(0..6) {
            let k = r.gen_range(2..=n.min(6));
            let mut nodes: Vec<usize> = (0..n).collect();
            nodes.shuffle(r);
            let mut c = nodes[..k].to_vec();
            c.sort_unstable();
            if (k == 2 && g.has_edge(c[0], c[1])) || cells2.contains(&c) {
                continue;
            }
            cells2.push(c);
        }
    }
    let cells1 = g.edges().iter().map(|&(u, v)| vec![u, v]).collect();
    CombinatorialComplex::new(n, cells1, cells2).unwrap()
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.num_nodes();
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// Every node subset of size in [lo, hi] whose pairs are all adjacent.
pub fn brute_cliques(g: &Graph, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let n = g.num_nodes();
    let a = dense_adjacency(g);
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let nodes: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if nodes.len() < lo || nodes.len() > hi {
            continue;
        }
        if nodes.iter().enumerate().all(|(x, &i)| nodes[x + 1..].iter().all(|&j| a[i][j])) {
            out.push(nodes);
        }
    }
    out.sort();
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum over all injective row-to-column maps (rows <= cols) of the sum
/// of matched costs, summed in ascending order.
pub fn brute_assignment(c: &[Vec<f64>]) -> f64 {
    let (nr, nc) = (c.len(), c.first().map_or(0, Vec::len));
    assert!(nr <= nc);
    let mut best = f64::INFINITY;
    for p in permutations(nc) {
        let mut v: Vec<f64> = (0..nr).map(|i| c[i][p[i]]).collect();
        v.sort_by(f64::total_cmp);
        best = best.min(v.iter().sum());
    }
    best
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Returns
/// eigenvalues ascending with eigenvectors as columns of the second value.
pub fn jacobi_eigen(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.len();
    let mut a = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let vals = idx.iter().map(|&i| a[i][i]).collect();
    let vecs = (0..n).map(|r| idx.iter().map(|&i| v[r][i]).collect()).collect();
    (vals, vecs)
}

pub fn laplacian(g: &Graph) -> Vec<Vec<f64>> {
    let a = dense_adjacency(g);
    let n = a.len();
    (0..n)
        .map(|i| {
            let d = a[i].iter().filter(|&&x| x).count() as f64;
            (0..n).map(|j| if i == j { d } else if a[i][j] { -1.0 } else { 0.0 }).collect()
        })
        .collect()
}

/// Limit of power iteration from the uniform vector: the uniform vector
/// projected onto the top eigenspace of A, normalized.
pub fn eigen_centrality_oracle(g: &Graph) -> Vec<f64> {
    let a = dense_adjacency(g);
    let n = a.len();
    let m: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|&x| f64::from(u8::from(x))).collect()).collect();
    let (vals, vecs) = jacobi_eigen(&m);
    let top = vals[n - 1];
    let mut x = vec![0.0; n];
    for k in (0..n).filter(|&k| (vals[k] - top).abs() < 1e-9) {
        let dot: f64 = (0..n).map(|i| vecs[i][k]).sum();
        for i in 0..n {
            x[i] += dot * vecs[i][k];
        }
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter().map(|v| v / norm).collect()
}

/// All-pairs hop distances by Floyd–Warshall; `usize::MAX` when unreachable.
pub fn floyd(g: &Graph) -> Vec<Vec<usize>> {
    let a = dense_adjacency(g);
    let n = a.len();
    let inf = usize::MAX / 4;
    let mut d: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0 } else if a[i][j] { 1 } else { inf }).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.iter().map(|r| r.iter().map(|&x| if x >= inf { usize::MAX } else { x }).collect()).collect()
}

/// Closeness with the per-component convention, from Floyd–Warshall.
pub fn closeness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.num_nodes();
    floyd(g)
        .iter()
        .map(|row| {
            let reach: Vec<usize> = row.iter().copied().filter(|&x| x != usize::MAX && x > 0).collect();
            if reach.is_empty() {
                return 0.0;
            }
            let r = reach.len() as f64;
            let s: usize = reach.iter().sum();
            (r / s as f64) * (r / (n - 1) as f64)
        })
        .collect()
}

/// (triangles counted over ordered triples, connected triples) by triple loops.
pub fn brute_triangle_counts(g: &Graph) -> (usize, usize) {
    let a = dense_adjacency(g);
    let n = a.len();
    let mut ordered = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if a[i][j] && a[j][k] && a[k][i] {
                    ordered += 1;
                }
            }
        }
    }
    let triples: usize = (0..n)
        .map(|i| {
            let k = a[i].iter().filter(|&&x| x).count();
            k * k.saturating_sub(1) / 2
        })
        .sum();
    (ordered, triples)
}

pub fn local_clustering_oracle(g: &Graph) -> Vec<f64> {
    let a = dense_adjacency(g);
    let n = a.len();
    (0..n)
        .map(|i| {
            let k = a[i].iter().filter(|&&x| x).count();
            if k < 2 {
                return 0.0;
            }
            let mut s = 0;
            for j in 0..n {
                for l in 0..n {
                    if a[i][j] && a[i][l] && a[j][l] {
                        s += 1;
                    }
                }
            }
            s as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

/// DTW by enumerating every monotone boundary-matched warping path.
pub fn dtw_paths(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn d(p: &[f64], q: &[f64]) -> f64 {
        p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }
    fn go(a: &[Vec<f64>], b: &[Vec<f64>], i: usize, j: usize) -> f64 {
        let here = d(&a[i], &b[j]);
        if i + 1 == a.len() && j + 1 == b.len() {
            return here;
        }
        let mut best = f64::INFINITY;
        if i + 1 < a.len() {
            best = best.min(go(a, b, i + 1, j));
        }
        if j + 1 < b.len() {
            best = best.min(go(a, b, i, j + 1));
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            best = best.min(go(a, b, i + 1, j + 1));
        }
        here + best
    }
    go(a, b, 0, 0)
}
