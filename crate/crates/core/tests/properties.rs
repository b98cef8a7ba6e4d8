mod common;

use common::*;
use dyncc_core::complex::{CombinatorialComplex, Graph, SparseBinary};
use dyncc_core::decoder::{Decoder, DecoderHyperparams, TraversalMode};
use dyncc_core::autodiff::{ParamStore, Tape};
use dyncc_core::io;
use dyncc_core::lifting::{clique_lift, LiftConfig};
use dyncc_core::linalg::Mat;
use dyncc_core::matching::{hungarian, marginal_error, rwpl_variant, sinkhorn, Variant};
use dyncc_core::metrics;
use dyncc_core::rng::{self, Rng};
use dyncc_core::{CcSeries, GraphSeries};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng as _;

fn seeded(seed: u64) -> Rng {
    rng::stream(seed, "prop")
}

fn perm(r: &mut Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(r);
    p
}


fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn incidence_and_co_incidence_are_transposes(seed in any::<u64>()) {
        let cc = random_cc(&mut seeded(seed), 12);
        for (k, rank) in [(1usize, 1usize), (2, 2)] {
            let co = cc.co_incidence(rank).unwrap();
            prop_assert_eq!(cc.incidence(0, k).unwrap(), co.transpose());
        }
        let b12 = cc.incidence(1, 2).unwrap();
        for (i, e) in cc.cells1().iter().enumerate() {
            for (j, f) in cc.cells2().iter().enumerate() {
                prop_assert_eq!(b12.get(i, j), e.iter().all(|x| f.contains(x)));
            }
        }
    }

    #[test]
    fn neighbourhoods_are_symmetric_with_self_loops(seed in any::<u64>()) {
        let cc = random_cc(&mut seeded(seed), 12);
        for m in [cc.adjacency(0).unwrap(), cc.coadjacency(1).unwrap(), cc.coadjacency(2).unwrap()] {
            prop_assert!(m.is_symmetric());
        }
        // a node with at least one edge is its own neighbour through it
        let a0 = cc.adjacency(0).unwrap();
        for &(u, v) in cc.skeleton().edges() {
            prop_assert!(a0.get(u, u) && a0.get(u, v));
        }
    }

    #[test]
    fn node_relabelling_commutes_with_lifting(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let n = r.gen_range(1..=10);
        let g = random_graph(&mut r, n, 0.5);
        let p = perm(&mut r, n);
        let cfg = LiftConfig::default();
        prop_assert_eq!(clique_lift(&g.permuted(&p), &cfg), clique_lift(&g, &cfg).permuted_nodes(&p).unwrap());
    }

    #[test]
    fn co_incidence_rows_with_duplicates_collapse(seed in any::<u64>()) {
        let cc = random_cc(&mut seeded(seed), 10);
        let mut rows1 = cc.co_incidence(1).unwrap().rows;
        rows1.extend(rows1.clone());
        rows1.push(vec![]);
        let back = CombinatorialComplex::from_co_incidence(&SparseBinary::new(rows1, cc.num_nodes()), &cc.co_incidence(2).unwrap(), cc.num_nodes()).unwrap();
        prop_assert_eq!(back, cc);
    }

    #[test]
    fn hungarian_is_invariant_to_row_and_column_order(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let n = r.gen_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| r.gen::<f64>()).collect()).collect();
        let (pr, pc) = (perm(&mut r, n), perm(&mut r, n));
        let shuffled: Vec<Vec<f64>> = pr.iter().map(|&i| pc.iter().map(|&j| rows[i][j]).collect()).collect();
        let a = hungarian(&Mat::from_rows(&rows, n));
        let b = hungarian(&Mat::from_rows(&shuffled, n));
        prop_assert_eq!(a.total_cost, b.total_cost);
        let mut seen = vec![false; n];
        for j in a.sigma.iter().map(|j| j.expect("square matrices match every row")) {
            prop_assert!(!seen[j]);
            seen[j] = true;
        }
    }

    #[test]
    fn row_costs_have_the_documented_ranges(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let cols = r.gen_range(1..=8);
        let pred = Mat::from_vec(3, cols, (0..3 * cols).map(|_| r.gen::<f64>()).collect());
        let tgt = Mat::from_vec(3, cols, (0..3 * cols).map(|_| f64::from(u8::from(r.gen_bool(0.5)))).collect());
        let bce = dyncc_core::matching::pairwise_bce(&pred, &tgt).unwrap();
        prop_assert!(bce.data.iter().all(|&x| x >= 0.0 && x.is_finite()));
        let cos = dyncc_core::matching::pairwise_cosine(&tgt, &tgt).unwrap();
        prop_assert!(cos.data.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn hard_targets_score_zero_under_hc(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let (n, cols) = (r.gen_range(1..=6), r.gen_range(2..=8));
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..cols).map(|j| f64::from(u8::from(j == i % cols || r.gen_bool(0.3)))).collect()).collect();
        let mut p = rows.clone();
        p.shuffle(&mut r);
        let v = rwpl_variant(&Mat::from_rows(&p, cols), &Mat::from_rows(&rows, cols), Variant::Hc).unwrap().value;
        prop_assert_eq!(v, 0.0);
        let b = rwpl_variant(&Mat::from_rows(&p, cols), &Mat::from_rows(&rows, cols), Variant::Hbce).unwrap().value;
        prop_assert!(b >= 0.0 && b < 1e-4);
    }

    #[test]
    fn graph_metrics_follow_node_relabelling(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let n = r.gen_range(2..=10);
        let g = random_graph(&mut r, n, 0.4);
        let p = perm(&mut r, n);
        let h = g.permuted(&p);
        let moved = |v: Vec<f64>| {
            let mut out = vec![0.0; v.len()];
            for (i, x) in v.into_iter().enumerate() {
                out[p[i]] = x;
            }
            out
        };
        prop_assert_eq!(moved(metrics::local_clustering(&g)), metrics::local_clustering(&h));
        prop_assert_eq!(moved(metrics::closeness_centrality(&g)), metrics::closeness_centrality(&h));
        prop_assert!(close(&moved(metrics::eigenvector_centrality(&g).values), &metrics::eigenvector_centrality(&h).values, 1e-8));
        prop_assert!(close(&metrics::laplacian_spectrum(&g), &metrics::laplacian_spectrum(&h), 1e-9));
        prop_assert!((metrics::transitivity(&g) - metrics::transitivity(&h)).abs() < 1e-15);
    }

    #[test]
    fn dtw_is_a_symmetric_premetric(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let mk = |r: &mut Rng| (0..r.gen_range(1..=6)).map(|_| vec![r.gen_range(-1.0..1.0)]).collect::<Vec<Vec<f64>>>();
        let (a, b) = (mk(&mut r), mk(&mut r));
        let ab = metrics::dtw(&a, &b).unwrap();
        prop_assert!((ab - metrics::dtw(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(metrics::dtw(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn sampled_rows_are_always_valid(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let mut store = ParamStore::new();
        let dec = Decoder::new(&mut store, "d", 8, &mut r);
        let n = r.gen_range(1..=24);
        for rank in [1, 2] {
            for mode in [TraversalMode::Deterministic, TraversalMode::Stochastic] {
                let hp = DecoderHyperparams::for_rank(rank, mode);
                let mut t = Tape::new();
                let h = t.constant(Mat::from_vec(3, 8, (0..24).map(|_| r.gen_range(-2.0..2.0)).collect()));
                let s = dec.sample_matrix(&mut t, &store, h, n, &hp, &mut r).unwrap();
                // zero rows are dropped
                prop_assert!(s.matrix.num_rows() <= 3);
                for row in &s.matrix.rows {
                    prop_assert!(row.is_empty() || (row.len() >= 2 && row.len() <= hp.n_max));
                    prop_assert!(row.windows(2).all(|w| w[0] < w[1]) && row.iter().all(|&c| c < n));
                }
                for (_, visited) in s.attempts {
                    prop_assert!(visited <= 2 * n - 1);
                }
            }
        }
    }
}

#[test]
fn quartiles_use_linear_interpolation() {
    assert_eq!(metrics::quartiles(&[1.0, 2.0, 3.0, 4.0]), (1.75, 3.25));
    assert_eq!(metrics::quartiles(&[5.0]), (5.0, 5.0));
    assert_eq!(metrics::quantile(&[0.0, 10.0], 0.5), 5.0);
}

#[test]
fn sinkhorn_brackets_hungarian_as_epsilon_shrinks() {
    let mut r = seeded(7);
    for _ in 0..50 {
        let c = Mat::from_vec(4, 4, (0..16).map(|_| r.gen::<f64>()).collect());
        let h = hungarian(&c).total_cost;
        let d: Vec<f64> = [1.0, 0.1, 0.01].iter().map(|&e| sinkhorn(&c, e, 200).unwrap().distance).collect();
        assert!(d.iter().all(|&x| x >= h - 1e-6), "{d:?} vs {h}");
        assert!(d[0] >= d[1] - 1e-9 && d[1] >= d[2] - 1e-9, "{d:?}");
        assert!(d[2] - h < 0.05 * h.max(1e-3), "{} vs {h}", d[2]);
    }
}

#[test]
fn sinkhorn_unrounded_error_shrinks_with_iterations() {
    let mut r = seeded(8);
    for _ in 0..20 {
        let c = Mat::from_vec(5, 5, (0..25).map(|_| r.gen::<f64>()).collect());
        let e: Vec<f64> = [10, 50, 200].iter().map(|&k| sinkhorn(&c, 0.1, k).unwrap().raw_marginal_error).collect();
        assert!(e[0] >= e[1] && e[1] >= e[2], "{e:?}");
        let p = sinkhorn(&c, 0.1, 50).unwrap();
        assert!(marginal_error(&p.plan, 0.2, 0.2) < 1e-12);
    }
}

#[test]
fn constant_costs_give_the_uniform_plan() {
    let p = sinkhorn(&Mat::filled(3, 3, 0.7), 0.01, 50).unwrap();
    assert!(p.plan.data.iter().all(|&x| (x - 1.0 / 9.0).abs() < 1e-12));
}

#[test]
fn malformed_series_json_names_the_failing_path() {
    let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
    let series = GraphSeries::new(3, vec![g.clone(), g], None).unwrap();
    let good = io::graph_series_to_string(&[series.clone()]).unwrap();
    assert_eq!(io::graph_series_from_str(&good).unwrap(), vec![series]);
    let bad = good.replacen("[1,2]", "[1,\"x\"]", 1);
    let err = io::graph_series_from_str(&bad).unwrap_err().to_string();
    assert!(err.contains("timesteps[0]"), "{err}");
    let wrong_schema = good.replacen("graphseries-v1", "other", 1);
    assert!(io::graph_series_from_str(&wrong_schema).is_err());
}

#[test]
fn cc_series_round_trip_through_json() {
    let mut r = seeded(9);
    let ccs: Vec<CombinatorialComplex> = (0..3)
        .map(|_| {
            let cc = random_cc(&mut r, 6);
            let extra = 6 - cc.num_nodes();
            let cells1 = cc.cells1().to_vec();
            let cells2 = cc.cells2().to_vec();
            CombinatorialComplex::new(cc.num_nodes() + extra, cells1, cells2).unwrap()
        })
        .collect();
    let s = CcSeries::new(6, ccs).unwrap();
    let text = io::cc_series_to_string(&[s.clone(), s.clone()]).unwrap();
    assert_eq!(io::cc_series_from_str(&text).unwrap(), vec![s.clone(), s]);
}
