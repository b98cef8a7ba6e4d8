//! Graph statistics, quartile summaries, dynamic time warping, and the
//! series-against-series evaluation harness.

mod dtw;
mod stats;
mod temporal;

pub use dtw::dtw;
pub use stats::{
    average_clustering, bfs_distances, closeness_centrality, degree, degree_centrality, eigenvector_centrality, laplacian_spectrum, local_clustering, transitivity, EigenCentrality, POWER_MAX_ITERS,
    POWER_TOL,
};
pub use temporal::{cumulative_union, temporal_closeness, temporal_clustering, temporal_correlation};

use crate::complex::{CcSeries, Graph, GraphSeries};
use crate::error::{invalid, Result};
use crate::matching::{rwpl_variant, Variant};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Quantile with linear interpolation between order statistics (type 7).
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn quartiles(values: &[f64]) -> (f64, f64) {
    (quantile(values, 0.25), quantile(values, 0.75))
}

/// One statistic over time: a scalar or a (Q1, Q3) pair per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSeries {
    pub metric: String,
    pub points: Vec<Vec<f64>>,
}

pub const LOCAL_METRICS: [&str; 5] = ["degree", "degree_centrality", "local_clustering", "closeness_centrality", "eigenvector_centrality"];
pub const GLOBAL_METRICS: [&str; 2] = ["average_clustering", "transitivity"];
pub const TEMPORAL_METRICS: [&str; 2] = ["temporal_closeness", "temporal_clustering"];
pub const SPECTRUM: &str = "laplacian_spectrum";
pub const TEMPORAL_CORRELATION: &str = "temporal_correlation";

/// Every metric name in report order.
pub fn metric_names() -> Vec<&'static str> {
    let mut v: Vec<&str> = LOCAL_METRICS.to_vec();
    v.push(SPECTRUM);
    v.extend(GLOBAL_METRICS);
    v.push(TEMPORAL_CORRELATION);
    v.extend(TEMPORAL_METRICS);
    v
}

fn local_values(name: &str, g: &Graph) -> Vec<f64> {
    match name {
        "degree" => degree(g).into_iter().map(|k| k as f64).collect(),
        "degree_centrality" => degree_centrality(g),
        "local_clustering" => local_clustering(g),
        "closeness_centrality" => closeness_centrality(g),
        "eigenvector_centrality" => {
            let e = eigenvector_centrality(g);
            if !e.converged {
                log::warn!("eigenvector centrality did not converge in {} iterations", e.iterations);
            }
            e.values
        }
        SPECTRUM => laplacian_spectrum(g),
        _ => unreachable!("unknown local metric {name}"),
    }
}

/// Per-step payloads of a named statistic.
pub fn stat_series(name: &str, s: &GraphSeries) -> StatSeries {
    let q = |v: Vec<f64>| {
        let (a, b) = quartiles(&v);
        vec![a, b]
    };
    let points = (0..s.len())
        .map(|t| match name {
            "average_clustering" => vec![average_clustering(&s.graphs[t])],
            "transitivity" => vec![transitivity(&s.graphs[t])],
            "temporal_closeness" => q(temporal_closeness(s, t)),
            "temporal_clustering" => q(temporal_clustering(s, t)),
            _ => q(local_values(name, &s.graphs[t])),
        })
        .collect();
    StatSeries { metric: name.to_string(), points }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<(String, f64)>,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,value\n");
        for (m, v) in &self.rows {
            let _ = writeln!(s, "{m},{v}");
        }
        s
    }

    pub fn get(&self, metric: &str) -> Option<f64> {
        self.rows.iter().find(|(m, _)| m == metric).map(|(_, v)| *v)
    }
}

/// DTW between the statistic series of two graph series; temporal
/// correlation is compared as an absolute difference of scalars (0 when a
/// series has fewer than two steps).
pub fn evaluate(generated: &GraphSeries, target: &GraphSeries) -> Result<EvalReport> {
    if generated.num_nodes != target.num_nodes {
        return invalid(format!("node counts differ: {} vs {}", generated.num_nodes, target.num_nodes));
    }
    let mut rows = Vec::new();
    for name in metric_names() {
        let v = if name == TEMPORAL_CORRELATION {
            let c = |s: &GraphSeries| if s.len() < 2 { Ok(0.0) } else { temporal_correlation(s) };
            (c(generated)? - c(target)?).abs()
        } else {
            dtw(&stat_series(name, generated).points, &stat_series(name, target).points)?
        };
        rows.push((name.to_string(), v));
    }
    Ok(EvalReport { rows })
}

/// Matching losses of predicted against target complexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcLossReport {
    pub variant: String,
    pub rank: usize,
    pub per_timestep: Vec<f64>,
    pub mean: f64,
}

/// Row-matching losses per rank and timestep between aligned prediction and
/// target series (summed over series for each step index).
pub fn cc_losses(pred: &[CcSeries], target: &[CcSeries], variants: &[Variant]) -> Result<Vec<CcLossReport>> {
    if pred.len() != target.len() {
        return invalid(format!("{} predicted series vs {} target series", pred.len(), target.len()));
    }
    let mut out = Vec::new();
    for &v in variants {
        for rank in [1, 2] {
            let mut per = Vec::new();
            for (p, t) in pred.iter().zip(target) {
                if p.len() != t.len() || p.num_nodes != t.num_nodes {
                    return invalid("predicted and target series differ in length or node count");
                }
                for (i, (a, b)) in p.ccs.iter().zip(&t.ccs).enumerate() {
                    let val = rwpl_variant(&a.co_incidence(rank)?.to_dense(), &b.co_incidence(rank)?.to_dense(), v)?.value;
                    if per.len() <= i {
                        per.push(0.0);
                    }
                    per[i] += val;
                }
            }
            let mean = if per.is_empty() { 0.0 } else { per.iter().sum::<f64>() / per.len() as f64 };
            out.push(CcLossReport {
                variant: v.name().to_string(),
                rank,
                per_timestep: per,
                mean,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quartiles() {
        assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0]), (1.75, 3.25));
        assert_eq!(quartiles(&[5.0]), (5.0, 5.0));
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
    }

    #[test]
    fn self_evaluation_is_all_zero() {
        let gs = crate::generators::gen_ba(&crate::generators::BaParams { n: 12, m: 2, seed: 3 }).unwrap();
        let r = evaluate(&gs, &gs).unwrap();
        assert_eq!(r.rows.len(), metric_names().len());
        assert_eq!(r.rows.len(), 11);
        assert!(r.rows.iter().all(|(_, v)| *v == 0.0));
        assert!(r.to_csv().starts_with("metric,value\ndegree,0\n"));
    }
}
