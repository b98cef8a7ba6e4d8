//! JSON series files and the regional case-count ingest.
//!
//! A series file is tagged with a `schema` field:
//!
//! ```json
//! { "schema": "ccseries-v1", "num_nodes": 4,
//!   "timesteps": [ { "cells_1": [[0,1],[1,2]], "cells_2": [], "features": null } ] }
//! ```
//!
//! Graph series use `"graphseries-v1"` and an `"edges"` list per timestep.
//! A collection of several series (dataset splits) is stored as
//! `{ "schema": "<tag>", "series": [ {num_nodes, timesteps}, ... ] }`.
//! Every index is 0-based.

use crate::complex::{CcSeries, CombinatorialComplex, Graph, GraphSeries};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CC_SCHEMA: &str = "ccseries-v1";
pub const GRAPH_SCHEMA: &str = "graphseries-v1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CcStep {
    cells_1: Vec<Vec<usize>>,
    #[serde(default)]
    cells_2: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphStep {
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesBody<S> {
    num_nodes: usize,
    timesteps: Vec<S>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SingleFile<S> {
    schema: String,
    num_nodes: usize,
    timesteps: Vec<S>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CollectionFile<S> {
    schema: String,
    series: Vec<SeriesBody<S>>,
}

fn mat_from_rows(rows: Vec<Vec<f64>>, what: &str) -> Result<Mat> {
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument(format!("{what}: ragged feature matrix")));
    }
    Ok(Mat::from_rows(&rows, cols))
}

/// Deserialize `text`; errors name the JSON path that failed.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::InvalidArgument(format!("malformed JSON at `{path}`: {}", e.into_inner()))
    })
}

fn check_schema(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Schema {
            expected: expected.into(),
            found: found.into(),
        });
    }
    Ok(())
}

fn split_bodies<S: DeserializeOwned>(text: &str, expected: &str) -> Result<Vec<SeriesBody<S>>> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let schema = v.get("schema").and_then(|s| s.as_str()).unwrap_or("<missing>");
    check_schema(schema, expected)?;
    if v.get("series").is_some() {
        Ok(parse_json::<CollectionFile<S>>(text)?.series)
    } else {
        let f: SingleFile<S> = parse_json(text)?;
        Ok(vec![SeriesBody {
            num_nodes: f.num_nodes,
            timesteps: f.timesteps,
        }])
    }
}

fn cc_from_body(b: SeriesBody<CcStep>) -> Result<CcSeries> {
    let mut ccs = Vec::with_capacity(b.timesteps.len());
    for (t, s) in b.timesteps.into_iter().enumerate() {
        let feats = s
            .features
            .map(|f| mat_from_rows(f, &format!("timesteps[{t}].features")))
            .transpose()?;
        let cc = CombinatorialComplex::new(b.num_nodes, s.cells_1, s.cells_2)
            .and_then(|c| c.with_features(feats))
            .map_err(|e| Error::InvalidArgument(format!("timesteps[{t}]: {e}")))?;
        ccs.push(cc);
    }
    CcSeries::new(b.num_nodes, ccs)
}

fn cc_to_body(s: &CcSeries) -> SeriesBody<CcStep> {
    SeriesBody {
        num_nodes: s.num_nodes,
        timesteps: s
            .ccs
            .iter()
            .map(|c| CcStep {
                cells_1: c.cells1().to_vec(),
                cells_2: c.cells2().to_vec(),
                features: c.features().map(|f| f.to_rows()),
            })
            .collect(),
    }
}

fn graph_from_body(b: SeriesBody<GraphStep>) -> Result<GraphSeries> {
    let mut graphs = Vec::with_capacity(b.timesteps.len());
    let mut feats = Vec::new();
    let mut any_feats = false;
    for (t, s) in b.timesteps.into_iter().enumerate() {
        let g = Graph::new(b.num_nodes, s.edges.iter().map(|e| (e[0], e[1])))
            .map_err(|e| Error::InvalidArgument(format!("timesteps[{t}].edges: {e}")))?;
        graphs.push(g);
        if let Some(f) = s.features {
            any_feats = true;
            feats.push(Some(mat_from_rows(f, &format!("timesteps[{t}].features"))?));
        } else {
            feats.push(None);
        }
    }
    let features = if any_feats {
        Some(
            feats
                .into_iter()
                .collect::<Option<Vec<Mat>>>()
                .ok_or_else(|| Error::InvalidArgument("features must be given for all timesteps or none".into()))?,
        )
    } else {
        None
    };
    GraphSeries::new(b.num_nodes, graphs, features)
}

fn graph_to_body(s: &GraphSeries) -> SeriesBody<GraphStep> {
    SeriesBody {
        num_nodes: s.num_nodes,
        timesteps: s
            .graphs
            .iter()
            .enumerate()
            .map(|(t, g)| GraphStep {
                edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
                features: s.features.as_ref().map(|f| f[t].to_rows()),
            })
            .collect(),
    }
}

/// The `schema` tag of a series file, without parsing the rest.
pub fn schema_of(text: &str) -> Result<String> {
    #[derive(Deserialize)]
    struct Tag {
        schema: String,
    }
    Ok(parse_json::<Tag>(text)?.schema)
}

pub fn cc_series_from_str(text: &str) -> Result<Vec<CcSeries>> {
    split_bodies(text, CC_SCHEMA)?.into_iter().map(cc_from_body).collect()
}

pub fn graph_series_from_str(text: &str) -> Result<Vec<GraphSeries>> {
    split_bodies(text, GRAPH_SCHEMA)?.into_iter().map(graph_from_body).collect()
}

fn to_json<S: Serialize>(bodies: Vec<SeriesBody<S>>, schema: &str) -> Result<String> {
    let text = if bodies.len() == 1 {
        let b = bodies.into_iter().next().expect("one body");
        serde_json::to_string(&SingleFile {
            schema: schema.into(),
            num_nodes: b.num_nodes,
            timesteps: b.timesteps,
        })?
    } else {
        serde_json::to_string(&CollectionFile {
            schema: schema.into(),
            series: bodies,
        })?
    };
    Ok(text)
}

/// Serialize one series as a single-series file, several as a collection.
pub fn cc_series_to_string(series: &[CcSeries]) -> Result<String> {
    to_json(series.iter().map(cc_to_body).collect(), CC_SCHEMA)
}

pub fn graph_series_to_string(series: &[GraphSeries]) -> Result<String> {
    to_json(series.iter().map(graph_to_body).collect(), GRAPH_SCHEMA)
}

pub fn read_cc_series(path: &Path) -> Result<Vec<CcSeries>> {
    cc_series_from_str(&std::fs::read_to_string(path)?)
}

pub fn read_graph_series(path: &Path) -> Result<Vec<GraphSeries>> {
    graph_series_from_str(&std::fs::read_to_string(path)?)
}

pub fn write_cc_series(path: &Path, series: &[CcSeries]) -> Result<()> {
    std::fs::write(path, cc_series_to_string(series)?)?;
    Ok(())
}

pub fn write_graph_series(path: &Path, series: &[GraphSeries]) -> Result<()> {
    std::fs::write(path, graph_series_to_string(series)?)?;
    Ok(())
}

/// Per-day edge lists for the regional case ingest:
/// `{ "num_nodes": N, "days": [ [[u, v], [u, v, weight], ...], ... ] }`.
/// Weights and direction are discarded.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DailyEdges {
    num_nodes: usize,
    days: Vec<Vec<Vec<f64>>>,
}

/// Build a graph series from daily mobility edges and per-region case counts.
///
/// `cases_csv` has one row per region (row order = node index) and one
/// column per day, with an optional header row and an optional leading
/// non-numeric label column. Node features at day t are the case counts of
/// days t-window+1..=t, zero-padded before the first day. Edges are made
/// undirected and self-loops dropped.
pub fn ingest_covid(edges_json: &str, cases_csv: &str, window: usize) -> Result<GraphSeries> {
    let d: DailyEdges = parse_json(edges_json)?;
    if window == 0 {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    let mut graphs = Vec::with_capacity(d.days.len());
    for (t, day) in d.days.iter().enumerate() {
        let mut pairs = Vec::with_capacity(day.len());
        for (k, e) in day.iter().enumerate() {
            if e.len() < 2 || e.len() > 3 {
                return Err(Error::InvalidArgument(format!("days[{t}][{k}]: expected [u, v] or [u, v, w]")));
            }
            let (u, v) = (e[0], e[1]);
            if u < 0.0 || v < 0.0 || u.fract() != 0.0 || v.fract() != 0.0 {
                return Err(Error::InvalidArgument(format!("days[{t}][{k}]: node ids must be non-negative integers")));
            }
            pairs.push((u as usize, v as usize));
        }
        graphs.push(
            Graph::new_lenient(d.num_nodes, pairs).map_err(|e| Error::InvalidArgument(format!("days[{t}]: {e}")))?,
        );
    }

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(cases_csv.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let fields: Vec<&str> = rec.iter().map(str::trim).collect();
        let numeric: Vec<Option<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        // header rows have no numeric day columns
        if numeric.iter().skip(1).all(Option::is_none) {
            continue;
        }
        let start = usize::from(numeric.first().is_some_and(Option::is_none));
        let vals: Option<Vec<f64>> = numeric[start..].iter().copied().collect();
        let vals = vals.ok_or_else(|| Error::InvalidArgument(format!("cases row {}: non-numeric entry", rows.len())))?;
        rows.push(vals);
    }
    if rows.len() != d.num_nodes {
        return Err(Error::InvalidArgument(format!(
            "cases file has {} regions, edges file has {} nodes",
            rows.len(),
            d.num_nodes
        )));
    }
    let days = graphs.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() < days) {
        return Err(Error::InvalidArgument(format!(
            "cases row {i} has {} days, need {days}",
            r.len()
        )));
    }
    let features = (0..days)
        .map(|t| {
            let mut m = Mat::zeros(d.num_nodes, window);
            for (i, r) in rows.iter().enumerate() {
                for w in 0..window {
                    // column 0 is the oldest day in the window
                    let day = t as isize - (window - 1 - w) as isize;
                    if day >= 0 {
                        m[(i, w)] = r[day as usize];
                    }
                }
            }
            m
        })
        .collect();
    GraphSeries::new(d.num_nodes, graphs, Some(features))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cc_roundtrip_single_and_collection() {
        let cc = CombinatorialComplex::new(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]], vec![vec![0, 1, 2]]).unwrap();
        let s = CcSeries::new(3, vec![cc.clone(), cc]).unwrap();
        let text = cc_series_to_string(std::slice::from_ref(&s)).unwrap();
        assert!(text.starts_with("{\"schema\":\"ccseries-v1\""));
        assert_eq!(cc_series_from_str(&text).unwrap(), vec![s.clone()]);
        let two = cc_series_to_string(&[s.clone(), s.clone()]).unwrap();
        assert_eq!(cc_series_from_str(&two).unwrap().len(), 2);
    }

    #[test]
    fn schema_mismatch_is_explicit() {
        let g = GraphSeries::new(2, vec![Graph::new(2, [(0, 1)]).unwrap()], None).unwrap();
        let text = graph_series_to_string(&[g]).unwrap();
        assert!(matches!(cc_series_from_str(&text), Err(Error::Schema { .. })));
    }

    #[test]
    fn malformed_input_names_path() {
        let text = r#"{"schema":"graphseries-v1","num_nodes":3,"timesteps":[{"edges":[[0,"x"]]}]}"#;
        let err = graph_series_from_str(text).unwrap_err().to_string();
        assert!(err.contains("timesteps[0].edges[0]"), "{err}");
    }

    #[test]
    fn covid_ingest_windows_and_symmetrizes() {
        let edges = r#"{"num_nodes":2,"days":[[[0,1,3.5],[1,0],[1,1]],[]]}"#;
        let cases = "region,d0,d1\nA,1,2\nB,5,7\n";
        let s = ingest_covid(edges, cases, 3).unwrap();
        assert_eq!(s.graphs[0].edges(), &[(0, 1)]);
        assert_eq!(s.graphs[1].num_edges(), 0);
        let f = s.features.unwrap();
        assert_eq!(f[1].row(0), &[0.0, 1.0, 2.0]);
        assert_eq!(f[0].row(1), &[0.0, 0.0, 5.0]);
    }
}
