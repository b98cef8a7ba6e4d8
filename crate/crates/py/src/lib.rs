//! Python bindings. Series cross the boundary as JSON text in the same
//! schemas the command line reads and writes.

use dyncc_core::complex::{CombinatorialComplex as CoreCc, Graph as CoreGraph};
use dyncc_core::experiment::{self, ExperimentConfig};
use dyncc_core::generators::{self, BaParams};
use dyncc_core::lifting::{self, LiftConfig};
use dyncc_core::linalg::Mat;
use dyncc_core::matching::{self, Variant};
use dyncc_core::model::CcModel;
use dyncc_core::{gradsuite, io, metrics};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::path::Path;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mat(rows: &[Vec<f64>]) -> PyResult<Mat> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(Mat::from_rows(rows, cols))
}

#[pyclass(name = "Graph", module = "dyncc", frozen)]
struct Graph(CoreGraph);

#[pymethods]
impl Graph {
    #[new]
    fn new(num_nodes: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        CoreGraph::new(num_nodes, edges).map(Graph).map_err(err)
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.0.num_nodes()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Graph(num_nodes={}, edges={})", self.0.num_nodes(), self.0.num_edges())
    }
}

/// Graph-based combinatorial complex: nodes, edges and 2-cells.
#[pyclass(name = "CombinatorialComplex", module = "dyncc", frozen)]
struct CombinatorialComplex(CoreCc);

#[pymethods]
impl CombinatorialComplex {
    #[new]
    #[pyo3(signature = (num_nodes, cells1, cells2=Vec::new()))]
    fn new(num_nodes: usize, cells1: Vec<Vec<usize>>, cells2: Vec<Vec<usize>>) -> PyResult<Self> {
        CoreCc::new(num_nodes, cells1, cells2).map(CombinatorialComplex).map_err(err)
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.0.num_nodes()
    }

    #[getter]
    fn cells1(&self) -> Vec<Vec<usize>> {
        self.0.cells1().to_vec()
    }

    #[getter]
    fn cells2(&self) -> Vec<Vec<usize>> {
        self.0.cells2().to_vec()
    }

    /// Rows of the rank-`rank` co-incidence matrix as sorted node lists.
    fn co_incidence(&self, rank: usize) -> PyResult<Vec<Vec<usize>>> {
        Ok(self.0.co_incidence(rank).map_err(err)?.rows)
    }

    /// Dense 0/1 incidence matrix B_{r,k}.
    fn incidence(&self, r: usize, k: usize) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.0.incidence(r, k).map_err(err)?.to_dense().to_rows())
    }

    fn skeleton(&self) -> Graph {
        Graph(self.0.skeleton())
    }

    fn __repr__(&self) -> String {
        format!("CombinatorialComplex(num_nodes={}, cells1={}, cells2={})", self.0.num_nodes(), self.0.cells1().len(), self.0.cells2().len())
    }
}

/// Trained model loaded from a checkpoint stem (`<stem>.json` + `<stem>.bin`).
#[pyclass(name = "Model", module = "dyncc", frozen)]
struct Model(CcModel);

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(stem: &str) -> PyResult<Self> {
        CcModel::load(Path::new(stem)).map(Model).map_err(err)
    }

    #[getter]
    fn hidden(&self) -> usize {
        self.0.config.hidden
    }

    /// One-step predictions for every series in a "ccseries-v1" document.
    fn predict(&self, series_json: &str, seed: u64) -> PyResult<String> {
        let series = io::cc_series_from_str(series_json).map_err(err)?;
        let pred = series.iter().map(|s| self.0.predict_series(s, seed)).collect::<dyncc_core::Result<Vec<_>>>().map_err(err)?;
        io::cc_series_to_string(&pred).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (graph, min_clique=3, max_clique=15))]
fn clique_lift(graph: &Graph, min_clique: usize, max_clique: usize) -> PyResult<CombinatorialComplex> {
    let cfg = LiftConfig::new(min_clique, max_clique).map_err(err)?;
    Ok(CombinatorialComplex(lifting::clique_lift(&graph.0, &cfg)))
}

/// Barabási–Albert series as a "graphseries-v1" document.
#[pyfunction]
fn gen_ba(n: usize, m: usize, seed: u64) -> PyResult<String> {
    let s = generators::gen_ba(&BaParams { n, m, seed }).map_err(err)?;
    io::graph_series_to_string(&[s]).map_err(err)
}

/// Returns (column per row or None, total cost).
#[pyfunction]
fn hungarian(cost: Vec<Vec<f64>>) -> PyResult<(Vec<Option<usize>>, f64)> {
    let a = matching::hungarian(&mat(&cost)?);
    Ok((a.sigma, a.total_cost))
}

/// Returns (plan, scaled distance).
#[pyfunction]
#[pyo3(signature = (cost, epsilon=0.1, iters=50))]
fn sinkhorn(cost: Vec<Vec<f64>>, epsilon: f64, iters: usize) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let p = matching::sinkhorn(&mat(&cost)?, epsilon, iters).map_err(err)?;
    Ok((p.plan.to_rows(), p.distance))
}

/// Row-matching loss under one of "hbce", "sbce", "hc", "sc".
#[pyfunction]
fn rwpl(pred: Vec<Vec<f64>>, target: Vec<Vec<f64>>, variant: &str) -> PyResult<f64> {
    let v = Variant::parse(variant).ok_or_else(|| PyValueError::new_err(format!("unknown variant {variant:?}")))?;
    Ok(matching::rwpl_variant(&mat(&pred)?, &mat(&target)?, v).map_err(err)?.value)
}

#[pyfunction]
fn dtw(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    metrics::dtw(&a, &b).map_err(err)
}

/// Graph evaluation of two aligned series documents (either schema), as
/// a list of (metric, value).
#[pyfunction]
fn evaluate(pred_json: &str, target_json: &str) -> PyResult<Vec<(String, f64)>> {
    let graphs = |t: &str| -> PyResult<Vec<dyncc_core::GraphSeries>> {
        if io::schema_of(t).map_err(err)? == io::CC_SCHEMA {
            Ok(io::cc_series_from_str(t).map_err(err)?.iter().map(|s| s.skeletons()).collect())
        } else {
            io::graph_series_from_str(t).map_err(err)
        }
    };
    Ok(experiment::evaluate_graph_series(&graphs(pred_json)?, &graphs(target_json)?).map_err(err)?.rows)
}

/// Gradient suite: (check name, max relative error) per check.
#[pyfunction]
fn gradcheck() -> PyResult<Vec<(String, f64)>> {
    Ok(gradsuite::run_default().map_err(err)?.into_iter().map(|e| (e.name.to_string(), e.report.max_rel_error)).collect())
}

/// Run a full experiment from a JSON configuration; returns the manifest.
#[pyfunction]
fn run_pipeline(py: Python<'_>, config_json: &str, out_dir: &str) -> PyResult<String> {
    let cfg: ExperimentConfig = io::parse_json(config_json).map_err(err)?;
    let m = py.detach(|| experiment::run_pipeline(&cfg, Path::new(out_dir))).map_err(err)?;
    serde_json::to_string(&m).map_err(err)
}

#[pymodule]
fn dyncc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<CombinatorialComplex>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(clique_lift, m)?)?;
    m.add_function(wrap_pyfunction!(gen_ba, m)?)?;
    m.add_function(wrap_pyfunction!(hungarian, m)?)?;
    m.add_function(wrap_pyfunction!(sinkhorn, m)?)?;
    m.add_function(wrap_pyfunction!(rwpl, m)?)?;
    m.add_function(wrap_pyfunction!(dtw, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
