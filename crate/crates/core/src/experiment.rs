//! End-to-end runs: generate, lift, train, sample, evaluate, with a run
//! manifest from which the whole run can be repeated.

use crate::complex::{CcSeries, GraphSeries};
use crate::error::{invalid, Result};
use crate::generators::{gen_dataset, DatasetSpec};
use crate::io;
use crate::lifting::{lift_series, LiftConfig};
use crate::matching::Variant;
use crate::metrics::{cc_losses, evaluate, EvalReport};
use crate::model::CcModel;
use crate::rng;
use crate::training::{curve_csv, train, TrainConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const MANIFEST_FORMAT: &str = "dyncc-run-v1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub lift: LiftConfig,
    pub train: TrainConfig,
    pub sample_seed: u64,
    #[serde(default = "all_variants")]
    pub losses: Vec<String>,
}

fn all_variants() -> Vec<String> {
    Variant::ALL.iter().map(|v| v.name().to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub version: String,
    pub config: ExperimentConfig,
    /// Named seeds used by each randomized stage.
    pub seeds: Vec<(String, u64)>,
    pub artifacts: Vec<String>,
}

/// Graph evaluation averaged over aligned series.
pub fn evaluate_series(pred: &[CcSeries], target: &[CcSeries]) -> Result<EvalReport> {
    let skel = |v: &[CcSeries]| v.iter().map(CcSeries::skeletons).collect::<Vec<_>>();
    evaluate_graph_series(&skel(pred), &skel(target))
}

pub fn evaluate_graph_series(pred: &[GraphSeries], target: &[GraphSeries]) -> Result<EvalReport> {
    if pred.len() != target.len() || pred.is_empty() {
        return invalid(format!("cannot evaluate {} predicted against {} target series", pred.len(), target.len()));
    }
    let mut acc: Option<EvalReport> = None;
    for (p, t) in pred.iter().zip(target) {
        let r = evaluate(p, t)?;
        acc = Some(match acc {
            None => r,
            Some(mut a) => {
                a.rows.iter_mut().zip(&r.rows).for_each(|(x, y)| x.1 += y.1);
                a
            }
        });
    }
    let mut a = acc.expect("nonempty");
    a.rows.iter_mut().for_each(|x| x.1 /= pred.len() as f64);
    Ok(a)
}

pub fn parse_variants(names: &[String]) -> Result<Vec<Variant>> {
    names.iter().map(|n| Variant::parse(n).map_or_else(|| invalid(format!("unknown loss variant {n:?}")), Ok)).collect()
}

/// Run every stage into `out`, writing the manifest last.
pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let variants = parse_variants(&cfg.losses)?;
    std::fs::create_dir_all(out)?;
    let mut artifacts = Vec::new();
    let mut put = |name: &str, text: &str| -> Result<PathBuf> {
        let p = out.join(name);
        std::fs::write(&p, text)?;
        artifacts.push(name.to_string());
        Ok(p)
    };
    let data = gen_dataset(&cfg.dataset)?;
    let mut lifted = Vec::new();
    for (split, series) in [("train", &data.train), ("val", &data.val), ("test", &data.test)] {
        put(&format!("{split}_graphs.json"), &io::graph_series_to_string(series)?)?;
        let ccs = series.iter().map(|g| lift_series(g, &cfg.lift)).collect::<Result<Vec<_>>>()?;
        put(&format!("{split}_ccs.json"), &io::cc_series_to_string(&ccs)?)?;
        lifted.push(ccs);
    }
    let test = lifted.pop().expect("three splits");
    let val = lifted.pop().expect("three splits");
    let tr = lifted.pop().expect("three splits");
    let outcome = train(&cfg.train, &tr, &val)?;
    put("loss_curve.csv", &curve_csv(&outcome.curve))?;
    let stem = out.join("model");
    outcome.model.save(&stem, cfg.train.seed, serde_json::to_value(&cfg.train)?)?;
    artifacts.extend(["model.json".to_string(), "model.bin".to_string()]);
    let model = CcModel::load(&stem)?;
    let pred = test
        .iter()
        .enumerate()
        .map(|(i, s)| model.predict_series(s, rng::child_seed(cfg.sample_seed, "sample-series", i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut put = |name: &str, text: &str| -> Result<()> {
        std::fs::write(out.join(name), text)?;
        artifacts.push(name.to_string());
        Ok(())
    };
    put("pred.json", &io::cc_series_to_string(&pred)?)?;
    put("eval_graph.csv", &evaluate_series(&pred, &test)?.to_csv())?;
    put("eval_cc.json", &serde_json::to_string_pretty(&cc_losses(&pred, &test, &variants)?)?)?;
    let manifest = RunManifest {
        format: MANIFEST_FORMAT.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        seeds: vec![
            ("dataset".into(), cfg.dataset.seed),
            ("train".into(), cfg.train.seed),
            ("sample".into(), cfg.sample_seed),
        ],
        artifacts,
    };
    std::fs::write(out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)?;
    let m: RunManifest = io::parse_json(&text)?;
    if m.format != MANIFEST_FORMAT {
        return Err(crate::Error::Schema {
            expected: MANIFEST_FORMAT.into(),
            found: m.format,
        });
    }
    Ok(m)
}

/// Re-run the configuration recorded in a manifest into `out`.
pub fn replay(manifest: &Path, out: &Path) -> Result<RunManifest> {
    run_pipeline(&read_manifest(manifest)?.config, out)
}

/// Names of artifacts whose bytes differ between two run directories.
pub fn diff_runs(a: &Path, b: &Path, m: &RunManifest) -> Result<Vec<String>> {
    let mut diff = Vec::new();
    for name in m.artifacts.iter().map(String::as_str).chain([MANIFEST_FILE]) {
        if std::fs::read(a.join(name))? != std::fs::read(b.join(name))? {
            diff.push(name.to_string());
        }
    }
    Ok(diff)
}
