//! Encoder plus one decoder per rank: next-step prediction and the
//! per-pair training losses.

use crate::autodiff::{load_checkpoint, save_checkpoint, ParamStore, Tape, Var};
use crate::complex::{CcSeries, CombinatorialComplex};
use crate::decoder::{Decoder, DecoderHyperparams, TraversalMode};
use crate::encoder::{Encoder, EncoderConfig};
use crate::error::Result;
use crate::matching::{DEFAULT_EPSILON, DEFAULT_SINKHORN_ITERS};
use crate::rng::{self, Rng};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossMode {
    Bce,
    SinkhornCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden: usize,
    pub rank1: DecoderHyperparams,
    pub rank2: DecoderHyperparams,
}

impl ModelConfig {
    pub fn new(input_dim: usize, hidden: usize, mode: TraversalMode) -> Self {
        ModelConfig {
            input_dim,
            hidden,
            rank1: DecoderHyperparams::for_rank(1, mode),
            rank2: DecoderHyperparams::for_rank(2, mode),
        }
    }

    /// Feature width implied by a series: its feature width, or the node
    /// count when identity features are used.
    pub fn input_dim_of(series: &CcSeries) -> usize {
        series.ccs.first().and_then(|c| c.features()).map_or(series.num_nodes, |f| f.cols)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modules {
    pub encoder: Encoder,
    pub rank1: Decoder,
    pub rank2: Decoder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcModel {
    pub config: ModelConfig,
    pub store: ParamStore,
    pub modules: Modules,
}

/// Persistence alignment: row i is cell i of `prev` if it survives into
/// `next`, else a zero row. New cells of `next` have no source row and are
/// left out.
pub fn aligned_targets(prev: &[Vec<usize>], next: &[Vec<usize>]) -> Vec<Vec<usize>> {
    prev.iter().map(|c| if next.binary_search(c).is_ok() { c.clone() } else { Vec::new() }).collect()
}

impl CcModel {
    pub fn new(config: ModelConfig, seed: u64) -> Self {
        let mut store = ParamStore::new();
        let mut r = rng::stream(seed, "init");
        let encoder = Encoder::new(
            &mut store,
            EncoderConfig {
                input_dim: config.input_dim,
                hidden: config.hidden,
            },
            &mut r,
        );
        let rank1 = Decoder::new(&mut store, "dec1", config.hidden, &mut r);
        let rank2 = Decoder::new(&mut store, "dec2", config.hidden, &mut r);
        CcModel {
            config,
            store,
            modules: Modules { encoder, rank1, rank2 },
        }
    }

    /// Rebuild a model from a configuration and a parameter store holding
    /// the same tensors (as loaded from a checkpoint).
    pub fn with_store(config: ModelConfig, store: ParamStore) -> Result<Self> {
        let fresh = CcModel::new(config, 0);
        if fresh.store.len() != store.len() || fresh.store.ids().any(|id| fresh.store.value(id).rows != store.value(id).rows || fresh.store.value(id).cols != store.value(id).cols || fresh.store.name(id) != store.name(id)) {
            return Err(crate::Error::InvalidArgument("checkpoint tensors do not match the model configuration".into()));
        }
        Ok(CcModel { store, ..fresh })
    }

    /// Write the parameters with the configuration as checkpoint metadata.
    pub fn save(&self, stem: &Path, seed: u64, extra: serde_json::Value) -> Result<()> {
        let hyper = serde_json::json!({ "model": self.config, "extra": extra });
        save_checkpoint(stem, &self.store, seed, hyper)
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (manifest, store) = load_checkpoint(stem)?;
        let config: ModelConfig = serde_json::from_value(manifest.hyperparameters.get("model").cloned().unwrap_or_default())?;
        CcModel::with_store(config, store)
    }

    fn hp(&self, rank: usize) -> &DecoderHyperparams {
        if rank == 1 { &self.config.rank1 } else { &self.config.rank2 }
    }

    fn decoder(&self, rank: usize) -> &Decoder {
        if rank == 1 { &self.modules.rank1 } else { &self.modules.rank2 }
    }

    /// Sample the edges and 2-cells of the next complex. Node count and
    /// features carry over.
    pub fn predict_next_cc(&self, cc: &CombinatorialComplex, r: &mut Rng) -> Result<CombinatorialComplex> {
        let mut t = Tape::new();
        let (h1, h2) = self.modules.encoder.encode(&mut t, &self.store, cc)?;
        let n = cc.num_nodes();
        let rows1 = self.modules.rank1.sample_matrix(&mut t, &self.store, h1, n, &self.config.rank1, r)?.matrix;
        let rows2 = self.modules.rank2.sample_matrix(&mut t, &self.store, h2, n, &self.config.rank2, r)?.matrix;
        CombinatorialComplex::from_co_incidence(&rows1, &rows2, n)?.with_features(cc.features().cloned())
    }

    /// One-step predictions for every timestep: index 0 repeats the input,
    /// index t + 1 is predicted from input t. Each step draws from its own
    /// seeded stream.
    pub fn predict_series(&self, series: &CcSeries, seed: u64) -> Result<CcSeries> {
        let mut out = Vec::with_capacity(series.len());
        if let Some(first) = series.ccs.first() {
            out.push(first.clone());
        }
        for (i, w) in series.ccs.windows(2).enumerate() {
            let mut r = rng::stream(rng::child_seed(seed, "predict", i as u64), "predict");
            let p = self.predict_next_cc(&w[0], &mut r)?;
            out.push(p.with_features(w[1].features().cloned())?);
        }
        CcSeries::new(series.num_nodes, out)
    }

    /// Sum of both ranks' losses for predicting `next` from `prev`, or
    /// `None` when no rank has anything to score.
    pub fn pair_loss(&self, t: &mut Tape, prev: &CombinatorialComplex, next: &CombinatorialComplex, mode: LossMode, r: &mut Rng) -> Result<Option<Var>> {
        let (h1, h2) = self.modules.encoder.encode(t, &self.store, prev)?;
        let n = prev.num_nodes();
        let mut parts = Vec::new();
        for (rank, h, cur, nxt) in [(1, h1, prev.cells1(), next.cells1()), (2, h2, prev.cells2(), next.cells2())] {
            let dec = self.decoder(rank);
            let hp = self.hp(rank);
            let l = match mode {
                LossMode::Bce => dec.teacher_forced_bce(t, &self.store, h, &aligned_targets(cur, nxt), n, hp, r)?,
                LossMode::SinkhornCosine => {
                    let target = next.co_incidence(rank)?;
                    dec.sinkhorn_cosine_loss(t, &self.store, h, &target, hp, DEFAULT_EPSILON, DEFAULT_SINKHORN_ITERS, r)?
                }
            };
            parts.extend(l);
        }
        Ok(match parts.as_slice() {
            [] => None,
            [one] => Some(*one),
            [a, b] => Some(t.add(*a, *b)?),
            _ => unreachable!(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Graph;
    use crate::lifting::{clique_lift, LiftConfig};

    fn house() -> CombinatorialComplex {
        let g = Graph::new(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap();
        clique_lift(&g, &LiftConfig::default())
    }

    #[test]
    fn predictions_are_valid_graph_based_complexes() {
        let m = CcModel::new(ModelConfig::new(5, 8, TraversalMode::Stochastic), 3);
        let cc = house();
        let mut r = rng::stream(1, "p");
        for _ in 0..30 {
            let p = m.predict_next_cc(&cc, &mut r).unwrap();
            assert!(p.validate().is_empty());
            assert_eq!(p.num_nodes(), 5);
            assert!(p.cells1().iter().all(|c| c.len() == 2));
        }
    }

    #[test]
    fn alignment_keeps_survivors_in_place() {
        let prev = vec![vec![0, 1], vec![1, 2], vec![2, 3]];
        let next = vec![vec![0, 1], vec![0, 4], vec![2, 3]];
        assert_eq!(aligned_targets(&prev, &next), vec![vec![0, 1], vec![], vec![2, 3]]);
    }

    #[test]
    fn pair_loss_is_finite_in_both_modes() {
        let m = CcModel::new(ModelConfig::new(5, 8, TraversalMode::Deterministic), 3);
        let cc = house();
        for mode in [LossMode::Bce, LossMode::SinkhornCosine] {
            let mut t = Tape::new();
            let mut r = rng::stream(0, "l");
            let l = m.pair_loss(&mut t, &cc, &cc, mode, &mut r).unwrap().unwrap();
            assert!(t.scalar(l).is_finite() && t.scalar(l) >= 0.0);
        }
    }

    #[test]
    fn checkpoint_round_trip_rebuilds_the_model() {
        let m = CcModel::new(ModelConfig::new(5, 8, TraversalMode::Deterministic), 3);
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("ckpt");
        m.save(&stem, 3, serde_json::Value::Null).unwrap();
        let back = CcModel::load(&stem).unwrap();
        assert_eq!(back.config, m.config);
        for id in m.store.ids() {
            let (a, b) = (m.store.value(id), back.store.value(id));
            assert!(a.data.iter().zip(&b.data).all(|(x, y)| (*x as f32) == (*y as f32)));
        }
    }

    #[test]
    fn edgeless_pair_scores_nothing() {
        let m = CcModel::new(ModelConfig::new(4, 8, TraversalMode::Deterministic), 3);
        let cc = CombinatorialComplex::new(4, vec![], vec![]).unwrap();
        let mut t = Tape::new();
        let mut r = rng::stream(0, "l");
        assert!(m.pair_loss(&mut t, &cc, &cc, LossMode::Bce, &mut r).unwrap().is_none());
    }
}
