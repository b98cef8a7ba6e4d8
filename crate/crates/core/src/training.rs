//! Training loop with plateau learning-rate decay and early stopping, and
//! the four-configuration ablation.

use crate::autodiff::{Adam, AdamConfig, ParamStore, Tape};
use crate::complex::CcSeries;
use crate::decoder::TraversalMode;
use crate::error::{Error, Result};
use crate::model::{CcModel, LossMode, ModelConfig};
use crate::rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub loss: LossMode,
    pub traversal: TraversalMode,
    pub lr: f64,
    pub decay_factor: f64,
    pub patience_decay: usize,
    pub patience_stop: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub hidden: usize,
    /// Training and validation series files, used by the command line.
    #[serde(default)]
    pub train_path: Option<String>,
    #[serde(default)]
    pub val_path: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossMode::Bce,
            traversal: TraversalMode::Deterministic,
            lr: 1e-3,
            decay_factor: 0.1,
            patience_decay: 10,
            patience_stop: 20,
            max_epochs: 200,
            seed: 0,
            hidden: 256,
            train_path: None,
            val_path: None,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        let ok = self.decay_factor > 0.0
            && self.decay_factor < 1.0
            && self.lr > 0.0
            && self.hidden > 0
            && self.max_epochs > 0
            && (self.patience_decay < self.patience_stop || self.patience_stop == 0);
        if ok { Ok(()) } else { Err(Error::InvalidArgument(format!("bad training configuration {self:?}"))) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AblationModelId {
    Model1,
    Model2,
    Model3,
    Model4,
}

impl AblationModelId {
    pub const ALL: [AblationModelId; 4] = [Self::Model1, Self::Model2, Self::Model3, Self::Model4];

    pub fn parts(self) -> (LossMode, TraversalMode) {
        match self {
            Self::Model1 => (LossMode::Bce, TraversalMode::Deterministic),
            Self::Model2 => (LossMode::Bce, TraversalMode::Stochastic),
            Self::Model3 => (LossMode::SinkhornCosine, TraversalMode::Deterministic),
            Self::Model4 => (LossMode::SinkhornCosine, TraversalMode::Stochastic),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Model1 => "model1",
            Self::Model2 => "model2",
            Self::Model3 => "model3",
            Self::Model4 => "model4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Model holding the best-validation parameters.
    pub model: CcModel,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub curve: Vec<EpochRecord>,
}

/// Loss curve as CSV with columns epoch, train_loss, val_loss, lr.
pub fn curve_csv(curve: &[EpochRecord]) -> String {
    let mut s = String::from("epoch,train_loss,val_loss,lr\n");
    for r in curve {
        let _ = writeln!(s, "{},{},{},{}", r.epoch, r.train_loss, r.val_loss, r.lr);
    }
    s
}

fn mean(sum: f64, n: usize) -> f64 {
    if n == 0 { 0.0 } else { sum / n as f64 }
}

/// Mean pair loss over a set of series with fixed parameters.
pub fn evaluate_loss(model: &CcModel, series: &[CcSeries], mode: LossMode, seed: u64) -> Result<f64> {
    let mut r = rng::stream(seed, "eval-loss");
    let (mut total, mut n) = (0.0, 0);
    for s in series {
        for w in s.ccs.windows(2) {
            let mut t = Tape::new();
            if let Some(l) = model.pair_loss(&mut t, &w[0], &w[1], mode, &mut r)? {
                total += t.scalar(l);
                n += 1;
            }
        }
    }
    Ok(mean(total, n))
}

/// Train on consecutive pairs, one Adam step per pair, series and pairs in
/// fixed order. The learning rate is multiplied by the decay factor after
/// `patience_decay` epochs without validation improvement; training stops
/// after `patience_stop` such epochs or at `max_epochs`.
pub fn train(cfg: &TrainConfig, train_set: &[CcSeries], val_set: &[CcSeries]) -> Result<TrainOutcome> {
    cfg.check()?;
    let first = train_set.first().ok_or_else(|| Error::InvalidArgument("empty training set".into()))?;
    if val_set.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".into()));
    }
    let input_dim = ModelConfig::input_dim_of(first);
    let mut model = CcModel::new(ModelConfig::new(input_dim, cfg.hidden, cfg.traversal), cfg.seed);
    let mut adam = Adam::new(AdamConfig { lr: cfg.lr, ..AdamConfig::default() });
    let mut best: Option<(usize, f64, ParamStore)> = None;
    let mut curve = Vec::new();
    let (mut since_best, mut since_decay) = (0usize, 0usize);
    for epoch in 1..=cfg.max_epochs {
        let mut r = rng::stream(rng::child_seed(cfg.seed, "train-epoch", epoch as u64), "train");
        let (mut total, mut n) = (0.0, 0);
        for (si, s) in train_set.iter().enumerate() {
            for (ti, w) in s.ccs.windows(2).enumerate() {
                let mut t = Tape::new();
                let Some(l) = model.pair_loss(&mut t, &w[0], &w[1], cfg.loss, &mut r)? else {
                    continue;
                };
                let v = t.scalar(l);
                if !v.is_finite() {
                    return Err(Error::NonFiniteLoss { epoch, series: si, timestep: ti });
                }
                t.backward(l)?;
                let g = t.param_grads(&model.store);
                adam.step(&mut model.store, &g);
                total += v;
                n += 1;
            }
        }
        let val = evaluate_loss(&model, val_set, cfg.loss, rng::child_seed(cfg.seed, "val-epoch", epoch as u64))?;
        if !val.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, series: usize::MAX, timestep: usize::MAX });
        }
        curve.push(EpochRecord {
            epoch,
            train_loss: mean(total, n),
            val_loss: val,
            lr: adam.config.lr,
        });
        log::debug!("epoch {epoch}: train {:.6} val {val:.6} lr {:e}", mean(total, n), adam.config.lr);
        if best.as_ref().is_none_or(|b| val < b.1) {
            best = Some((epoch, val, model.store.clone()));
            since_best = 0;
            since_decay = 0;
        } else {
            since_best += 1;
            since_decay += 1;
        }
        if since_best >= cfg.patience_stop {
            break;
        }
        if since_decay >= cfg.patience_decay {
            adam.config.lr *= cfg.decay_factor;
            since_decay = 0;
        }
    }
    let (best_epoch, best_val_loss, store) = best.expect("at least one epoch runs");
    model.store = store;
    Ok(TrainOutcome {
        model,
        best_epoch,
        best_val_loss,
        curve,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub model: AblationModelId,
    pub seed: u64,
    pub epochs: usize,
    pub first_val_loss: f64,
    pub best_val_loss: f64,
    /// Best validation loss below half the epoch-1 value.
    pub improved: bool,
}

#[derive(Debug, Clone)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    pub curves: Vec<(AblationModelId, u64, Vec<EpochRecord>)>,
}

impl AblationReport {
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("model,seed,epochs,first_val_loss,best_val_loss,improved\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{},{}", r.model.name(), r.seed, r.epochs, r.first_val_loss, r.best_val_loss, r.improved);
        }
        s
    }
}

/// Train all four configurations for every seed with `base` as the shared
/// configuration (its loss, traversal and seed are overridden).
pub fn run_ablation(base: &TrainConfig, train_set: &[CcSeries], val_set: &[CcSeries], seeds: &[u64]) -> Result<AblationReport> {
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for id in AblationModelId::ALL {
        let (loss, traversal) = id.parts();
        for &seed in seeds {
            let cfg = TrainConfig { loss, traversal, seed, ..base.clone() };
            let out = train(&cfg, train_set, val_set)?;
            let first = out.curve[0].val_loss;
            rows.push(AblationRow {
                model: id,
                seed,
                epochs: out.curve.len(),
                first_val_loss: first,
                best_val_loss: out.best_val_loss,
                improved: out.best_val_loss < 0.5 * first,
            });
            curves.push((id, seed, out.curve));
        }
    }
    Ok(AblationReport { rows, curves })
}
