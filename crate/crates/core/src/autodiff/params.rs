use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng::Rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named parameter matrices, in creation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Mat>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Mat) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    /// Uniform in ±sqrt(6 / (fan_in + fan_out)).
    pub fn xavier(&mut self, name: impl Into<String>, rows: usize, cols: usize, rng: &mut Rng) -> ParamId {
        let a = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.gen_range(-a..a)).collect();
        self.add(name, Mat::from_vec(rows, cols, data))
    }

    pub fn zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> ParamId {
        self.add(name, Mat::zeros(rows, cols))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, id: ParamId) -> &Mat {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Mat {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn num_scalars(&self) -> usize {
        self.values.iter().map(|m| m.data.len()).sum()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Mat] {
        &mut self.values
    }
}

pub const CHECKPOINT_FORMAT: &str = "dyncc-checkpoint-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

/// JSON side of a checkpoint. The blob holds every parameter as
/// little-endian f32, in `tensors` order, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: String,
    pub seed: u64,
    pub hyperparameters: serde_json::Value,
    pub tensors: Vec<TensorEntry>,
}

/// Write `<stem>.json` and `<stem>.bin`.
pub fn save_checkpoint(stem: &Path, store: &ParamStore, seed: u64, hyperparameters: serde_json::Value) -> Result<()> {
    let manifest = CheckpointManifest {
        format: CHECKPOINT_FORMAT.into(),
        seed,
        hyperparameters,
        tensors: store
            .names
            .iter()
            .zip(&store.values)
            .map(|(n, m)| TensorEntry {
                name: n.clone(),
                rows: m.rows,
                cols: m.cols,
            })
            .collect(),
    };
    let mut blob = Vec::with_capacity(store.num_scalars() * 4);
    for m in &store.values {
        for &x in &m.data {
            blob.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&manifest)?)?;
    std::fs::write(stem.with_extension("bin"), blob)?;
    Ok(())
}

/// Read a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(stem: &Path) -> Result<(CheckpointManifest, ParamStore)> {
    let manifest: CheckpointManifest = crate::io::parse_json(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    if manifest.format != CHECKPOINT_FORMAT {
        return Err(Error::Schema {
            expected: CHECKPOINT_FORMAT.into(),
            found: manifest.format,
        });
    }
    let blob = std::fs::read(stem.with_extension("bin"))?;
    let need: usize = manifest.tensors.iter().map(|t| t.rows * t.cols * 4).sum();
    if blob.len() != need {
        return Err(Error::InvalidArgument(format!("checkpoint blob has {} bytes, manifest needs {need}", blob.len())));
    }
    let mut store = ParamStore::new();
    let mut off = 0;
    for t in &manifest.tensors {
        let n = t.rows * t.cols;
        let data = blob[off..off + 4 * n]
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect();
        off += 4 * n;
        store.add(t.name.clone(), Mat::from_vec(t.rows, t.cols, data));
    }
    Ok((manifest, store))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xavier_bounds() {
        let mut s = ParamStore::new();
        let mut r = crate::rng::stream(1, "t");
        let id = s.xavier("w", 10, 14, &mut r);
        let a = (6.0f64 / 24.0).sqrt();
        assert!(s.value(id).data.iter().all(|x| x.abs() <= a));
    }

    #[test]
    fn checkpoint_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ParamStore::new();
        s.add("a", Mat::from_vec(1, 2, vec![0.5, -1.25]));
        s.add("b", Mat::zeros(2, 1));
        let stem = dir.path().join("ckpt");
        save_checkpoint(&stem, &s, 3, serde_json::json!({"hidden": 4})).unwrap();
        let (m, back) = load_checkpoint(&stem).unwrap();
        assert_eq!(m.seed, 3);
        assert_eq!(back, s);
    }
}
