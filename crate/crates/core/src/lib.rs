//! Dynamic combinatorial complexes.
//!
//! Data model and neighbourhood matrices for rank-2 combinatorial complexes,
//! clique lifting, synthetic temporal networks, permutation-invariant row
//! matching losses, a small reverse-mode autodiff engine, the attention
//! encoder and tree-structured incidence decoder, training, and temporal
//! network evaluation.

pub mod autodiff;
pub mod complex;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod gradsuite;
pub mod io;
pub mod lifting;
pub mod linalg;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod training;

pub use complex::{CcSeries, CoIncidenceMatrix, CombinatorialComplex, Graph, GraphSeries, SparseBinary, Violation};
pub use error::{Error, Result};
pub use linalg::Mat;
