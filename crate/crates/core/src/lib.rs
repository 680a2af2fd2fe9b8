//! Graph topology inference and downstream-task benchmarking.
//!
//! Graphs are inferred from nodal observations with naive k-NN sparsification,
//! non-negative kernel regression (NNK) or smoothness-based learning, then
//! scored on spectral clustering, semi-supervised vertex classification and
//! graph-signal denoising.

pub mod error;
pub mod graph;
pub mod harness;
pub mod inference;
pub mod linalg;
pub mod metrics;
pub mod similarity;
pub mod tasks;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, Variant};
pub use linalg::{eigendecompose, matrix_exponential, SpectralDecomposition};
pub use similarity::{FeatureMatrix, SimilarityKind, SimilarityMatrix};
