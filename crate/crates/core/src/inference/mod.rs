//! Graph construction from nodal observations.

pub mod knn;
pub mod nnk;
pub mod nnls;
pub mod smooth;

pub use knn::{dense_graph, knn_select};
pub use nnk::{nnk_from_similarity, nnk_graph, NnkConfig, NnkReport, DEFAULT_SIGMA};
pub use nnls::{nnls_solve, NnlsFailure};
pub use smooth::{smooth_graph, smooth_solve, SmoothConfig, SmoothReport, SolverOptions};

use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::similarity::{similarity, FeatureMatrix, SimilarityKind};

/// Table of neighborhood sizes swept for every inference method.
pub const K_GRID: [usize; 10] = [5, 10, 20, 30, 40, 50, 100, 200, 500, 1000];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveConfig {
    pub similarity: SimilarityKind,
    pub k: usize,
    pub gamma: Option<f64>,
}

/// Similarity followed by k-NN sparsification. Normalization is left to the
/// caller.
pub fn naive_graph(x: &FeatureMatrix, cfg: &NaiveConfig) -> Result<Graph> {
    if x.rows() < 2 {
        return Err(invalid("need at least two observations"));
    }
    let s = similarity(x, cfg.similarity, cfg.gamma)?;
    knn_select(&s, cfg.k)
}
