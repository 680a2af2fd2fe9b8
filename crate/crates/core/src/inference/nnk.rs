//! Non-negative kernel regression (NNK) graphs.
//!
//! Each vertex is approximated by a non-negative combination of its `k`
//! most similar vertices in kernel space. Neighbors that are already
//! explained by closer ones receive zero weight, which is what makes NNK
//! sparser than the plain k-NN graph it starts from.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::knn::top_k_neighbors;
use super::nnls::nnls_solve;
use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::similarity::{similarity, FeatureMatrix, SimilarityKind, SimilarityMatrix};

pub const DEFAULT_SIGMA: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnkConfig {
    pub kernel: SimilarityKind,
    pub k: usize,
    pub sigma: f64,
    pub gamma: Option<f64>,
}

impl NnkConfig {
    pub fn new(kernel: SimilarityKind, k: usize) -> Self {
        NnkConfig {
            kernel,
            k,
            sigma: DEFAULT_SIGMA,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NnkReport {
    /// Vertices whose solve failed and fell back to plain k-NN weights.
    pub fallbacks: usize,
    /// Vertices left without any edge.
    pub isolated: usize,
}

/// Turns a similarity into a kernel usable by the solver: negatives are
/// clipped and covariance is rescaled to a unit diagonal.
pub fn kernel_from_similarity(s: &SimilarityMatrix) -> Array2<f64> {
    let mut k = s.values.mapv(|v| v.max(0.0));
    if s.kind == SimilarityKind::Covariance {
        let inv: Vec<f64> = k
            .diag()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        for ((i, j), v) in k.indexed_iter_mut() {
            *v *= inv[i] * inv[j];
        }
    }
    k
}

/// NNK graph from a precomputed similarity.
///
/// Neighborhoods are chosen by the raw similarity ranking, so the edge set
/// is always contained in `knn_select(s, k)`.
pub fn nnk_from_similarity(s: &SimilarityMatrix, k: usize, sigma: f64) -> Result<(Graph, NnkReport)> {
    let n = s.n();
    if k == 0 || k >= n {
        return Err(invalid(format!("k must satisfy 1 <= k < n, got k={k}, n={n}")));
    }
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let kernel = kernel_from_similarity(s);

    let per_vertex: Vec<(Vec<(usize, f64)>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nbrs = top_k_neighbors(s.values.row(i), i, k);
            let m = nbrs.len();
            let k_ss = Array2::from_shape_fn((m, m), |(a, b)| kernel[[nbrs[a], nbrs[b]]]);
            let k_si = Array1::from_iter(nbrs.iter().map(|&j| kernel[[j, i]]));
            let (theta, fell_back) = match nnls_solve(k_ss.view(), k_si.view()) {
                Ok(t) => (t, false),
                Err(_) => (k_si.clone(), true),
            };
            let kept = nbrs
                .into_iter()
                .zip(theta)
                .filter(|&(_, w)| w > sigma)
                .collect();
            (kept, fell_back)
        })
        .collect();

    let mut report = NnkReport::default();
    let mut sym: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, (kept, fell_back)) in per_vertex.into_iter().enumerate() {
        report.fallbacks += usize::from(fell_back);
        for (j, w) in kept {
            *sym.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * w;
        }
    }
    let g = Graph::from_edges(
        n,
        sym.into_iter()
            .filter(|&(_, w)| w > sigma)
            .map(|((i, j), w)| (i, j, w)),
    )?;
    report.isolated = g.neighbor_counts().iter().filter(|&&c| c == 0).count();
    Ok((g, report))
}

/// NNK graph between the rows of `x`.
pub fn nnk_graph(x: &FeatureMatrix, cfg: &NnkConfig) -> Result<(Graph, NnkReport)> {
    let s = similarity(x, cfg.kernel, cfg.gamma)?;
    nnk_from_similarity(&s, cfg.k, cfg.sigma)
}
