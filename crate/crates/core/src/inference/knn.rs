use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::similarity::SimilarityMatrix;

/// Indices of the `k` largest off-diagonal entries of row `i`, ties broken
/// toward the lower index.
pub(crate) fn top_k_neighbors(row: ndarray::ArrayView1<'_, f64>, i: usize, k: usize) -> Vec<usize> {
    let mut cand: Vec<usize> = (0..row.len()).filter(|&j| j != i).collect();
    let order = |a: &usize, b: &usize| row[*b].total_cmp(&row[*a]).then(a.cmp(b));
    if k < cand.len() {
        cand.select_nth_unstable_by(k, order);
        cand.truncate(k);
    }
    cand.sort_by(order);
    cand
}

/// k-nearest-neighbor sparsification with union symmetrization.
///
/// Each vertex keeps its `k` most similar vertices; an edge survives when
/// either endpoint selected the other, weighted by the original similarity.
/// Non-positive selected similarities are dropped.
pub fn knn_select(s: &SimilarityMatrix, k: usize) -> Result<Graph> {
    let n = s.n();
    if k == 0 || k >= n {
        return Err(invalid(format!("k must satisfy 1 <= k < n, got k={k}, n={n}")));
    }
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            top_k_neighbors(s.values.row(i), i, k)
                .into_iter()
                .map(move |j| (i.min(j), i.max(j)))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    Graph::from_edges(n, pairs.into_iter().map(|(i, j)| (i, j, s.values[[i, j]])))
}

/// Every strictly positive off-diagonal similarity becomes an edge.
pub fn dense_graph(s: &SimilarityMatrix) -> Graph {
    Graph::from_dense_upper(s.values.view(), 0.0)
}
