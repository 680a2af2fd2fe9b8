//! Label propagation through the exponential of the adjacency matrix.
//!
//! `exp(W)` is block diagonal over connected components, so it is formed one
//! component at a time. A component without any observed vertex receives no
//! label mass at all and its vertices fall back to the majority class.

use ndarray::Array2;

use super::{argmax_lowest, SemiSupervisedLabels};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::matrix_exponential;

/// Relative gap under which class scores count as tied.
const TIE_TOL: f64 = 1e-10;

struct Block {
    vertices: Vec<usize>,
    exp: Array2<f64>,
}

/// Precomputed diffusion operator, reusable across label splits.
pub struct LabelPropagator {
    n: usize,
    blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Propagation {
    /// Observed labels where known, predictions elsewhere.
    pub labels: Vec<usize>,
    /// Hidden vertices that received no label mass.
    pub fallbacks: usize,
}

impl LabelPropagator {
    pub fn new(g: &Graph) -> Result<Self> {
        let comp = g.components();
        let count = comp.iter().max().map_or(0, |m| m + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (v, &c) in comp.iter().enumerate() {
            members[c].push(v);
        }
        let dense = g.to_dense();
        let blocks = members
            .into_iter()
            .map(|vertices| {
                let m = vertices.len();
                let sub = Array2::from_shape_fn((m, m), |(a, b)| dense[[vertices[a], vertices[b]]]);
                Ok(Block {
                    exp: matrix_exponential(sub.view())?,
                    vertices,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabelPropagator { n: g.n(), blocks })
    }

    /// Diffuses one-hot observed labels scaled by `magnitude`.
    pub fn propagate_scaled(&self, y: &SemiSupervisedLabels, magnitude: f64) -> Result<Propagation> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} vertices, labels have {}",
                self.n,
                y.len()
            )));
        }
        let classes = y.classes();
        let majority = y.majority_class();
        let mut labels = vec![0; self.n];
        let mut fallbacks = 0;
        for block in &self.blocks {
            let m = block.vertices.len();
            let mut seeds = Array2::<f64>::zeros((m, classes));
            let mut labeled = false;
            for (a, &v) in block.vertices.iter().enumerate() {
                if let Some(l) = y.observed_label(v) {
                    seeds[[a, l]] = magnitude;
                    labeled = true;
                }
            }
            let scores = labeled.then(|| block.exp.dot(&seeds));
            for (a, &v) in block.vertices.iter().enumerate() {
                labels[v] = match (y.observed_label(v), &scores) {
                    (Some(l), _) => l,
                    (None, Some(s)) => {
                        let row = s.row(a);
                        let top = row.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
                        argmax_lowest(row.iter().copied(), TIE_TOL * top)
                    }
                    (None, None) => {
                        fallbacks += 1;
                        majority
                    }
                };
            }
        }
        Ok(Propagation { labels, fallbacks })
    }

    pub fn propagate(&self, y: &SemiSupervisedLabels) -> Result<Propagation> {
        self.propagate_scaled(y, 1.0)
    }
}

/// One-shot label propagation: `Ŷ = exp(W) · Y0`, argmax per hidden vertex.
pub fn label_propagate(g: &Graph, y: &SemiSupervisedLabels) -> Result<Propagation> {
    LabelPropagator::new(g)?.propagate(y)
}
