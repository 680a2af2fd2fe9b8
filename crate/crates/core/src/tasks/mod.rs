//! Downstream pipelines that consume an inferred graph.

pub mod denoise;
pub mod kmeans;
pub mod propagation;
pub mod sgc;
pub mod spectral;

pub use denoise::{best_tau_denoise, denoise, simoncelli_response, tau_grid, Denoiser, TAU_STEPS};
pub use kmeans::kmeans;
pub use propagation::{label_propagate, LabelPropagator, Propagation};
pub use sgc::{diffuse, fit_predict_diffused, sgc_fit_predict, SgcOutcome, SgcParams, SoftmaxRegression};
pub use spectral::{discretize, spectral_cluster, spectral_embed, EigenSelection};

use crate::error::{invalid, Result};

/// Cluster or class assignment per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub classes: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(invalid("a partition needs at least one class"));
        }
        if let Some(bad) = assignment.iter().find(|&&a| a >= classes) {
            return Err(invalid(format!("label {bad} out of range for {classes} classes")));
        }
        Ok(Partition { assignment, classes })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// Ground-truth labels with the subset visible to a semi-supervised method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiSupervisedLabels {
    labels: Vec<usize>,
    observed: Vec<bool>,
    classes: usize,
}

impl SemiSupervisedLabels {
    pub fn new(labels: Vec<usize>, observed: Vec<bool>, classes: usize) -> Result<Self> {
        if labels.len() != observed.len() {
            return Err(invalid("labels and mask differ in length"));
        }
        if !observed.iter().any(|&m| m) {
            return Err(invalid("at least one label must be observed"));
        }
        if observed.iter().all(|&m| m) {
            return Err(invalid("at least one label must be hidden"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(invalid(format!("label {bad} out of range for {classes} classes")));
        }
        Ok(SemiSupervisedLabels {
            labels,
            observed,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn observed_mask(&self) -> &[bool] {
        &self.observed
    }

    pub fn hidden_mask(&self) -> Vec<bool> {
        self.observed.iter().map(|m| !m).collect()
    }

    /// Label of vertex `i` if it is observed.
    pub fn observed_label(&self, i: usize) -> Option<usize> {
        self.observed[i].then_some(self.labels[i])
    }

    pub fn observed_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.observed[i]).collect()
    }

    /// Full ground truth, for scoring only.
    pub fn truth(&self) -> &[usize] {
        &self.labels
    }

    /// Most frequent observed class, ties to the lowest index.
    pub fn majority_class(&self) -> usize {
        let mut counts = vec![0usize; self.classes];
        for i in self.observed_indices() {
            counts[self.labels[i]] += 1;
        }
        argmax_lowest(counts.iter().map(|&c| c as f64), 0.0)
    }
}

/// Index of the largest value; values within `tol` of the maximum count as
/// ties and resolve to the lowest index.
pub(crate) fn argmax_lowest(values: impl Iterator<Item = f64> + Clone, tol: f64) -> usize {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    values.into_iter().position(|v| v >= max - tol).unwrap_or(0)
}
