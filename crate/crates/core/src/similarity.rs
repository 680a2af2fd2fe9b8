//! Pairwise similarities and distances between observations or features.
//!
//! Every matrix here is built one upper-triangular row at a time and
//! mirrored, so the output is exactly symmetric and does not depend on how
//! rows are scheduled across worker threads.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// `N` observations by `F` features, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Array2<f64>);

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(invalid(format!(
                "feature matrix must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos / values.ncols(), pos % values.ncols());
            return Err(invalid(format!("non-finite feature at ({r}, {c})")));
        }
        Ok(FeatureMatrix(values))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    /// Transposed copy: features become observations.
    pub fn transposed(&self) -> FeatureMatrix {
        FeatureMatrix(self.0.t().as_standard_layout().into_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimilarityKind {
    Cosine,
    Covariance,
    Rbf,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 3] = [
        SimilarityKind::Cosine,
        SimilarityKind::Covariance,
        SimilarityKind::Rbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityKind::Cosine => "cosine",
            SimilarityKind::Covariance => "covariance",
            SimilarityKind::Rbf => "rbf",
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(SimilarityKind::Cosine),
            "covariance" => Ok(SimilarityKind::Covariance),
            "rbf" => Ok(SimilarityKind::Rbf),
            other => Err(invalid(format!("unknown similarity `{other}`"))),
        }
    }
}

/// Dense symmetric similarity between items.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub values: Array2<f64>,
    pub kind: SimilarityKind,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Whether items are the rows (observations) or the columns (features).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairAxis {
    Rows,
    Cols,
}

/// Fills a symmetric matrix from `entry(i, j)` evaluated for `j >= i`.
fn symmetric_from<F>(n: usize, entry: F) -> Array2<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| entry(i, j)).collect())
        .collect();
    let mut out = Array2::zeros((n, n));
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

fn dot(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `Z[i, j] = ‖x_i − x_j‖²` between rows or between columns of `x`.
pub fn pairwise_sq_euclidean(x: &FeatureMatrix, axis: PairAxis) -> Array2<f64> {
    let items = match axis {
        PairAxis::Rows => x.view().to_owned(),
        PairAxis::Cols => x.transposed().into_inner(),
    };
    let n = items.nrows();
    symmetric_from(n, |i, j| {
        if i == j {
            return 0.0;
        }
        items
            .row(i)
            .iter()
            .zip(items.row(j).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    })
}

/// Cosine of the angle between every pair of rows.
pub fn cosine_similarity(x: &FeatureMatrix) -> Result<SimilarityMatrix> {
    let v = x.view();
    let norms: Vec<f64> = v.rows().into_iter().map(|r| dot(r, r).sqrt()).collect();
    if let Some(i) = norms.iter().position(|&nrm| nrm == 0.0) {
        return Err(Error::DegenerateObservation(i));
    }
    let values = symmetric_from(v.nrows(), |i, j| {
        if i == j {
            1.0
        } else {
            (dot(v.row(i), v.row(j)) / (norms[i] * norms[j])).clamp(-1.0, 1.0)
        }
    });
    Ok(SimilarityMatrix {
        values,
        kind: SimilarityKind::Cosine,
    })
}

/// Sample covariance between rows, each row centered over its own features,
/// with the unbiased `F − 1` divisor.
pub fn covariance_similarity(x: &FeatureMatrix) -> Result<SimilarityMatrix> {
    let f = x.cols();
    if f < 2 {
        return Err(invalid("covariance needs at least two features"));
    }
    let mut centered = x.view().to_owned();
    for mut row in centered.rows_mut() {
        let mean = row.sum() / f as f64;
        row.mapv_inplace(|v| v - mean);
    }
    let denom = (f - 1) as f64;
    let values = symmetric_from(centered.nrows(), |i, j| dot(centered.row(i), centered.row(j)) / denom);
    Ok(SimilarityMatrix {
        values,
        kind: SimilarityKind::Covariance,
    })
}

/// Gaussian kernel `exp(−γ·Z)` applied to a squared-distance matrix.
pub fn rbf_kernel(z: ArrayView2<'_, f64>, gamma: f64) -> Result<SimilarityMatrix> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("rbf gamma must be positive, got {gamma}")));
    }
    if z.nrows() != z.ncols() {
        return Err(Error::DimensionMismatch("distance matrix must be square".into()));
    }
    if z.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(invalid("distances must be finite and non-negative"));
    }
    let values = symmetric_from(z.nrows(), |i, j| (-gamma * z[[i, j]]).exp());
    Ok(SimilarityMatrix {
        values,
        kind: SimilarityKind::Rbf,
    })
}

/// Default RBF bandwidth: reciprocal of the dimension of the compared vectors.
pub fn default_gamma(dimension: usize) -> f64 {
    1.0 / dimension.max(1) as f64
}

/// Similarity between rows of `x` of the requested kind.
pub fn similarity(x: &FeatureMatrix, kind: SimilarityKind, gamma: Option<f64>) -> Result<SimilarityMatrix> {
    match kind {
        SimilarityKind::Cosine => cosine_similarity(x),
        SimilarityKind::Covariance => covariance_similarity(x),
        SimilarityKind::Rbf => {
            let z = pairwise_sq_euclidean(x, PairAxis::Rows);
            rbf_kernel(z.view(), gamma.unwrap_or_else(|| default_gamma(x.cols())))
        }
    }
}
