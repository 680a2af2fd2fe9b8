//! Simplified graph convolution: fixed feature diffusion followed by a
//! softmax regression trained full-batch with Adam.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{argmax_lowest, SemiSupervisedLabels};
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::metrics::accuracy;
use crate::similarity::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgcParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub diffusion_hops: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for SgcParams {
    fn default() -> Self {
        SgcParams {
            epochs: 100,
            learning_rate: 0.001,
            diffusion_hops: 2,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
        }
    }
}

/// Multinomial logistic regression without regularization.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxRegression {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl SoftmaxRegression {
    /// Weights and bias drawn from `U(−s, s)` with `s = 1/√F`.
    pub fn init_uniform(features: usize, classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = 1.0 / (features.max(1) as f64).sqrt();
        let weights = Array2::from_shape_fn((features, classes), |_| rng.random_range(-s..s));
        let bias = Array1::from_shape_fn(classes, |_| rng.random_range(-s..s));
        SoftmaxRegression { weights, bias }
    }

    pub fn logits(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.dot(&self.weights) + self.bias.view().insert_axis(Axis(0))
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        self.logits(x)
            .rows()
            .into_iter()
            .map(|r| argmax_lowest(r.iter().copied(), 0.0))
            .collect()
    }

    /// Trains on `rows` of `x` for exactly `params.epochs` Adam steps on the
    /// mean cross-entropy. Returns the final loss.
    pub fn fit(&mut self, x: ArrayView2<'_, f64>, labels: &[usize], rows: &[usize], params: &SgcParams) -> Result<f64> {
        let classes = self.bias.len();
        if rows.is_empty() {
            return Err(invalid("no training rows"));
        }
        let xs = x.select(Axis(0), rows);
        let m = rows.len() as f64;
        let mut onehot = Array2::<f64>::zeros((rows.len(), classes));
        for (r, &i) in rows.iter().enumerate() {
            onehot[[r, labels[i]]] = 1.0;
        }

        let mut m_w = Array2::<f64>::zeros(self.weights.raw_dim());
        let mut v_w = Array2::<f64>::zeros(self.weights.raw_dim());
        let mut m_b = Array1::<f64>::zeros(classes);
        let mut v_b = Array1::<f64>::zeros(classes);
        let mut loss = f64::NAN;

        for epoch in 1..=params.epochs {
            let mut probs = self.logits(xs.view());
            loss = 0.0;
            for (mut row, y) in probs.rows_mut().into_iter().zip(onehot.rows()) {
                let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                row.mapv_inplace(|v| (v - max).exp());
                let z = row.sum();
                row /= z;
                let target = y.iter().position(|&t| t == 1.0).expect("one-hot row");
                loss -= row[target].ln();
            }
            loss /= m;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss(epoch));
            }
            let delta = (probs - &onehot) / m;
            let grad_w = xs.t().dot(&delta);
            let grad_b = delta.sum_axis(Axis(0));

            let t = epoch as i32;
            let c1 = 1.0 - params.beta1.powi(t);
            let c2 = 1.0 - params.beta2.powi(t);
            adam_step(&mut self.weights, &grad_w, &mut m_w, &mut v_w, params, c1, c2);
            adam_step(&mut self.bias, &grad_b, &mut m_b, &mut v_b, params, c1, c2);
        }
        Ok(loss)
    }
}

fn adam_step<D: ndarray::Dimension>(
    param: &mut ndarray::Array<f64, D>,
    grad: &ndarray::Array<f64, D>,
    m: &mut ndarray::Array<f64, D>,
    v: &mut ndarray::Array<f64, D>,
    p: &SgcParams,
    c1: f64,
    c2: f64,
) {
    ndarray::Zip::from(param)
        .and(grad)
        .and(m)
        .and(v)
        .for_each(|w, &g, m, v| {
            *m = p.beta1 * *m + (1.0 - p.beta1) * g;
            *v = p.beta2 * *v + (1.0 - p.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *w -= p.learning_rate * m_hat / (v_hat.sqrt() + p.eps);
        });
}

/// `W^hops · X` as successive sparse products.
pub fn diffuse(g: &Graph, x: ArrayView2<'_, f64>, hops: usize) -> Result<Array2<f64>> {
    let mut out = x.to_owned();
    for _ in 0..hops {
        out = g.multiply(out.view())?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgcOutcome {
    /// Observed labels where known, predictions elsewhere.
    pub labels: Vec<usize>,
    /// Accuracy over hidden vertices.
    pub accuracy: f64,
}

/// Trains on observed vertices of already-diffused features.
pub fn fit_predict_diffused(diffused: ArrayView2<'_, f64>, y: &SemiSupervisedLabels, params: &SgcParams) -> Result<SgcOutcome> {
    if diffused.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows for {} labels",
            diffused.nrows(),
            y.len()
        )));
    }
    let mut model = SoftmaxRegression::init_uniform(diffused.ncols(), y.classes(), params.seed);
    model.fit(diffused, y.truth(), &y.observed_indices(), params)?;
    let predicted = model.predict(diffused);
    let labels: Vec<usize> = (0..y.len())
        .map(|i| y.observed_label(i).unwrap_or(predicted[i]))
        .collect();
    let acc = accuracy(&labels, y.truth(), &y.hidden_mask())?;
    Ok(SgcOutcome { labels, accuracy: acc })
}

/// SGC on a graph: `X̂ = W(W X)` then softmax regression on observed rows.
pub fn sgc_fit_predict(g: &Graph, x: &FeatureMatrix, y: &SemiSupervisedLabels, params: &SgcParams) -> Result<SgcOutcome> {
    let diffused = diffuse(g, x.view(), params.diffusion_hops)?;
    fit_predict_diffused(diffused.view(), y, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn identity_graph(n: usize) -> Graph {
        Graph::empty(n).normalize(crate::graph::Variant::Augmented).unwrap().0
    }

    fn blobs(n: usize, seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let mut x = Array2::zeros((n, 2));
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 2;
            labels.push(c);
            let center = if c == 0 { [-3.0, -3.0] } else { [3.0, 3.0] };
            x[[i, 0]] = center[0] + noise.sample(&mut rng);
            x[[i, 1]] = center[1] + noise.sample(&mut rng);
        }
        (x, labels)
    }

    #[test]
    fn identity_diffusion_is_plain_logistic_regression() {
        let (x, labels) = blobs(20, 1);
        let mask: Vec<bool> = (0..20).map(|i| i < 6).collect();
        let y = SemiSupervisedLabels::new(labels, mask, 2).unwrap();
        let params = SgcParams { seed: 4, ..SgcParams::default() };
        let fm = FeatureMatrix::new(x.clone()).unwrap();
        let via_graph = sgc_fit_predict(&identity_graph(20), &fm, &y, &params).unwrap();
        let direct = fit_predict_diffused(x.view(), &y, &params).unwrap();
        assert_eq!(via_graph, direct);
    }

    #[test]
    fn separable_blobs_reach_full_accuracy() {
        // Many weakly informative features: the init logit gap is O(1) while
        // 100 Adam steps move every weight coherently, so training dominates
        // whatever the seed.
        let (n, f) = (40, 50);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let x = Array2::from_shape_fn((n, f), |(i, _)| if labels[i] == 0 { -1.0 } else { 1.0 } + noise.sample(&mut rng));
        let mask: Vec<bool> = (0..n).map(|i| i < 8).collect();
        let y = SemiSupervisedLabels::new(labels, mask, 2).unwrap();
        let fm = FeatureMatrix::new(x).unwrap();
        for seed in 0..10 {
            let params = SgcParams { seed, ..SgcParams::default() };
            let out = sgc_fit_predict(&identity_graph(n), &fm, &y, &params).unwrap();
            assert_eq!(out.accuracy, 1.0, "seed {seed}");
        }
    }

    #[test]
    fn training_is_bit_reproducible() {
        let (x, labels) = blobs(30, 3);
        let mask: Vec<bool> = (0..30).map(|i| i % 4 == 0).collect();
        let y = SemiSupervisedLabels::new(labels, mask, 2).unwrap();
        let params = SgcParams { seed: 9, ..SgcParams::default() };
        let mut a = SoftmaxRegression::init_uniform(2, 2, 9);
        let mut b = a.clone();
        let la = a.fit(x.view(), y.truth(), &y.observed_indices(), &params).unwrap();
        let lb = b.fit(x.view(), y.truth(), &y.observed_indices(), &params).unwrap();
        assert_eq!(la.to_bits(), lb.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn duplicated_column_matches_doubled_column() {
        // Adam is invariant to gradient scale, so a duplicated column with
        // weights (a, b) tracks a single doubled column with weight (a+b)/2.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = Array2::from_shape_fn((10, 3), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<usize> = (0..10).map(|i| usize::from(base[[i, 0]] + 0.5 * base[[i, 2]] > 0.0)).collect();
        let rows: Vec<usize> = (0..10).collect();

        let mut dup = Array2::zeros((10, 4));
        dup.slice_mut(ndarray::s![.., ..3]).assign(&base);
        dup.column_mut(3).assign(&base.column(1));
        let mut doubled = base.clone();
        doubled.column_mut(1).mapv_inplace(|v| 2.0 * v);

        let mut wide = SoftmaxRegression::init_uniform(4, 2, 1);
        let mut narrow = SoftmaxRegression {
            weights: wide.weights.slice(ndarray::s![..3, ..]).to_owned(),
            bias: wide.bias.clone(),
        };
        let avg = (&wide.weights.row(1) + &wide.weights.row(3)) / 2.0;
        narrow.weights.row_mut(1).assign(&avg);
        // start the duplicate pair at equal weights so Adam keeps them equal
        wide.weights.row_mut(1).assign(&avg);
        wide.weights.row_mut(3).assign(&avg);

        let params = SgcParams { epochs: 100, learning_rate: 0.01, ..SgcParams::default() };
        wide.fit(dup.view(), &labels, &rows, &params).unwrap();
        narrow.fit(doubled.view(), &labels, &rows, &params).unwrap();
        assert_eq!(wide.predict(dup.view()), narrow.predict(doubled.view()));
        let lw = wide.logits(dup.view());
        let ln = narrow.logits(doubled.view());
        assert!(lw.iter().zip(ln.iter()).all(|(a, b)| (a - b).abs() < 1e-6));
    }

    #[test]
    fn two_hop_diffusion_matches_dense_square() {
        let g = Graph::from_edges(4, [(0, 1, 0.5), (1, 2, 1.5), (2, 3, 0.25), (0, 3, 1.0)]).unwrap();
        let (g, _) = g.normalize(crate::graph::Variant::AugmentedSymNorm).unwrap();
        let x = Array2::from_shape_fn((4, 3), |(i, j)| (i * 3 + j) as f64 - 4.0);
        let w = g.to_dense();
        let dense = w.dot(&w).dot(&x);
        let sparse = diffuse(&g, x.view(), 2).unwrap();
        assert!(dense.iter().zip(sparse.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
