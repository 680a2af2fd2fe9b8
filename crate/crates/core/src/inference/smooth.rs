//! Smoothness-based graph learning with a log-degree barrier.
//!
//! Solves, over symmetric non-negative `W` with zero diagonal,
//!
//! ```text
//! minimize  Σ_ij W_ij Z_ij − α Σ_i log(Σ_j W_ij) + (β/2) Σ_ij W_ij²
//! ```
//!
//! with a forward-backward-forward primal-dual iteration on the
//! upper-triangular edge vector `w`. In that parametrization the objective
//! reads `2 zᵀw − α 1ᵀlog(S w) + β ‖w‖²`, where `S` maps edge weights to
//! vertex degrees.
//!
//! `α` and `β` are not exposed: `β = 1`, `α = 1`, and the distances are
//! rescaled to unit mean and multiplied by a factor that is bisected until
//! the graph reaches the requested mean degree.

use ndarray::ArrayView2;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;

pub const DEFAULT_SIGMA: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothConfig {
    /// Desired mean degree.
    pub k: usize,
    /// Edge weights at or below this are pruned.
    pub sigma: f64,
}

impl SmoothConfig {
    pub fn new(k: usize) -> Self {
        SmoothConfig {
            k,
            sigma: DEFAULT_SIGMA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative primal and dual change below which iteration stops.
    pub tol: f64,
    /// Relative objective decrease over one check window below which
    /// iteration stops. Zero disables the test.
    pub objective_tol: f64,
    pub check_every: usize,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            objective_tol: 1e-6,
            check_every: 50,
            max_iter: 5000,
        }
    }
}

/// Primal edge weights plus the dual degree variable, so solves can be
/// warm-started.
#[derive(Debug, Clone)]
pub struct SmoothState {
    pub w: Vec<f64>,
    pub v: Vec<f64>,
}

impl SmoothState {
    pub fn zeros(n: usize) -> Self {
        SmoothState {
            w: vec![0.0; n * n.saturating_sub(1) / 2],
            v: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmoothSolution {
    pub n: usize,
    /// Upper-triangular weights in row-major pair order.
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

impl SmoothSolution {
    /// Graph of the weights strictly above `sigma`.
    pub fn to_graph(&self, sigma: f64) -> Graph {
        let mut triples = Vec::new();
        let mut idx = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let w = self.weights[idx];
                if w > sigma {
                    triples.push((i, j, w));
                }
                idx += 1;
            }
        }
        Graph::from_edges(self.n, triples).expect("pairs are valid by construction")
    }

    /// Full-matrix weight `W[i, j]`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = (i.min(j), i.max(j));
        self.weights[pair_index(self.n, a, b)]
    }
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Degrees `S w`.
fn degrees(n: usize, w: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    let mut idx = 0;
    for i in 0..n {
        let mut acc = 0.0;
        for j in (i + 1)..n {
            let x = w[idx];
            acc += x;
            out[j] += x;
            idx += 1;
        }
        out[i] += acc;
    }
}

/// Objective in edge-vector form; `+∞` when a degree is not positive.
pub fn objective(n: usize, z: &[f64], w: &[f64], alpha: f64, beta: f64) -> f64 {
    let mut d = vec![0.0; n];
    degrees(n, w, &mut d);
    if d.iter().any(|&x| x <= 0.0) {
        return f64::INFINITY;
    }
    let linear: f64 = z.iter().zip(w).map(|(a, b)| a * b).sum();
    let frob: f64 = w.iter().map(|x| x * x).sum();
    2.0 * linear - alpha * d.iter().map(|x| x.ln()).sum::<f64>() + beta * frob
}

/// Upper-triangular distance vector of a dense symmetric matrix.
pub fn upper_vector(z: ArrayView2<'_, f64>) -> Vec<f64> {
    let n = z.nrows();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(z[[i, j]]);
        }
    }
    out
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Primal-dual solve for fixed `α`, `β`.
pub fn smooth_solve(
    n: usize,
    z: &[f64],
    alpha: f64,
    beta: f64,
    opts: &SolverOptions,
    state: &mut SmoothState,
) -> SmoothSolution {
    let m = z.len();
    debug_assert_eq!(m, n * n.saturating_sub(1) / 2);
    let mu = 2.0 * beta + (2.0 * (n as f64 - 1.0)).sqrt();
    let gamma = 0.5 / mu;

    let SmoothState { w, v } = state;
    let mut y_primal = vec![0.0; m];
    let mut p_primal = vec![0.0; m];
    let mut sw = vec![0.0; n];
    let mut y_dual = vec![0.0; n];
    let mut p_dual = vec![0.0; n];

    let mut last_obj = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;

        // Y = w − γ(2βw + Sᵀv);  y = v + γ S w
        degrees(n, w, &mut sw);
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                y_primal[idx] = w[idx] - gamma * (2.0 * beta * w[idx] + v[i] + v[j]);
                idx += 1;
            }
        }
        for i in 0..n {
            y_dual[i] = v[i] + gamma * sw[i];
        }

        // P = max(0, Y − 2γz);  p = prox of the conjugate log barrier
        for ((p, &y), &zz) in p_primal.iter_mut().zip(&y_primal).zip(z) {
            *p = (y - 2.0 * gamma * zz).max(0.0);
        }
        for (p, &y) in p_dual.iter_mut().zip(&y_dual) {
            *p = 0.5 * (y - (y * y + 4.0 * alpha * gamma).sqrt());
        }

        // Q = P − γ(2βP + Sᵀp);  q = p + γ S P
        degrees(n, &p_primal, &mut sw);
        let mut primal_change = 0.0;
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let q = p_primal[idx] - gamma * (2.0 * beta * p_primal[idx] + p_dual[i] + p_dual[j]);
                let delta = q - y_primal[idx];
                w[idx] += delta;
                primal_change += delta * delta;
                idx += 1;
            }
        }
        let mut dual_change = 0.0;
        for i in 0..n {
            let q = p_dual[i] + gamma * sw[i];
            let delta = q - y_dual[i];
            v[i] += delta;
            dual_change += delta * delta;
        }

        let rel_primal = primal_change.sqrt() / norm(w).max(1e-300);
        let rel_dual = dual_change.sqrt() / norm(v).max(1e-300);
        if rel_primal < opts.tol && rel_dual < opts.tol {
            converged = true;
            break;
        }
        if opts.check_every > 0 && iterations % opts.check_every == 0 {
            let obj = objective(n, z, w, alpha, beta);
            if opts.objective_tol > 0.0
                && obj.is_finite()
                && last_obj.is_finite()
                && (last_obj - obj).abs() <= opts.objective_tol * obj.abs().max(1e-300)
            {
                converged = true;
                break;
            }
            last_obj = obj;
        }
    }

    SmoothSolution {
        n,
        weights: w.clone(),
        iterations,
        converged,
        objective: objective(n, z, w, alpha, beta),
    }
}

#[derive(Debug, Clone)]
pub struct SmoothReport {
    /// Distance multiplier that reached the target sparsity.
    pub theta: f64,
    pub mean_degree: f64,
    pub steps: usize,
    pub solution: SmoothSolution,
}

const THETA_RANGE: (f64, f64) = (1e-4, 1e4);
const MAX_STEPS: usize = 40;

/// Learns a graph whose mean degree is within ±25% of `cfg.k`.
pub fn smooth_graph(z: ArrayView2<'_, f64>, cfg: &SmoothConfig) -> Result<(Graph, SmoothReport)> {
    smooth_graph_with(z, cfg, &SolverOptions::default())
}

pub fn smooth_graph_with(
    z: ArrayView2<'_, f64>,
    cfg: &SmoothConfig,
    opts: &SolverOptions,
) -> Result<(Graph, SmoothReport)> {
    let n = z.nrows();
    if z.ncols() != n {
        return Err(Error::DimensionMismatch("distance matrix must be square".into()));
    }
    if n < 2 || cfg.k == 0 || cfg.k >= n {
        return Err(invalid(format!("mean degree target must satisfy 1 <= k < n, got k={}, n={n}", cfg.k)));
    }
    if !(cfg.sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {}", cfg.sigma)));
    }
    let asym = crate::linalg::max_asymmetry(z);
    let scale = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let raw = upper_vector(z);
    if raw.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(invalid("distances must be finite and non-negative"));
    }
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let unit: Vec<f64> = if mean > 0.0 {
        raw.iter().map(|v| v / mean).collect()
    } else {
        raw.clone()
    };

    let target = cfg.k as f64;
    let (low_ok, high_ok) = (0.75 * target, 1.25 * target);
    let (mut lo, mut hi) = (THETA_RANGE.0.ln(), THETA_RANGE.1.ln());
    let mut state = SmoothState::zeros(n);
    let mut achieved = (f64::INFINITY, f64::NEG_INFINITY);

    for step in 1..=MAX_STEPS {
        let log_theta = 0.5 * (lo + hi);
        let theta = log_theta.exp();
        let scaled: Vec<f64> = unit.iter().map(|v| theta * v).collect();
        let solution = smooth_solve(n, &scaled, 1.0, 1.0, opts, &mut state);
        let graph = solution.to_graph(cfg.sigma);
        let degree = graph.mean_degree();
        achieved = (achieved.0.min(degree), achieved.1.max(degree));
        log::debug!("smooth calibration step {step}: theta={theta:.4e} mean degree {degree:.3}");

        if (low_ok..=high_ok).contains(&degree) {
            return Ok((
                graph,
                SmoothReport {
                    theta,
                    mean_degree: degree,
                    steps: step,
                    solution,
                },
            ));
        }
        if degree > high_ok {
            // too dense: penalize distances harder
            lo = log_theta;
        } else {
            hi = log_theta;
        }
    }
    Err(Error::Calibration {
        target,
        low: achieved.0,
        high: achieved.1,
    })
}
