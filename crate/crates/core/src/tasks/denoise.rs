//! Low-pass graph filtering with a Simoncelli spectral response.

use std::f64::consts::FRAC_PI_2;

use ndarray::{Array1, ArrayView1};

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::linalg::{eigendecompose, SpectralDecomposition};
use crate::metrics::snr_db;

/// τ sweep from 0 to 1 in steps of 0.025.
pub const TAU_STEPS: usize = 41;

/// Normalized eigenvalues below this count as exactly zero.
const ZERO_EIGENVALUE: f64 = 1e-10;

pub fn tau_grid() -> impl Iterator<Item = f64> {
    (0..TAU_STEPS).map(|i| i as f64 / (TAU_STEPS - 1) as f64)
}

/// 1 on `[0, τ/2]`, `cos(π/2 · log₂(2λ/τ))` on `(τ/2, τ]`, 0 above τ.
pub fn simoncelli_response(lambda: f64, tau: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if tau <= 0.0 || lambda > tau {
        return 0.0;
    }
    if lambda <= 0.5 * tau {
        return 1.0;
    }
    (FRAC_PI_2 * (2.0 * lambda / tau).log2()).cos().clamp(0.0, 1.0)
}

/// Laplacian eigendecomposition cached for repeated filtering.
pub struct Denoiser {
    spectrum: SpectralDecomposition,
    normalized: Vec<f64>,
}

impl Denoiser {
    pub fn new(g: &Graph) -> Result<Self> {
        let spectrum = eigendecompose(g.laplacian().view())?;
        let lmax = spectrum.lambda_max;
        let normalized = spectrum
            .eigenvalues
            .iter()
            .map(|&l| {
                if lmax <= 0.0 {
                    return 0.0;
                }
                let v = (l / lmax).clamp(0.0, 1.0);
                if v < ZERO_EIGENVALUE {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Ok(Denoiser { spectrum, normalized })
    }

    pub fn n(&self) -> usize {
        self.normalized.len()
    }

    /// Eigenvalues divided by the largest one.
    pub fn normalized_eigenvalues(&self) -> &[f64] {
        &self.normalized
    }

    pub fn filter(&self, x: ArrayView1<'_, f64>, tau: f64) -> Result<Array1<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "signal of length {} on a graph with {} vertices",
                x.len(),
                self.n()
            )));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(invalid(format!("tau must lie in [0, 1], got {tau}")));
        }
        let response: Vec<f64> = self.normalized.iter().map(|&l| simoncelli_response(l, tau)).collect();
        if response.iter().all(|&r| r == 1.0) {
            return Ok(x.to_owned());
        }
        Ok(self.spectrum.filter_signal(&response, x))
    }

    /// Sweeps τ over the grid and keeps the best output SNR, ties to the
    /// smaller τ.
    pub fn best_tau(&self, noisy: &[f64], clean: &[f64]) -> Result<(f64, f64)> {
        if clean.iter().all(|&v| v == 0.0) {
            return Err(invalid("SNR undefined for a zero reference signal"));
        }
        let x = ArrayView1::from(noisy);
        let mut best = (0.0, f64::NEG_INFINITY);
        for tau in tau_grid() {
            let out = self.filter(x, tau)?;
            let snr = snr_db(clean, out.as_slice().expect("contiguous"))?;
            if snr > best.1 {
                best = (tau, snr);
            }
        }
        Ok(best)
    }
}

/// `F · diag(f(λ/λmax; τ)) · Fᵀ · x`.
pub fn denoise(g: &Graph, x: &[f64], tau: f64) -> Result<Vec<f64>> {
    Ok(Denoiser::new(g)?.filter(ArrayView1::from(x), tau)?.to_vec())
}

pub fn best_tau_denoise(g: &Graph, noisy: &[f64], clean: &[f64]) -> Result<(f64, f64)> {
    Denoiser::new(g)?.best_tau(noisy, clean)
}
