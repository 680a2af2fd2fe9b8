//! Active-set solver for non-negative quadratic programs in kernel form:
//!
//! ```text
//! minimize ½ θᵀ K θ − θᵀ b   subject to θ ≥ 0
//! ```
//!
//! This is the Lawson–Hanson scheme written directly against the Gram
//! matrix `K` instead of a design matrix.

use ndarray::{Array1, ArrayView1, ArrayView2};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NnlsFailure {
    #[error("active-set iteration cap reached")]
    NotConverged,
    #[error("passive-set system is singular")]
    Singular,
}

/// `½ θᵀKθ − θᵀb`
pub fn objective(k: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>, theta: ArrayView1<'_, f64>) -> f64 {
    0.5 * theta.dot(&k.dot(&theta)) - theta.dot(&b)
}

/// Cholesky solve of the passive-set subsystem `K_PP z = b_P`.
fn solve_passive(k: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>, passive: &[usize]) -> Option<Vec<f64>> {
    let p = passive.len();
    let scale = passive.iter().fold(0.0f64, |m, &i| m.max(k[[i, i]].abs()));
    let mut l = vec![0.0; p * p];
    for r in 0..p {
        for c in 0..=r {
            let mut s = k[[passive[r], passive[c]]];
            for t in 0..c {
                s -= l[r * p + t] * l[c * p + t];
            }
            if r == c {
                if s <= 1e-13 * scale.max(1e-300) {
                    return None;
                }
                l[r * p + r] = s.sqrt();
            } else {
                l[r * p + c] = s / l[c * p + c];
            }
        }
    }
    let mut y = vec![0.0; p];
    for r in 0..p {
        let mut s = b[passive[r]];
        for t in 0..r {
            s -= l[r * p + t] * y[t];
        }
        y[r] = s / l[r * p + r];
    }
    for r in (0..p).rev() {
        let mut s = y[r];
        for t in (r + 1)..p {
            s -= l[t * p + r] * y[t];
        }
        y[r] = s / l[r * p + r];
    }
    Some(y)
}

/// Minimizes `½ θᵀKθ − θᵀb` over `θ ≥ 0` for symmetric PSD `K`.
///
/// The number of passive-set additions is capped at `10·k`.
pub fn nnls_solve(k: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Result<Array1<f64>, NnlsFailure> {
    let n = b.len();
    assert_eq!(k.dim(), (n, n), "kernel and target sizes differ");
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let cap = 10 * n.max(1);

    let mut theta = Array1::<f64>::zeros(n);
    let mut passive: Vec<usize> = Vec::with_capacity(n);
    let mut blocked = vec![false; n];
    let mut additions = 0;

    loop {
        let grad_neg = &b - &k.dot(&theta);
        let candidate = (0..n)
            .filter(|j| !blocked[*j] && !passive.contains(j))
            .filter(|&j| grad_neg[j] > tol)
            .max_by(|&a, &c| grad_neg[a].total_cmp(&grad_neg[c]).then(c.cmp(&a)));
        let Some(j) = candidate else {
            break;
        };
        additions += 1;
        if additions > cap {
            return Err(NnlsFailure::NotConverged);
        }
        passive.push(j);
        let before = theta.clone();

        loop {
            let z = solve_passive(k, b, &passive).ok_or(NnlsFailure::Singular)?;
            if z.iter().all(|&v| v > 0.0) {
                for (&idx, &v) in passive.iter().zip(&z) {
                    theta[idx] = v;
                }
                break;
            }
            // step toward z until the first passive coordinate hits zero
            let mut alpha = f64::INFINITY;
            for (&idx, &v) in passive.iter().zip(&z) {
                if v <= 0.0 {
                    let x = theta[idx];
                    alpha = alpha.min(x / (x - v));
                }
            }
            for (&idx, &v) in passive.iter().zip(&z) {
                theta[idx] += alpha * (v - theta[idx]);
            }
            let mut still = Vec::with_capacity(passive.len());
            for &idx in &passive {
                if theta[idx] > tol * 1e-3 {
                    still.push(idx);
                } else {
                    theta[idx] = 0.0;
                }
            }
            passive = still;
            if passive.is_empty() {
                break;
            }
        }

        if theta == before {
            // the new coordinate was rejected without progress
            blocked[j] = true;
        } else {
            blocked.iter_mut().for_each(|b| *b = false);
        }
    }
    Ok(theta)
}
