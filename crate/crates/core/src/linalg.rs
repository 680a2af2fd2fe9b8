//! Dense symmetric eigendecomposition and spectral functions of symmetric
//! operators.
//!
//! The eigensolver is the classical two-stage scheme: Householder reduction
//! to tridiagonal form followed by the implicit QL iteration with Wilkinson
//! shifts. Eigenvectors are accumulated in a transposed buffer so that every
//! inner loop walks contiguous memory.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Relative tolerance used to accept an operator as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues sorted ascending and the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
    pub lambda_max: f64,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, j: usize) -> ArrayView1<'_, f64> {
        self.eigenvectors.column(j)
    }

    /// `F · diag(response(λ)) · Fᵀ`.
    pub fn spectral_operator(&self, response: impl Fn(f64) -> f64) -> Array2<f64> {
        let scaled = &self.eigenvectors * &self.eigenvalues.mapv(response).view().insert_axis(Axis(0));
        let mut out = scaled.dot(&self.eigenvectors.t());
        symmetrize(&mut out);
        out
    }

    /// `F · diag(response) · Fᵀ · x` without forming the dense operator.
    pub fn filter_signal(&self, response: &[f64], x: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut coeffs = self.eigenvectors.t().dot(&x);
        coeffs.iter_mut().zip(response).for_each(|(c, r)| *c *= r);
        self.eigenvectors.dot(&coeffs)
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        self.spectral_operator(|l| l)
    }
}

pub(crate) fn symmetrize(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
}

/// Largest absolute asymmetry `|A_ij - A_ji|`.
pub fn max_asymmetry(a: ArrayView2<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}

fn check_symmetric(a: ArrayView2<'_, f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "operator must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("operator has non-finite entries".into()));
    }
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let asym = max_asymmetry(a);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Full eigendecomposition of a dense symmetric operator.
///
/// Rejects operators whose asymmetry exceeds `SYMMETRY_TOL` relative to the
/// largest entry. Only the lower triangle is read afterwards.
pub fn eigendecompose(a: ArrayView2<'_, f64>) -> Result<SpectralDecomposition> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Array1::zeros(0),
            eigenvectors: Array2::zeros((0, 0)),
            lambda_max: 0.0,
        });
    }

    // t[j * n + k] holds V[k][j]; the input is symmetric so the initial
    // transposition is free.
    let mut t: Vec<f64> = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            // lower triangle, mirrored
            let (r, c) = if k >= j { (k, j) } else { (j, k) };
            t.push(a[[r, c]]);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut t, &mut d, &mut e);
    ql_implicit(n, &mut t, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]).then(x.cmp(&y)));

    let eigenvalues = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut sorted = Vec::with_capacity(n * n);
    for &i in &order {
        sorted.extend_from_slice(&t[i * n..(i + 1) * n]);
    }
    // rows of `sorted` are eigenvectors; reversing axes exposes them as columns
    let eigenvectors = Array2::from_shape_vec((n, n), sorted)
        .expect("shape matches buffer")
        .reversed_axes();
    let lambda_max = eigenvalues[n - 1];
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        lambda_max,
    })
}

/// Householder reduction to symmetric tridiagonal form.
///
/// On exit `d` holds the diagonal, `e[1..]` the subdiagonal and `t` the
/// accumulated orthogonal transform (transposed storage).
fn tridiagonalize(n: usize, t: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |r: usize, c: usize| c * n + r;

    for j in 0..n {
        d[j] = t[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = t[at(i - 1, j)];
                t[at(i, j)] = 0.0;
                t[at(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                f = d[j];
                t[at(j, i)] = f;
                let col = &t[j * n..j * n + n];
                g = e[j] + col[j] * f;
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let (fj, gj) = (d[j], e[j]);
                let col = &mut t[j * n..j * n + n];
                for k in j..i {
                    col[k] -= fj * e[k] + gj * d[k];
                }
                d[j] = col[i - 1];
                col[i] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        t[at(n - 1, i)] = t[at(i, i)];
        t[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            let (head, tail) = t.split_at_mut((i + 1) * n);
            let next = &tail[..n];
            for k in 0..=i {
                d[k] = next[k] / h;
            }
            for j in 0..=i {
                let col = &mut head[j * n..j * n + n];
                let g: f64 = (0..=i).map(|k| next[k] * col[k]).sum();
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            t[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = t[at(n - 1, j)];
        t[at(n - 1, j)] = 0.0;
    }
    t[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on the tridiagonal form.
fn ql_implicit(n: usize, t: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::InvalidInput(
                        "QL iteration failed to converge".into(),
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = t.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// `exp(A)` for symmetric `A`, through its spectral decomposition.
pub fn matrix_exponential(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let spectrum = eigendecompose(a)?;
    Ok(spectrum.spectral_operator(f64::exp))
}

/// Relative Frobenius distance `‖A − B‖_F / max(‖B‖_F, 1e-300)`.
pub fn relative_frobenius(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let diff: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum();
    let norm: f64 = b.iter().map(|x| x * x).sum();
    diff.sqrt() / norm.sqrt().max(1e-300)
}
