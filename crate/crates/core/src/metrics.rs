//! Scores for the downstream tasks: adjusted mutual information,
//! classification accuracy, squared error and SNR, plus calibrated noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};

/// Counts of co-occurring labels between two partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub total: usize,
}

impl ContingencyTable {
    /// Labels are compacted to their distinct values in ascending order.
    pub fn new(u: &[usize], v: &[usize]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "partitions have lengths {} and {}",
                u.len(),
                v.len()
            )));
        }
        let ru = compact(u);
        let rv = compact(v);
        let r = ru.iter().max().map_or(0, |m| m + 1);
        let s = rv.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0; s]; r];
        for (&a, &b) in ru.iter().zip(&rv) {
            counts[a][b] += 1;
        }
        let row_sums = counts.iter().map(|row| row.iter().sum()).collect();
        let col_sums = (0..s).map(|c| counts.iter().map(|row| row[c]).sum()).collect();
        Ok(ContingencyTable {
            counts,
            row_sums,
            col_sums,
            total: u.len(),
        })
    }
}

fn compact(labels: &[usize]) -> Vec<usize> {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect()
}

fn entropy(sums: &[usize], n: usize) -> f64 {
    let n = n as f64;
    -sums
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Mutual information (nats) of a contingency table.
pub fn mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.total as f64;
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// `ln(k!)` for `k = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Expected mutual information under the hypergeometric permutation model.
pub fn expected_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.total;
    let lf = log_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in &t.row_sums {
        for &b in &t.col_sums {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            // a! b! (n−a)! (n−b)! / n!, shared by every cell count
            let fixed = lf[a] + lf[b] + lf[n - a] + lf[n - b] - lf[n];
            for nij in lo..=hi {
                let x = nij as f64;
                let term = x / nf * (nf * x / (a as f64 * b as f64)).ln();
                let log_p = fixed - lf[nij] - lf[a - nij] - lf[b - nij] - lf[n + nij - a - b];
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information with arithmetic-mean entropy normalization.
pub fn ami(u: &[usize], v: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(u, v)?;
    if t.total < 2 {
        return Err(invalid("AMI needs at least two elements"));
    }
    // identical up to relabeling: exactly 1, also for the 0/0 trivial case
    let same = t.counts.len() == t.col_sums.len()
        && t.counts.iter().all(|row| row.iter().filter(|&&c| c > 0).count() == 1);
    if same {
        return Ok(1.0);
    }
    let hu = entropy(&t.row_sums, t.total);
    let hv = entropy(&t.col_sums, t.total);
    let mi = mutual_information(&t);
    let emi = expected_mutual_information(&t);
    let denom = 0.5 * (hu + hv) - emi;
    if denom.abs() < 1e-15 {
        return Ok(0.0);
    }
    Ok((mi - emi) / denom)
}

/// Fraction of masked positions where `pred` equals `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize], mask: &[bool]) -> Result<f64> {
    if pred.len() != truth.len() || pred.len() != mask.len() {
        return Err(Error::DimensionMismatch("accuracy inputs differ in length".into()));
    }
    let selected = mask.iter().filter(|&&m| m).count();
    if selected == 0 {
        return Err(invalid("accuracy mask selects nothing"));
    }
    let correct = pred
        .iter()
        .zip(truth)
        .zip(mask)
        .filter(|((p, t), m)| **m && p == t)
        .count();
    Ok(correct as f64 / selected as f64)
}

pub fn mse(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::DimensionMismatch("mse inputs differ in length".into()));
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64)
}

/// `10·log10(‖clean‖² / ‖clean − test‖²)`; `+∞` for an exact match.
pub fn snr_db(clean: &[f64], test: &[f64]) -> Result<f64> {
    if clean.len() != test.len() {
        return Err(Error::DimensionMismatch("snr inputs differ in length".into()));
    }
    let signal: f64 = clean.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(invalid("SNR undefined for a zero reference signal"));
    }
    let noise: f64 = clean.iter().zip(test).map(|(a, b)| (a - b) * (a - b)).sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

/// Adds seeded white Gaussian noise scaled so that `snr_db(clean, out)`
/// equals `target_db`.
pub fn add_noise_to_snr(clean: &[f64], target_db: f64, seed: u64) -> Result<Vec<f64>> {
    let signal: f64 = clean.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(invalid("cannot calibrate noise against a zero signal"));
    }
    if target_db == f64::INFINITY {
        return Ok(clean.to_vec());
    }
    if !target_db.is_finite() {
        return Err(invalid(format!("target SNR must be finite or +inf, got {target_db}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..clean.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    let mut noise: Vec<f64> = noise.into_iter().map(|v| v - mean).collect();
    let power: f64 = noise.iter().map(|v| v * v).sum();
    if power == 0.0 {
        return Err(invalid("signal too short to carry zero-mean noise"));
    }
    let wanted = signal / 10f64.powf(target_db / 10.0);
    let scale = (wanted / power).sqrt();
    noise.iter_mut().for_each(|v| *v *= scale);
    Ok(clean.iter().zip(&noise).map(|(c, e)| c + e).collect())
}
