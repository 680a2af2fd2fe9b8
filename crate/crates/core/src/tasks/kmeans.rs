use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Partition;
use crate::error::{invalid, Result};

const RESTARTS: u64 = 10;
const MAX_ITER: usize = 300;

fn sq_dist(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(points: ArrayView2<'_, f64>, c: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = points.nrows();
    let mut centers = Array2::zeros((c, points.ncols()));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(first))).collect();
    for k in 1..c {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in closest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(k).assign(&points.row(pick));
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(pick)));
        }
    }
    centers
}

fn nearest(points: ArrayView2<'_, f64>, centers: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
    points
        .rows()
        .into_iter()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (k, c) in centers.rows().into_iter().enumerate() {
                let d = sq_dist(p, c);
                if d < best.1 {
                    best = (k, d);
                }
            }
            best
        })
        .unzip()
}

/// One Lloyd run; returns assignment and within-cluster sum of squares.
fn lloyd(points: ArrayView2<'_, f64>, c: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let (n, f) = points.dim();
    let mut centers = plus_plus_init(points, c, rng);
    let (mut labels, mut dist) = nearest(points, &centers);
    for _ in 0..MAX_ITER {
        let mut sums = Array2::<f64>::zeros((c, f));
        let mut counts = vec![0usize; c];
        for (i, &l) in labels.iter().enumerate() {
            let mut row = sums.row_mut(l);
            row += &points.row(i);
            counts[l] += 1;
        }
        let mut taken = vec![false; n];
        for k in 0..c {
            if counts[k] > 0 {
                let mean: Array1<f64> = sums.row(k).mapv(|v| v / counts[k] as f64);
                centers.row_mut(k).assign(&mean);
            } else {
                // empty cluster: move its centroid to the farthest point
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                taken[far] = true;
                dist[far] = 0.0;
                centers.row_mut(k).assign(&points.row(far));
            }
        }
        let (next, next_dist) = nearest(points, &centers);
        let stable = next == labels;
        labels = next;
        dist = next_dist;
        if stable {
            break;
        }
    }
    let inertia = dist.iter().sum();
    (labels, inertia)
}

/// k-means with k-means++ seeding; best of 10 restarts by inertia.
pub fn kmeans(points: ArrayView2<'_, f64>, classes: usize, seed: u64) -> Result<Partition> {
    let n = points.nrows();
    if classes == 0 || n < classes {
        return Err(invalid(format!("k-means needs 1 <= C <= N, got C={classes}, N={n}")));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart);
        let run = lloyd(points, classes, &mut rng);
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let (labels, _) = best.expect("at least one restart");
    Partition::new(labels, classes)
}
