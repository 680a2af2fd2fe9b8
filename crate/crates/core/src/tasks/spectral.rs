//! Spectral clustering: Laplacian embedding followed by the multiclass
//! rotation-based discretization.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{argmax_lowest, kmeans, Partition};
use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::linalg::eigendecompose;

/// Which low-frequency eigenvectors make up the embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSelection {
    /// Indices `0..C`, constant vector included. On a graph with `C`
    /// components these span the component indicators exactly.
    #[default]
    KeepFirst,
    /// Indices `1..=C`: `C` vectors after skipping the constant one.
    SkipFirst,
    /// Indices `1..C`: the first `C` vectors minus the constant one, i.e.
    /// `C − 1` columns. Clustered with k-means since the rotation scheme
    /// needs as many columns as classes.
    SkipFirstOfC,
}

impl EigenSelection {
    pub const ALL: [EigenSelection; 3] = [
        EigenSelection::KeepFirst,
        EigenSelection::SkipFirst,
        EigenSelection::SkipFirstOfC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EigenSelection::KeepFirst => "keep-first",
            EigenSelection::SkipFirst => "skip-first",
            EigenSelection::SkipFirstOfC => "skip-first-of-c",
        }
    }
}

impl std::fmt::Display for EigenSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EigenSelection {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        EigenSelection::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| invalid(format!("unknown eigenvector selection '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub coords: Array2<f64>,
    /// Eigenvalue multiplicity straddles the last selected index, so the
    /// selected basis is not unique.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpectralReport {
    pub ambiguous: bool,
    pub zero_rows: usize,
    pub iterations: usize,
}

/// Orthonormal basis of the null space whose first vector is the constant
/// vector, built from the columns of `null`.
fn constant_first_basis(null: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, m) = null.dim();
    let mut basis: Vec<Array1<f64>> = vec![Array1::from_elem(n, 1.0 / (n as f64).sqrt())];
    for c in 0..m {
        if basis.len() == m {
            break;
        }
        let mut v = null.column(c).to_owned();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v.scaled_add(-proj, b);
            }
        }
        let nrm = v.dot(&v).sqrt();
        if nrm > 1e-8 {
            basis.push(v / nrm);
        }
    }
    let mut out = Array2::zeros((n, basis.len()));
    for (c, b) in basis.into_iter().enumerate() {
        out.column_mut(c).assign(&b);
    }
    out
}

/// Low-frequency Laplacian eigenvectors selected by `selection`.
///
/// When the zero eigenvalue is repeated (several connected components) the
/// null-space basis is first rotated so that its first vector is exactly
/// the constant one. Every column is signed so that its largest-magnitude
/// entry is positive.
pub fn spectral_embed(g: &Graph, classes: usize, selection: EigenSelection) -> Result<Embedding> {
    let n = g.n();
    let (first, width) = match selection {
        EigenSelection::KeepFirst => (0, classes),
        EigenSelection::SkipFirst => (1, classes),
        EigenSelection::SkipFirstOfC => (1, classes.saturating_sub(1)),
    };
    let last = first + width;
    if width == 0 || last > n {
        return Err(invalid(format!(
            "cannot take eigenvectors {first}..{last} on {n} vertices"
        )));
    }
    let spectrum = eigendecompose(g.laplacian().view())?;
    let scale = spectrum.lambda_max.abs().max(1.0);
    let zero_tol = 1e-8 * scale;
    let nulls = spectrum.eigenvalues.iter().take_while(|&&l| l <= zero_tol).count().max(1);

    let mut vectors = spectrum.eigenvectors.clone();
    if nulls > 1 {
        let rotated = constant_first_basis(spectrum.eigenvectors.slice(ndarray::s![.., ..nulls]));
        if rotated.ncols() == nulls {
            vectors.slice_mut(ndarray::s![.., ..nulls]).assign(&rotated);
        }
    }

    let mut coords = vectors.slice(ndarray::s![.., first..last]).to_owned();
    for mut col in coords.axis_iter_mut(Axis(1)) {
        let pivot = argmax_lowest(col.iter().map(|v| v.abs()), 0.0);
        if col[pivot] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
    let ambiguous = last < n && (spectrum.eigenvalues[last] - spectrum.eigenvalues[last - 1]).abs() <= zero_tol;
    Ok(Embedding { coords, ambiguous })
}

/// Polar factor `R = V Uᵀ` of `M = U Σ Vᵀ`, computed from the
/// eigendecomposition of `MᵀM`. Returns the factor and `Σ` singular values
/// summed, or `None` when `M` is numerically rank deficient.
fn polar_rotation(m: &Array2<f64>) -> Option<(Array2<f64>, f64)> {
    let gram = m.t().dot(m);
    let spectrum = eigendecompose(gram.view()).ok()?;
    let top = spectrum.lambda_max.max(0.0).sqrt();
    let sing: Vec<f64> = spectrum.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    if top == 0.0 || sing.iter().any(|&s| s <= 1e-10 * top) {
        return None;
    }
    let v = &spectrum.eigenvectors;
    let inv = Array1::from_iter(sing.iter().map(|s| 1.0 / s));
    // (MᵀM)^{-1/2} Mᵀ = V Σ⁻¹ Vᵀ Mᵀ = V Uᵀ
    let scaled = v * &inv.view().insert_axis(Axis(0));
    let rotation = scaled.dot(&v.t()).dot(&m.t());
    Some((rotation, sing.iter().sum()))
}

fn assign(rows: &Array2<f64>, rotation: &Array2<f64>) -> Vec<usize> {
    let t = rows.dot(rotation);
    t.rows()
        .into_iter()
        .map(|r| argmax_lowest(r.iter().copied(), 0.0))
        .collect()
}

/// Independent initializations per discretization; the lowest objective wins.
const RESTARTS: u64 = 10;
const MAX_ROTATIONS: usize = 30;

/// One alternating run from a rotation seeded by `rng`. Returns labels,
/// final objective and the number of iterations.
fn discretize_once(rows: &Array2<f64>, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64, usize) {
    let (n, c) = rows.dim();
    let mut rotation = Array2::<f64>::zeros((c, c));
    rotation.column_mut(0).assign(&rows.row(rng.random_range(0..n)));
    let mut accum = Array1::<f64>::zeros(n);
    for j in 1..c {
        let proj = rows.dot(&rotation.column(j - 1));
        accum += &proj.mapv(f64::abs);
        let far = argmax_lowest(accum.iter().map(|v| -v), 0.0);
        rotation.column_mut(j).assign(&rows.row(far));
    }

    let mut labels = assign(rows, &rotation);
    let mut last_objective = f64::INFINITY;
    let mut iterations = 0;
    for iter in 1..=MAX_ROTATIONS {
        iterations = iter;
        let mut m = Array2::<f64>::zeros((c, c));
        for (r, &l) in rows.rows().into_iter().zip(&labels) {
            let mut target = m.row_mut(l);
            target += &r;
        }
        let Some((next, sing_sum)) = polar_rotation(&m) else {
            break;
        };
        let objective = 2.0 * (n as f64 - sing_sum);
        if (objective - last_objective).abs() < 1e-7 {
            break;
        }
        last_objective = objective;
        rotation = next;
        labels = assign(rows, &rotation);
    }
    let objective = partition_objective(rows, &labels);
    (labels, objective, iterations)
}

/// `2(n − Σσ)` of the cluster-sum matrix; `+∞` when it is rank deficient.
fn partition_objective(rows: &Array2<f64>, labels: &[usize]) -> f64 {
    let (n, c) = rows.dim();
    let mut m = Array2::<f64>::zeros((c, c));
    for (r, &l) in rows.rows().into_iter().zip(labels) {
        let mut target = m.row_mut(l);
        target += &r;
    }
    polar_rotation(&m).map_or(f64::INFINITY, |(_, s)| 2.0 * (n as f64 - s))
}

/// Rotation-based discretization of a `N × C` spectral embedding into `C`
/// classes.
///
/// Rows are scaled to unit length (zero rows are kept and counted). Each run
/// seeds a rotation from mutually far-apart rows, starting at a random row,
/// then alternates assignment and orthogonal Procrustes steps until the
/// objective moves by less than `1e-7` or 30 iterations pass. Ten runs are
/// made and the partition with the lowest objective is kept.
pub fn discretize(embedding: ArrayView2<'_, f64>, seed: u64) -> Result<(Partition, SpectralReport)> {
    let (n, c) = embedding.dim();
    if c < 2 {
        return Err(invalid("discretization needs at least two columns"));
    }
    if n == 0 {
        return Err(invalid("empty embedding"));
    }
    let mut rows = embedding.to_owned();
    let mut report = SpectralReport::default();
    for mut r in rows.rows_mut() {
        let nrm = r.dot(&r).sqrt();
        if nrm > 0.0 {
            r /= nrm;
        } else {
            report.zero_rows += 1;
        }
    }

    let mut best: Option<(Vec<usize>, f64, usize)> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart);
        let run = discretize_once(&rows, &mut rng);
        if best.as_ref().is_none_or(|b| run.1 < b.1 - 1e-9) {
            best = Some(run);
        }
    }
    let (labels, _, iterations) = best.expect("at least one restart");
    report.iterations = iterations;
    Ok((Partition::new(labels, c)?, report))
}

/// Embeds the graph and discretizes the embedding into `classes` clusters.
pub fn spectral_cluster(
    g: &Graph,
    classes: usize,
    seed: u64,
    selection: EigenSelection,
) -> Result<(Partition, SpectralReport)> {
    if classes == 1 {
        return Ok((Partition::new(vec![0; g.n()], 1)?, SpectralReport::default()));
    }
    let embedding = spectral_embed(g, classes, selection)?;
    let (partition, mut report) = match selection {
        EigenSelection::KeepFirst | EigenSelection::SkipFirst => discretize(embedding.coords.view(), seed)?,
        EigenSelection::SkipFirstOfC => (kmeans(embedding.coords.view(), classes, seed)?, SpectralReport::default()),
    };
    report.ambiguous = embedding.ambiguous;
    Ok((partition, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ami;
    use approx::assert_abs_diff_eq;

    fn cliques(sizes: &[usize]) -> (Graph, Vec<usize>) {
        let mut triples = Vec::new();
        let mut truth = Vec::new();
        let mut offset = 0;
        for (c, &s) in sizes.iter().enumerate() {
            for a in 0..s {
                truth.push(c);
                for b in (a + 1)..s {
                    triples.push((offset + a, offset + b, 1.0));
                }
            }
            offset += s;
        }
        (Graph::from_edges(offset, triples).unwrap(), truth)
    }

    #[test]
    fn two_components_separate_in_embedding() {
        let (g, truth) = cliques(&[4, 6]);
        let e = spectral_embed(&g, 2, EigenSelection::SkipFirst).unwrap();
        // first column is the null-space vector orthogonal to the constant one
        let col = e.coords.column(0);
        for i in 0..10 {
            for j in 0..10 {
                let same = truth[i] == truth[j];
                assert_eq!((col[i] - col[j]).abs() < 1e-9, same, "{i} {j}");
            }
        }
    }

    #[test]
    fn complete_graph_embedding() {
        let (g, _) = cliques(&[4]);
        let e = spectral_embed(&g, 2, EigenSelection::SkipFirst).unwrap();
        let gram = e.coords.t().dot(&e.coords);
        assert_abs_diff_eq!(gram[[0, 0]], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gram[[1, 1]], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gram[[0, 1]], 0.0, epsilon = 1e-10);
        let spectrum = eigendecompose(g.laplacian().view()).unwrap();
        for l in spectrum.eigenvalues.iter().skip(1) {
            assert_abs_diff_eq!(*l, 4.0, epsilon = 1e-10);
        }
        assert!(e.ambiguous);
    }

    #[test]
    fn path_fiedler_vector() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let e = spectral_embed(&g, 1, EigenSelection::SkipFirst).unwrap();
        // P4 Fiedler vector: cos(π(2i+1)/8) up to normalization and sign
        let raw: Vec<f64> = (0..4).map(|i| (std::f64::consts::PI * (2 * i + 1) as f64 / 8.0).cos()).collect();
        let nrm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..4 {
            assert_abs_diff_eq!(e.coords[[i, 0]], raw[i] / nrm, epsilon = 1e-10);
        }
        let col = e.coords.column(0);
        assert!(col.windows(2).into_iter().all(|w| w[0] > w[1]));
    }

    #[test]
    fn discretize_fixed_point() {
        let labels = [0usize, 2, 1, 1, 0, 2, 2];
        let mut ind = Array2::zeros((7, 3));
        for (i, &l) in labels.iter().enumerate() {
            ind[[i, l]] = 0.37;
        }
        let (p, _) = discretize(ind.view(), 5).unwrap();
        assert_eq!(ami(&p.assignment, &labels).unwrap(), 1.0);
    }

    #[test]
    fn discretize_recovers_rotated_indicator() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let mut ind = Array2::zeros((30, 3));
        for (i, &l) in labels.iter().enumerate() {
            ind[[i, l]] = 1.0;
        }
        // rotation from the eigenvectors of a fixed symmetric matrix
        let sym = ndarray::array![[1.0, 0.3, -0.7], [0.3, 0.2, 0.5], [-0.7, 0.5, -1.1]];
        let q = eigendecompose(sym.view()).unwrap().eigenvectors;
        let rotated = ind.dot(&q);
        for seed in 0..10 {
            let (p, _) = discretize(rotated.view(), seed).unwrap();
            assert_abs_diff_eq!(ami(&p.assignment, &labels).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn discretize_scale_invariant() {
        let emb = Array2::from_shape_fn((20, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let (a, _) = discretize(emb.view(), 3).unwrap();
        let (b, _) = discretize((emb.clone() * 42.5).view(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn disjoint_cliques_are_recovered() {
        let cases: [&[usize]; 7] = [&[5, 5], &[3, 7], &[5, 5, 5], &[4, 6, 8], &[5, 5, 5, 5, 5], &[4, 5, 6, 3, 8], &[2, 9, 3, 12, 4]];
        for sizes in cases {
            let (g, truth) = cliques(sizes);
            for seed in 0..10 {
                let (p, _) = spectral_cluster(&g, sizes.len(), seed, EigenSelection::default()).unwrap();
                assert_eq!(ami(&p.assignment, &truth).unwrap(), 1.0, "{sizes:?} seed {seed}");
            }
        }
    }

    #[test]
    fn permuted_graph_gives_same_partition() {
        let (g, _) = cliques(&[4, 6, 5]);
        let perm: Vec<usize> = (0..15).map(|i| (i * 4 + 1) % 15).collect();
        let gp = g.permuted(&perm);
        let (a, _) = spectral_cluster(&g, 3, 0, EigenSelection::default()).unwrap();
        let (b, _) = spectral_cluster(&gp, 3, 0, EigenSelection::default()).unwrap();
        let mapped: Vec<usize> = (0..15).map(|i| b.assignment[perm[i]]).collect();
        assert_eq!(ami(&a.assignment, &mapped).unwrap(), 1.0);
    }

    #[test]
    fn skipping_first_on_components_reaches_past_the_null_space() {
        // C components, C columns after the constant: the last one has a
        // nonzero eigenvalue and is not constant on components.
        let (g, _) = cliques(&[3, 7]);
        let e = spectral_embed(&g, 2, EigenSelection::SkipFirst).unwrap();
        let last = e.coords.column(1);
        let lap = g.laplacian();
        let lv = lap.dot(&last);
        assert!(lv.dot(&lv).sqrt() > 1.0);
        let keep = spectral_embed(&g, 2, EigenSelection::KeepFirst).unwrap();
        let lk = lap.dot(&keep.coords);
        assert!(lk.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn selection_names_round_trip() {
        for s in EigenSelection::ALL {
            assert_eq!(s.name().parse::<EigenSelection>().unwrap(), s);
        }
    }
}
