//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the verdict lines show up in plain
//! `cargo test` output. Criteria 1-3 need the prepackaged benchmark data
//! under `GRAPHBENCH_DATA_DIR` (`cora/` and `toronto/` bundles) and are
//! reported as SKIP without it.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graphbench::harness::{run_grid, DatasetBundle, GridSpec, Method, RunResult, Task};
use graphbench::inference::{nnls_solve, smooth_solve, SolverOptions};
use graphbench::inference::smooth::SmoothState;
use graphbench::metrics::{add_noise_to_snr, ami, snr_db};
use graphbench::tasks::{best_tau_denoise, denoise, simoncelli_response, spectral_cluster, EigenSelection};
use graphbench::{FeatureMatrix, Graph, Variant};

enum Verdict {
    Pass(String),
    Skip(String),
}

type Outcome = Result<Verdict, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

// ---------------------------------------------------------------- criterion 4

fn mi_from_labels(u: &[usize], v: &[usize]) -> f64 {
    let n = u.len() as f64;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut pu: BTreeMap<usize, f64> = BTreeMap::new();
    let mut pv: BTreeMap<usize, f64> = BTreeMap::new();
    for (&a, &b) in u.iter().zip(v) {
        *joint.entry((a, b)).or_default() += 1.0;
        *pu.entry(a).or_default() += 1.0;
        *pv.entry(b).or_default() += 1.0;
    }
    joint
        .iter()
        .map(|(&(a, b), &c)| c / n * (n * c / (pu[&a] * pv[&b])).ln())
        .sum()
}

fn entropy_of(u: &[usize]) -> f64 {
    let n = u.len() as f64;
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for &a in u {
        *counts.entry(a).or_default() += 1.0;
    }
    -counts.values().map(|c| c / n * (c / n).ln()).sum::<f64>()
}

/// E[MI] as the average over all n! relabelings of `v` (Heap's algorithm).
fn expected_mi_by_enumeration(u: &[usize], v: &[usize]) -> f64 {
    let n = v.len();
    let mut perm: Vec<usize> = v.to_vec();
    let mut c = vec![0usize; n];
    let mut total = mi_from_labels(u, &perm);
    let mut count = 1.0;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += mi_from_labels(u, &perm);
            count += 1.0;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total / count
}

fn oracle_ami(u: &[usize], v: &[usize]) -> f64 {
    let mi = mi_from_labels(u, v);
    let emi = expected_mi_by_enumeration(u, v);
    let denom = 0.5 * (entropy_of(u) + entropy_of(v)) - emi;
    if denom.abs() < 1e-12 {
        // both partitions are a single cluster
        return 1.0;
    }
    (mi - emi) / denom
}

fn criterion_ami() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for pair in 0..500 {
        let n = rng.random_range(2..=8);
        let ku = rng.random_range(1..=n);
        let kv = rng.random_range(1..=n);
        let u: Vec<usize> = (0..n).map(|_| rng.random_range(0..ku)).collect();
        let v: Vec<usize> = (0..n).map(|_| rng.random_range(0..kv)).collect();
        let got = ami(&u, &v).map_err(|e| format!("pair {pair}: {e}"))?;
        let want = oracle_ami(&u, &v);
        let err = (got - want).abs();
        ensure(err <= 1e-10, || format!("pair {pair} u={u:?} v={v:?}: {got} vs oracle {want}"))?;
        worst = worst.max(err);
    }
    Ok(Verdict::Pass(format!("500 pairs, max |error| {worst:.1e}")))
}

// ---------------------------------------------------------------- criterion 5

fn quadratic(k: &Array2<f64>, b: &Array1<f64>, theta: &[f64]) -> f64 {
    let t = Array1::from(theta.to_vec());
    0.5 * t.dot(&k.dot(&t)) - b.dot(&t)
}

/// Best point on the grid `h·ℤ^d ∩ [0, hi]^d` within `radius` steps of `center`.
fn grid_window(
    k: &Array2<f64>,
    b: &Array1<f64>,
    center: &[i64],
    h: f64,
    radius: i64,
    hi: i64,
) -> (Vec<i64>, f64) {
    let d = center.len();
    let lo: Vec<i64> = center.iter().map(|&c| (c - radius).max(0)).collect();
    let up: Vec<i64> = center.iter().map(|&c| (c + radius).min(hi)).collect();
    let mut idx = lo.clone();
    let mut best = (idx.clone(), f64::INFINITY);
    let mut theta = vec![0.0; d];
    loop {
        for (t, &i) in theta.iter_mut().zip(&idx) {
            *t = i as f64 * h;
        }
        let f = quadratic(k, b, &theta);
        if f < best.1 {
            best = (idx.clone(), f);
        }
        let mut axis = 0;
        loop {
            if axis == d {
                return best;
            }
            if idx[axis] < up[axis] {
                idx[axis] += 1;
                break;
            }
            idx[axis] = lo[axis];
            axis += 1;
        }
    }
}

/// Minimum over the non-negative orthant on a 1e-3 grid, found by an
/// exhaustive coarse pass followed by shrinking windows.
fn orthant_grid_oracle(k: &Array2<f64>, b: &Array1<f64>, bound: f64) -> f64 {
    let d = b.len();
    let coarse = 0.25;
    let hi = (bound / coarse).ceil() as i64;
    let (mut center, mut best) = grid_window(k, b, &vec![0; d], coarse, hi, hi);
    let mut h = coarse;
    for next in [0.05, 0.01, 0.002, 0.001] {
        let ratio = (h / next).round() as i64;
        center.iter_mut().for_each(|c| *c *= ratio);
        h = next;
        let hi = (bound / h).ceil() as i64;
        loop {
            let (c, f) = grid_window(k, b, &center, h, 6, hi);
            let moved = c != center;
            center = c;
            best = f;
            if !moved {
                break;
            }
        }
    }
    best
}

fn criterion_nnls() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for instance in 0..200 {
        let d = rng.random_range(1..=4);
        let m = rng.random_range(1..=d + 2);
        let a = Array2::from_shape_fn((m, d), |_| rng.random_range(-1.0..1.0));
        let ridge: f64 = rng.random_range(0.25..1.0);
        let k = a.t().dot(&a) / m as f64 + Array2::<f64>::eye(d) * ridge;
        let b: Array1<f64> = Array1::from_shape_fn(d, |_| rng.random_range(-1.0..1.0));
        // θᵀKθ = bᵀθ at the optimum, so ‖θ‖ ≤ ‖b‖ / λ_min(K) ≤ ‖b‖ / ridge
        let bound = b.dot(&b).sqrt() / ridge;
        let theta = nnls_solve(k.view(), b.view()).map_err(|e| format!("instance {instance}: {e:?}"))?;
        ensure(theta.iter().all(|&t| t >= 0.0), || format!("instance {instance}: negative weight {theta}"))?;
        let got = quadratic(&k, &b, theta.as_slice().expect("contiguous"));
        let want = orthant_grid_oracle(&k, &b, bound);
        let err = (got - want).abs();
        ensure(err <= 1e-5, || format!("instance {instance} (k={d}): objective {got} vs grid {want}"))?;
        worst = worst.max(err);
    }
    Ok(Verdict::Pass(format!("200 instances, max objective gap {worst:.1e}")))
}

// ---------------------------------------------------------------- criterion 6

/// Golden-section minimization of `f` on `[lo, hi]`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

fn criterion_two_node_smooth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = SolverOptions {
        tol: 1e-15,
        objective_tol: 0.0,
        check_every: 50,
        max_iter: 1_000_000,
    };
    let mut worst = 0.0f64;
    for draw in 0..50 {
        let z: f64 = rng.random_range(0.0..5.0);
        let alpha: f64 = rng.random_range(0.5..2.0);
        let beta: f64 = rng.random_range(0.5..2.0);
        let closed = (-z + (z * z + 4.0 * alpha * beta).sqrt()) / (2.0 * beta);
        // f(w) = 2zw − 2α ln w + βw². Its value is too flat near the minimum
        // to resolve 1e-8 in double precision, so the search minimizes the
        // magnitude of f', which is V-shaped with the same minimizer.
        let oracle = golden_section(|w| (2.0 * z - 2.0 * alpha / w + 2.0 * beta * w).abs(), 1e-12, 10.0);
        let mut state = SmoothState::zeros(2);
        let sol = smooth_solve(2, &[z], alpha, beta, &opts, &mut state);
        let got = sol.weights[0];
        ensure((closed - oracle).abs() <= 1e-8, || {
            format!("draw {draw}: closed form {closed} vs golden section {oracle}")
        })?;
        ensure((got - closed).abs() <= 1e-8, || {
            format!("draw {draw} z={z} α={alpha} β={beta}: solver {got} vs closed form {closed}")
        })?;
        worst = worst.max((got - closed).abs());
    }
    Ok(Verdict::Pass(format!("50 draws, max |error| {worst:.1e}")))
}

// ---------------------------------------------------------------- criterion 7

fn cliques(sizes: &[usize]) -> (Graph, Vec<usize>) {
    let mut edges = Vec::new();
    let mut truth = Vec::new();
    let mut start = 0;
    for (c, &s) in sizes.iter().enumerate() {
        for i in start..start + s {
            truth.push(c);
            for j in (i + 1)..start + s {
                edges.push((i, j, 1.0));
            }
        }
        start += s;
    }
    (Graph::from_edges(start, edges).expect("valid cliques"), truth)
}

fn criterion_cliques() -> Outcome {
    let cases: [&[usize]; 6] = [&[5, 5], &[3, 8], &[5, 5, 5], &[3, 6, 9], &[5, 5, 5, 5, 5], &[4, 5, 6, 3, 8]];
    let mut runs = 0;
    for sizes in cases {
        let (raw, truth) = cliques(sizes);
        for variant in [Variant::Raw, Variant::SymNorm] {
            let (g, _) = raw.normalize(variant).map_err(|e| e.to_string())?;
            for seed in 0..5 {
                let (p, _) = spectral_cluster(&g, sizes.len(), seed, EigenSelection::default())
                    .map_err(|e| format!("{sizes:?}: {e}"))?;
                let score = ami(&p.assignment, &truth).map_err(|e| e.to_string())?;
                ensure(score == 1.0, || {
                    format!("cliques {sizes:?} {variant} seed {seed}: AMI {score}")
                })?;
                runs += 1;
            }
        }
    }
    Ok(Verdict::Pass(format!("{runs} runs over C in {{2, 3, 5}}, all AMI 1.0")))
}

// ---------------------------------------------------------------- criterion 8

fn two_blocks(size: usize) -> (Graph, Vec<f64>) {
    let mut edges = Vec::new();
    for block in 0..2 {
        let base = block * size;
        for i in base..base + size {
            for j in (i + 1)..base + size {
                edges.push((i, j, 1.0));
            }
        }
    }
    edges.push((size - 1, size, 0.1));
    let clean = (0..2 * size).map(|i| if i < size { 1.0 } else { -1.0 }).collect();
    (Graph::from_edges(2 * size, edges).expect("valid blocks"), clean)
}

fn criterion_filter() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let tau: f64 = rng.random_range(1e-6..=1.0);
        let at_half = simoncelli_response(tau / 2.0, tau);
        let at_tau = simoncelli_response(tau, tau);
        let inside_half = simoncelli_response(tau / 2.0 * (1.0 + 1e-14), tau);
        let inside_tau = simoncelli_response(tau * (1.0 - 1e-14), tau);
        ensure((at_half - 1.0).abs() < 1e-12 && (inside_half - 1.0).abs() < 1e-12, || {
            format!("τ={tau}: f(τ/2)={at_half}, just above {inside_half}")
        })?;
        ensure(at_tau.abs() < 1e-12 && inside_tau.abs() < 1e-12, || {
            format!("τ={tau}: f(τ)={at_tau}, just below {inside_tau}")
        })?;
    }

    let n = 30;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < 0.2 {
                edges.push((i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    let g = Graph::from_edges(n, edges).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let tau: f64 = rng.random_range(0.0..=1.0);
        let (a, b): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = denoise(&g, &mix, tau).map_err(|e| e.to_string())?;
        let fx = denoise(&g, &x, tau).map_err(|e| e.to_string())?;
        let fy = denoise(&g, &y, tau).map_err(|e| e.to_string())?;
        for i in 0..n {
            worst = worst.max((lhs[i] - a * fx[i] - b * fy[i]).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("linearity error {worst:e}"))?;

    let (blocks, clean) = two_blocks(20);
    let noisy = add_noise_to_snr(&clean, 7.0, 0).map_err(|e| e.to_string())?;
    let input = snr_db(&clean, &noisy).map_err(|e| e.to_string())?;
    let (tau, output) = best_tau_denoise(&blocks, &noisy, &clean).map_err(|e| e.to_string())?;
    ensure(output - input >= 1.0, || {
        format!("2-block fixture: {input:.2} dB in, {output:.2} dB out at τ={tau}")
    })?;
    Ok(Verdict::Pass(format!(
        "band edges exact, linearity {worst:.1e}, 2-block {input:.2} -> {output:.2} dB at tau={tau:.3}"
    )))
}

// ---------------------------------------------------------------- criterion 9

fn blob_bundle() -> DatasetBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (classes, per_class, dims) = (3, 12, 9);
    let n = classes * per_class;
    let labels: Vec<usize> = (0..n).map(|i| i / per_class).collect();
    let features = Array2::from_shape_fn((n, dims), |(i, f)| {
        let home = f / (dims / classes) == labels[i];
        (if home { 1.0 } else { 0.1 }) + rng.random_range(0.0..0.3)
    });
    DatasetBundle {
        name: "blobs".into(),
        features: FeatureMatrix::new(features).expect("finite"),
        labels: Some(labels),
        classes: Some(classes),
        clean_signal: None,
        reference_graph: None,
        seed: 0,
        noisy_features: false,
    }
}

fn signal_bundle() -> DatasetBundle {
    let (g, clean) = two_blocks(15);
    DatasetBundle {
        name: "blocks".into(),
        features: FeatureMatrix::new(Array2::zeros((1, clean.len()))).expect("finite"),
        labels: None,
        classes: None,
        clean_signal: Some(clean),
        reference_graph: Some(g),
        seed: 3,
        noisy_features: false,
    }
}

const CLASSIFY_GRID: &str = "k = 3, 5\nsplit_fraction = 0.25\nn_splits = 6\n";
const DENOISE_GRID: &str = "k = 3, 5, none\n";

fn run_cli(data: &Path, task: Task, grid: &Path, jobs: usize, report: &Path) -> Result<(String, String), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_graphbench"))
        .args(["run", "--task", task.name(), "--seed", "11"])
        .arg("--data")
        .arg(data)
        .arg("--grid")
        .arg(grid)
        .args(["--jobs", &jobs.to_string()])
        .arg("--report")
        .arg(report)
        .env_remove("GRAPHBENCH_SEED")
        .output()
        .map_err(|e| format!("cannot start the CLI: {e}"))?;
    ensure(status.status.success(), || {
        format!("{task} with {jobs} jobs exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr))
    })?;
    let csv = fs::read_to_string(report).map_err(|e| e.to_string())?;
    let table = fs::read_to_string(report.with_extension("best.txt")).map_err(|e| e.to_string())?;
    Ok((csv, table))
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let blobs = dir.path().join("blobs");
    let blocks = dir.path().join("blocks");
    blob_bundle().save(&blobs).map_err(|e| e.to_string())?;
    signal_bundle().save(&blocks).map_err(|e| e.to_string())?;
    let classify_grid = dir.path().join("classify.grid");
    let denoise_grid = dir.path().join("denoise.grid");
    fs::write(&classify_grid, CLASSIFY_GRID).map_err(|e| e.to_string())?;
    fs::write(&denoise_grid, DENOISE_GRID).map_err(|e| e.to_string())?;

    let mut rows = 0;
    for task in Task::ALL {
        let (data, grid) = if task == Task::Dgs { (&blocks, &denoise_grid) } else { (&blobs, &classify_grid) };
        let mut outputs = Vec::new();
        for (run, jobs) in [1, 1, 8].into_iter().enumerate() {
            let report = dir.path().join(format!("{task}-{run}.csv"));
            outputs.push(run_cli(data, task, grid, jobs, &report)?);
        }
        ensure(outputs[0] == outputs[1], || format!("{task}: two runs with 1 job differ"))?;
        ensure(outputs[0] == outputs[2], || format!("{task}: 1 job and 8 jobs differ"))?;
        rows += outputs[0].0.lines().count() - 1;
    }

    // the library path agrees with itself across pool sizes too
    let bundle = blob_bundle();
    let spec = GridSpec::parse(CLASSIFY_GRID, Task::SscvSgc, "inline").map_err(|e| e.to_string())?;
    let configs = spec.expand(Task::SscvSgc, 11).map_err(|e| e.to_string())?;
    let serial = run_grid(&bundle, &configs, 1).map_err(|e| e.to_string())?;
    let parallel = run_grid(&bundle, &configs, 8).map_err(|e| e.to_string())?;
    let csv = |r: &[RunResult]| graphbench::harness::format_csv(r, false);
    ensure(csv(&serial) == csv(&parallel), || "run_grid output depends on the pool size".into())?;
    Ok(Verdict::Pass(format!("{rows} report rows identical over 3 runs per task")))
}

// ------------------------------------------------------------ criteria 1 to 3

fn data_dir() -> Option<PathBuf> {
    std::env::var_os("GRAPHBENCH_DATA_DIR").map(PathBuf::from)
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

fn best_score(results: &[RunResult], method: Method) -> Result<f64, String> {
    results
        .iter()
        .filter(|r| r.config.method == method)
        .filter_map(|r| r.score.map(|s| (s, r)))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(s, _)| s)
        .ok_or_else(|| format!("no successful {method} run"))
}

fn run_methods(bundle: &DatasetBundle, task: Task, methods: &[Method]) -> Result<(Vec<RunResult>, Duration), String> {
    let mut spec = GridSpec::full(task);
    spec.methods = methods.to_vec();
    let configs = spec.expand(task, 0).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let results = run_grid(bundle, &configs, jobs()).map_err(|e| e.to_string())?;
    Ok((results, start.elapsed()))
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name} = {got:.4}, expected {want} ± {tol}"))
}

fn load_bundle(name: &str) -> Result<Option<DatasetBundle>, String> {
    match data_dir() {
        None => Ok(None),
        Some(dir) => DatasetBundle::load(dir.join(name)).map(Some).map_err(|e| e.to_string()),
    }
}

const NO_DATA: &str = "GRAPHBENCH_DATA_DIR is not set";

fn criterion_cora_clustering() -> Outcome {
    let Some(cora) = load_bundle("cora")? else { return Ok(Verdict::Skip(NO_DATA.into())) };
    let (results, elapsed) = run_methods(&cora, Task::Ucv, &[Method::CmeansBaseline, Method::Naive])?;
    let baseline = best_score(&results, Method::CmeansBaseline)?;
    let naive = best_score(&results, Method::Naive)?;
    within("C-means AMI", baseline, 0.10, 0.03)?;
    within("naive spectral AMI", naive, 0.34, 0.05)?;
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:.0?}"))?;
    Ok(Verdict::Pass(format!("C-means {baseline:.3}, naive {naive:.3}, {elapsed:.0?}")))
}

fn criterion_cora_classification() -> Outcome {
    let Some(cora) = load_bundle("cora")? else { return Ok(Verdict::Skip(NO_DATA.into())) };
    let (results, elapsed) = run_methods(&cora, Task::SscvSgc, &[Method::LogregBaseline, Method::Naive])?;
    let baseline = best_score(&results, Method::LogregBaseline)?;
    let best = results
        .iter()
        .filter(|r| r.config.method == Method::Naive && r.score.is_some())
        .max_by(|a, b| a.score.unwrap().total_cmp(&b.score.unwrap()))
        .ok_or("no successful naive run")?;
    let (naive, std) = (best.score.unwrap(), best.std.unwrap_or(f64::NAN));
    within("logistic regression accuracy (%)", 100.0 * baseline, 46.84, 3.0)?;
    within("SGC naive accuracy (%)", 100.0 * naive, 67.19, 3.0)?;
    ensure((0.5..=3.5).contains(&(100.0 * std)), || format!("SGC naive std {:.2} outside [0.5, 3.5]", 100.0 * std))?;
    let per_point = elapsed / results.len() as u32 * jobs() as u32;
    ensure(per_point < Duration::from_secs(1800), || format!("{per_point:.0?} per grid point"))?;
    Ok(Verdict::Pass(format!(
        "logreg {:.2}%, SGC naive {:.2}% ± {:.2}",
        100.0 * baseline,
        100.0 * naive,
        100.0 * std
    )))
}

fn criterion_toronto_denoising() -> Outcome {
    let Some(toronto) = load_bundle("toronto")? else { return Ok(Verdict::Skip(NO_DATA.into())) };
    let methods = [Method::ReferenceGraph, Method::Smooth, Method::Nnk, Method::Naive];
    let (results, elapsed) = run_methods(&toronto, Task::Dgs, &methods)?;
    let road = best_score(&results, Method::ReferenceGraph)?;
    let smooth = best_score(&results, Method::Smooth)?;
    let nnk = best_score(&results, Method::Nnk)?;
    let knn = best_score(&results, Method::Naive)?;
    within("road graph SNR", road, 10.32, 0.3)?;
    within("smooth SNR", smooth, 10.41, 0.3)?;
    within("NNK SNR", nnk, 9.99, 0.3)?;
    within("k-NN SNR", knn, 9.80, 0.3)?;
    ensure(knn >= 9.5, || format!("k-NN SNR {knn:.2} below 9.5 dB"))?;
    ensure(smooth > road && road > nnk && nnk > knn, || {
        format!("ordering broken: smooth {smooth:.2}, road {road:.2}, NNK {nnk:.2}, k-NN {knn:.2}")
    })?;
    ensure(elapsed < Duration::from_secs(900), || format!("took {elapsed:.0?}"))?;
    Ok(Verdict::Pass(format!(
        "smooth {smooth:.2} > road {road:.2} > NNK {nnk:.2} > k-NN {knn:.2} dB"
    )))
}

// ---------------------------------------------------------------------- main

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("cora clustering reproduction", criterion_cora_clustering),
        ("cora semi-supervised reproduction", criterion_cora_classification),
        ("Toronto denoising reproduction", criterion_toronto_denoising),
        ("AMI matches the permutation-average oracle", criterion_ami),
        ("NNLS matches the orthant grid oracle", criterion_nnls),
        ("two-node smooth graph closed form", criterion_two_node_smooth),
        ("spectral clustering recovers cliques", criterion_cliques),
        ("Simoncelli filter and denoising", criterion_filter),
        ("reports are deterministic", criterion_determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    // libtest flags such as --list are accepted and otherwise ignored
    if std::env::args().any(|a| a == "--list") {
        for (i, (name, _)) in criteria.iter().enumerate() {
            println!("criterion {}: {name}: test", i + 1);
        }
        return ExitCode::SUCCESS;
    }
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filters.is_empty() && !filters.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let text = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {text}"))
        });
        match outcome {
            Ok(Verdict::Pass(detail)) => println!("PASS {label}: {detail}"),
            Ok(Verdict::Skip(reason)) => println!("SKIP {label}: {reason}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {label}: {reason}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
