//! Task runners and the grid executor.

use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use super::config::{Method, RunConfig, Task, INPUT_SNR_DB};
use super::dataset::DatasetBundle;
use super::splits::{derive_seed, split_generator};
use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, Variant};
use crate::inference::{dense_graph, naive_graph, nnk_graph, smooth_graph, NaiveConfig, NnkConfig, SmoothConfig};
use crate::metrics::{accuracy, add_noise_to_snr, ami};
use crate::similarity::{pairwise_sq_euclidean, similarity, FeatureMatrix, PairAxis, SimilarityKind};
use crate::tasks::{
    diffuse, fit_predict_diffused, kmeans, spectral_cluster, Denoiser, LabelPropagator, SemiSupervisedLabels,
    SgcParams,
};

/// Seed domain of per-split classifier initializations.
const MODEL_DOMAIN: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: RunConfig,
    pub dataset: String,
    /// AMI, mean accuracy or best SNR in dB; `None` when the point failed.
    pub score: Option<f64>,
    /// Standard deviation over splits, classification tasks only.
    pub std: Option<f64>,
    /// Best filter parameter, denoising only.
    pub tau: Option<f64>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl RunResult {
    fn new(bundle: &DatasetBundle, cfg: &RunConfig) -> Self {
        RunResult {
            config: cfg.clone(),
            dataset: bundle.name.clone(),
            score: None,
            std: None,
            tau: None,
            warnings: Vec::new(),
            error: None,
            seconds: 0.0,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Raw graph over the rows of `vertices` for a graph-inferring method.
pub fn infer_graph(vertices: &FeatureMatrix, cfg: &RunConfig, warnings: &mut Vec<String>) -> Result<Graph> {
    let need_sim = || cfg.similarity.ok_or_else(|| invalid(format!("{} needs a similarity", cfg.method)));
    match cfg.method {
        Method::Naive => {
            let sim = need_sim()?;
            match cfg.k {
                Some(k) => naive_graph(
                    vertices,
                    &NaiveConfig {
                        similarity: sim,
                        k,
                        gamma: cfg.gamma,
                    },
                ),
                None => Ok(dense_graph(&similarity(vertices, sim, cfg.gamma)?)),
            }
        }
        Method::Nnk => {
            let k = cfg.k.ok_or_else(|| invalid("nnk needs a neighborhood size"))?;
            let (g, report) = nnk_graph(
                vertices,
                &NnkConfig {
                    kernel: need_sim()?,
                    k,
                    sigma: cfg.sigma,
                    gamma: cfg.gamma,
                },
            )?;
            if report.fallbacks > 0 {
                warnings.push(format!("nnls-fallbacks={}", report.fallbacks));
            }
            Ok(g)
        }
        Method::Smooth => {
            let k = cfg.k.ok_or_else(|| invalid("smooth needs a target degree"))?;
            let z = pairwise_sq_euclidean(vertices, PairAxis::Rows);
            let (g, report) = smooth_graph(z.view(), &SmoothConfig { k, sigma: cfg.sigma })?;
            if !report.solution.converged {
                warnings.push("solver-not-converged".into());
            }
            Ok(g)
        }
        other => Err(invalid(format!("{other} does not infer a graph"))),
    }
}

fn normalized(g: &Graph, cfg: &RunConfig, warnings: &mut Vec<String>) -> Result<Graph> {
    let (g, isolated) = g.normalize(cfg.variant.unwrap_or(Variant::Raw))?;
    if isolated > 0 {
        warnings.push(format!("isolated={isolated}"));
    }
    Ok(g)
}

fn require_labels(bundle: &DatasetBundle) -> Result<(&[usize], usize)> {
    match (&bundle.labels, bundle.classes) {
        (Some(l), Some(c)) => Ok((l, c)),
        _ => Err(invalid(format!("dataset {} has no labels", bundle.name))),
    }
}

/// Unsupervised clustering scored by AMI against the labels.
pub fn run_task1(bundle: &DatasetBundle, cfg: &RunConfig) -> Result<RunResult> {
    let (truth, classes) = require_labels(bundle)?;
    let mut out = RunResult::new(bundle, cfg);
    let partition = match cfg.method {
        Method::CmeansBaseline => kmeans(bundle.features.view(), classes, cfg.seed)?,
        m if m.infers_graph() => {
            let raw = infer_graph(&bundle.features, cfg, &mut out.warnings)?;
            let g = normalized(&raw, cfg, &mut out.warnings)?;
            let (p, report) = spectral_cluster(&g, classes, cfg.seed, cfg.eigenvectors)?;
            if report.ambiguous {
                out.warnings.push("ambiguous-eigenbasis".into());
            }
            if report.zero_rows > 0 {
                out.warnings.push(format!("zero-rows={}", report.zero_rows));
            }
            p
        }
        other => return Err(invalid(format!("{other} does not apply to clustering"))),
    };
    out.score = Some(ami(&partition.assignment, truth)?);
    Ok(out)
}

/// Mean and `n − 1` standard deviation.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Semi-supervised classification averaged over seeded splits.
pub fn run_task2(bundle: &DatasetBundle, cfg: &RunConfig) -> Result<RunResult> {
    let (truth, classes) = require_labels(bundle)?;
    let mut out = RunResult::new(bundle, cfg);
    if cfg.n_splits == 0 {
        return Err(invalid("at least one split is required"));
    }
    let masks = split_generator(bundle.n(), cfg.split_fraction, cfg.n_splits, cfg.seed)?;
    let params = |i: usize| SgcParams {
        seed: derive_seed(cfg.seed, MODEL_DOMAIN, i as u64),
        ..SgcParams::default()
    };
    let labels_for = |mask: &Vec<bool>| SemiSupervisedLabels::new(truth.to_vec(), mask.clone(), classes);

    enum Prepared {
        Features(Array2<f64>),
        Propagator(LabelPropagator),
    }
    let prepared = match cfg.method {
        Method::LogregBaseline => Prepared::Features(bundle.features.view().to_owned()),
        m if m.infers_graph() => {
            let raw = infer_graph(&bundle.features, cfg, &mut out.warnings)?;
            let g = normalized(&raw, cfg, &mut out.warnings)?;
            match cfg.task {
                Task::SscvLp => Prepared::Propagator(LabelPropagator::new(&g)?),
                _ => Prepared::Features(diffuse(&g, bundle.features.view(), SgcParams::default().diffusion_hops)?),
            }
        }
        other => return Err(invalid(format!("{other} does not apply to classification"))),
    };

    let per_split: Vec<(f64, usize)> = masks
        .par_iter()
        .enumerate()
        .map(|(i, mask)| {
            let y = labels_for(mask)?;
            match &prepared {
                Prepared::Features(x) => Ok((fit_predict_diffused(x.view(), &y, &params(i))?.accuracy, 0)),
                Prepared::Propagator(p) => {
                    let prop = p.propagate(&y)?;
                    Ok((accuracy(&prop.labels, truth, &y.hidden_mask())?, prop.fallbacks))
                }
            }
        })
        .collect::<Result<_>>()?;

    let accs: Vec<f64> = per_split.iter().map(|a| a.0).collect();
    let fallbacks: usize = per_split.iter().map(|a| a.1).sum();
    if fallbacks > 0 {
        out.warnings.push(format!("majority-fallbacks={fallbacks}"));
    }
    if accs.len() < 2 {
        out.warnings.push("single-split".into());
    }
    let (mean, std) = mean_std(&accs);
    out.score = Some(mean);
    out.std = Some(std);
    Ok(out)
}

/// The denoising input: packaged noisy features or the clean signal with
/// calibrated noise.
pub fn noisy_signal(bundle: &DatasetBundle) -> Result<Vec<f64>> {
    let clean = bundle
        .clean_signal
        .as_ref()
        .ok_or_else(|| invalid(format!("dataset {} has no clean signal", bundle.name)))?;
    if bundle.noisy_features {
        Ok(bundle.features.view().row(0).to_vec())
    } else {
        add_noise_to_snr(clean, INPUT_SNR_DB, bundle.seed)
    }
}

/// Graph-signal denoising: vertices are the features, the graph is built
/// from the noisy observation, the score is the best SNR over the τ sweep.
pub fn run_task3(bundle: &DatasetBundle, cfg: &RunConfig) -> Result<RunResult> {
    let mut out = RunResult::new(bundle, cfg);
    let noisy = noisy_signal(bundle)?;
    let clean = bundle.clean_signal.as_ref().expect("checked by noisy_signal");
    let raw = match cfg.method {
        Method::ReferenceGraph => bundle
            .reference_graph
            .clone()
            .ok_or_else(|| invalid(format!("dataset {} has no reference graph", bundle.name)))?,
        m if m.infers_graph() => {
            if let Some(kind) = cfg.similarity.filter(|&s| s != SimilarityKind::Rbf) {
                return Err(invalid(format!(
                    "{kind} similarity is undefined between scalar feature values, use rbf"
                )));
            }
            let vertices = FeatureMatrix::new(Array2::from_shape_vec((noisy.len(), 1), noisy.clone()).expect("column"))?;
            infer_graph(&vertices, cfg, &mut out.warnings)?
        }
        other => return Err(invalid(format!("{other} does not apply to denoising"))),
    };
    let g = normalized(&raw, cfg, &mut out.warnings)?;
    let (tau, snr) = Denoiser::new(&g)?.best_tau(&noisy, clean)?;
    out.score = Some(snr);
    out.tau = Some(tau);
    Ok(out)
}

/// Runs one grid point; failures are recorded in the result.
pub fn run_point(bundle: &DatasetBundle, cfg: &RunConfig) -> RunResult {
    let start = Instant::now();
    let outcome = match cfg.task {
        Task::Ucv => run_task1(bundle, cfg),
        Task::SscvLp | Task::SscvSgc => run_task2(bundle, cfg),
        Task::Dgs => run_task3(bundle, cfg),
    };
    let mut result = outcome.unwrap_or_else(|e| {
        log::warn!(
            "{} {} {} k={} {}: {e}",
            cfg.task,
            cfg.method,
            cfg.similarity_label(),
            cfg.k_label(),
            cfg.variant_label()
        );
        RunResult {
            error: Some(e.to_string()),
            ..RunResult::new(bundle, cfg)
        }
    });
    result.seconds = start.elapsed().as_secs_f64();
    result
}

/// Runs every point on a pool of `jobs` threads. Output order follows
/// `configs` regardless of scheduling.
pub fn run_grid(bundle: &DatasetBundle, configs: &[RunConfig], jobs: usize) -> Result<Vec<RunResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| configs.par_iter().map(|cfg| run_point(bundle, cfg)).collect()))
}

/// Highest-scoring successful row per method, in first-appearance order.
/// Ties keep the earlier row.
pub fn best_per_method(results: &[RunResult]) -> Vec<&RunResult> {
    let mut best: Vec<&RunResult> = Vec::new();
    for r in results {
        let Some(score) = r.score else { continue };
        match best.iter_mut().find(|b| b.config.method == r.config.method) {
            Some(slot) => {
                if score > slot.score.expect("only scored rows are kept") {
                    *slot = r;
                }
            }
            None => best.push(r),
        }
    }
    best
}
