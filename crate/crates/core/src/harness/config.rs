//! Run configurations and hyperparameter grids.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::graph::Variant;
use crate::inference::{DEFAULT_SIGMA, K_GRID};
use crate::similarity::SimilarityKind;
use crate::tasks::EigenSelection;

pub const SPLIT_FRACTION: f64 = 0.05;
pub const N_SPLITS: usize = 100;
/// Input SNR of the synthesized denoising input, in dB.
pub const INPUT_SNR_DB: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    Ucv,
    SscvLp,
    SscvSgc,
    Dgs,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Ucv, Task::SscvLp, Task::SscvSgc, Task::Dgs];

    pub fn name(self) -> &'static str {
        match self {
            Task::Ucv => "ucv",
            Task::SscvLp => "sscv-lp",
            Task::SscvSgc => "sscv-sgc",
            Task::Dgs => "dgs",
        }
    }

    /// Methods swept by the full grid, baseline first.
    pub fn methods(self) -> [Method; 4] {
        let baseline = match self {
            Task::Ucv => Method::CmeansBaseline,
            Task::SscvLp | Task::SscvSgc => Method::LogregBaseline,
            Task::Dgs => Method::ReferenceGraph,
        };
        [baseline, Method::Naive, Method::Nnk, Method::Smooth]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Naive,
    Nnk,
    Smooth,
    CmeansBaseline,
    LogregBaseline,
    ReferenceGraph,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Naive,
        Method::Nnk,
        Method::Smooth,
        Method::CmeansBaseline,
        Method::LogregBaseline,
        Method::ReferenceGraph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Nnk => "nnk",
            Method::Smooth => "smooth",
            Method::CmeansBaseline => "cmeans-baseline",
            Method::LogregBaseline => "logreg-baseline",
            Method::ReferenceGraph => "reference-graph",
        }
    }

    /// Whether the method infers a graph from features.
    pub fn infers_graph(self) -> bool {
        matches!(self, Method::Naive | Method::Nnk | Method::Smooth)
    }
}

macro_rules! named_enum {
    ($ty:ty, $what:literal) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                <$ty>::ALL
                    .into_iter()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| invalid(format!(concat!("unknown ", $what, " '{}'"), s)))
            }
        }
    };
}

named_enum!(Task, "task");
named_enum!(Method, "method");

/// One grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub method: Method,
    /// `None` for methods without a similarity choice.
    pub similarity: Option<SimilarityKind>,
    /// Neighborhood size or target degree; `None` keeps every edge.
    pub k: Option<usize>,
    pub gamma: Option<f64>,
    pub sigma: f64,
    /// `None` for baselines, which use no graph.
    pub variant: Option<Variant>,
    pub seed: u64,
    pub split_fraction: f64,
    pub n_splits: usize,
    pub eigenvectors: EigenSelection,
}

impl RunConfig {
    pub fn new(task: Task, method: Method, seed: u64) -> Self {
        RunConfig {
            task,
            method,
            similarity: None,
            k: None,
            gamma: None,
            sigma: DEFAULT_SIGMA,
            variant: None,
            seed,
            split_fraction: SPLIT_FRACTION,
            n_splits: N_SPLITS,
            eigenvectors: EigenSelection::default(),
        }
    }

    /// Column value for the similarity field of a report.
    pub fn similarity_label(&self) -> &'static str {
        match (self.method, self.similarity) {
            (_, Some(s)) => s.name(),
            (Method::Smooth, None) => "sqeuclidean",
            _ => "-",
        }
    }

    pub fn k_label(&self) -> String {
        match (self.method.infers_graph(), self.k) {
            (true, Some(k)) => k.to_string(),
            (true, None) => "none".into(),
            (false, _) => "-".into(),
        }
    }

    pub fn variant_label(&self) -> &'static str {
        self.variant.map_or("-", Variant::short_name)
    }
}

/// Axes of a grid; expanded per task into concrete [`RunConfig`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub methods: Vec<Method>,
    pub similarities: Vec<SimilarityKind>,
    /// `None` stands for "no thresholding" (dense graph).
    pub ks: Vec<Option<usize>>,
    pub variants: Vec<Variant>,
    pub gamma: Option<f64>,
    pub sigma: f64,
    pub split_fraction: f64,
    pub n_splits: usize,
    pub eigenvectors: EigenSelection,
}

impl GridSpec {
    /// Every method, similarity, neighborhood size and adjacency variant.
    pub fn full(task: Task) -> Self {
        let similarities = if task == Task::Dgs {
            vec![SimilarityKind::Rbf]
        } else {
            SimilarityKind::ALL.to_vec()
        };
        let mut ks: Vec<Option<usize>> = K_GRID.iter().map(|&k| Some(k)).collect();
        if task == Task::Dgs {
            ks.push(None);
        }
        GridSpec {
            methods: task.methods().to_vec(),
            similarities,
            ks,
            variants: Variant::ALL.to_vec(),
            gamma: None,
            sigma: DEFAULT_SIGMA,
            split_fraction: SPLIT_FRACTION,
            n_splits: N_SPLITS,
            eigenvectors: EigenSelection::default(),
        }
    }

    /// Parses `key = v1, v2, ...` lines on top of the full grid for `task`.
    /// Keys: method, similarity, k, variant, gamma, sigma, split_fraction,
    /// n_splits, eigenvectors.
    pub fn parse(text: &str, task: Task, source: &str) -> Result<Self> {
        let mut spec = GridSpec::full(task);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: source.to_string(),
                line,
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err("expected key = values".into()))?;
            let values: Vec<&str> = value.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
            if values.is_empty() {
                return Err(err(format!("no values for '{}'", key.trim())));
            }
            let single = || -> Result<&str> {
                match values.as_slice() {
                    [v] => Ok(v),
                    _ => Err(err(format!("'{}' takes a single value", key.trim()))),
                }
            };
            let wrap = |e: Error| err(e.to_string());
            match key.trim() {
                "method" => {
                    spec.methods = values.iter().map(|v| v.parse()).collect::<Result<_>>().map_err(wrap)?;
                }
                "similarity" => {
                    spec.similarities = values.iter().map(|v| v.parse()).collect::<Result<_>>().map_err(wrap)?;
                }
                "k" => {
                    spec.ks = values
                        .iter()
                        .map(|v| match *v {
                            "none" => Ok(None),
                            v => v.parse::<usize>().map(Some).map_err(|_| err(format!("invalid k '{v}'"))),
                        })
                        .collect::<Result<_>>()?;
                }
                "variant" => {
                    spec.variants = values.iter().map(|v| v.parse()).collect::<Result<_>>().map_err(wrap)?;
                }
                "gamma" => {
                    let v = single()?;
                    spec.gamma = match v {
                        "default" => None,
                        v => Some(v.parse().map_err(|_| err(format!("invalid gamma '{v}'")))?),
                    };
                }
                "sigma" => {
                    let v = single()?;
                    spec.sigma = v.parse().map_err(|_| err(format!("invalid sigma '{v}'")))?;
                }
                "split_fraction" => {
                    let v = single()?;
                    spec.split_fraction = v.parse().map_err(|_| err(format!("invalid fraction '{v}'")))?;
                }
                "n_splits" => {
                    let v = single()?;
                    spec.n_splits = v.parse().map_err(|_| err(format!("invalid split count '{v}'")))?;
                }
                "eigenvectors" => {
                    spec.eigenvectors = single()?.parse().map_err(wrap)?;
                }
                other => return Err(err(format!("unknown grid key '{other}'"))),
            }
        }
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>, task: Task) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        GridSpec::parse(&text, task, &path.display().to_string())
    }

    /// Concrete grid points in a fixed order: methods as listed, then
    /// similarity, k and variant. Baselines yield one point. Methods that do
    /// not belong to `task` are rejected.
    pub fn expand(&self, task: Task, seed: u64) -> Result<Vec<RunConfig>> {
        let mut out = Vec::new();
        for &method in &self.methods {
            if !method.infers_graph() && !task.methods().contains(&method) {
                return Err(invalid(format!("method {method} does not apply to task {task}")));
            }
            let mut base = RunConfig::new(task, method, seed);
            base.gamma = self.gamma;
            base.sigma = self.sigma;
            base.split_fraction = self.split_fraction;
            base.n_splits = self.n_splits;
            base.eigenvectors = self.eigenvectors;
            match method {
                Method::CmeansBaseline | Method::LogregBaseline => out.push(base),
                Method::ReferenceGraph => {
                    for &v in &self.variants {
                        out.push(RunConfig { variant: Some(v), ..base.clone() });
                    }
                }
                Method::Naive | Method::Nnk | Method::Smooth => {
                    let sims: Vec<Option<SimilarityKind>> = if method == Method::Smooth {
                        vec![None]
                    } else {
                        self.similarities.iter().map(|&s| Some(s)).collect()
                    };
                    // dense graphs only make sense for the naive construction
                    let dense_ok = method == Method::Naive && task == Task::Dgs;
                    for sim in sims {
                        for &k in self.ks.iter().filter(|k| k.is_some() || dense_ok) {
                            for &v in &self.variants {
                                out.push(RunConfig {
                                    similarity: sim,
                                    k,
                                    variant: Some(v),
                                    ..base.clone()
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
