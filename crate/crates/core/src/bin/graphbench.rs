use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use graphbench::harness::{self, DatasetBundle, GridSpec, Method, RunConfig, Task};
use graphbench::similarity::SimilarityKind;
use graphbench::tasks::EigenSelection;
use graphbench::{Graph, Variant};

#[derive(Parser)]
#[command(name = "graphbench", version, about = "Graph topology inference benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InferMethod {
    Naive,
    Nnk,
    Smooth,
}

#[derive(Clone, Copy, ValueEnum)]
enum Vertices {
    /// One vertex per observation.
    Rows,
    /// One vertex per feature (graph-signal bundles).
    Features,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph from a dataset and write it as TSV.
    Infer {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        method: InferMethod,
        /// cosine, covariance or rbf (ignored by smooth).
        #[arg(long, default_value = "rbf")]
        similarity: SimilarityKind,
        /// Neighborhood size, or target mean degree for smooth.
        #[arg(long)]
        k: usize,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = graphbench::inference::DEFAULT_SIGMA)]
        sigma: f64,
        /// raw, sym, aug or augsym.
        #[arg(long, default_value = "raw")]
        variant: Variant,
        #[arg(long, value_enum, default_value = "rows")]
        vertices: Vertices,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep a hyperparameter grid on one task and write a CSV report.
    Run {
        /// ucv, sscv-lp, sscv-sgc or dgs.
        #[arg(long)]
        task: Task,
        #[arg(long)]
        data: PathBuf,
        /// `full` or a grid file of `key = values` lines.
        #[arg(long, default_value = "full")]
        grid: String,
        #[arg(long, env = "GRAPHBENCH_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        report: PathBuf,
        /// Override the number of splits for classification tasks.
        #[arg(long)]
        splits: Option<usize>,
        /// keep-first, skip-first or skip-first-of-c.
        #[arg(long)]
        eigenvectors: Option<EigenSelection>,
        /// Fill the `seconds` column; the report is then not reproducible.
        #[arg(long)]
        record_time: bool,
    },
    /// Dataset utilities.
    Datasets {
        #[command(subcommand)]
        command: DatasetCommand,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Load a bundle and report its shape, or the first problem found.
    Validate { dir: PathBuf },
}

/// Validation problems exit with 1, partial grid failures with 2.
enum Failure {
    Invalid(graphbench::Error),
    Partial(usize),
}

impl From<graphbench::Error> for Failure {
    fn from(e: graphbench::Error) -> Self {
        Failure::Invalid(e)
    }
}

#[allow(clippy::too_many_arguments)]
fn infer(
    data: PathBuf,
    method: InferMethod,
    similarity: SimilarityKind,
    k: usize,
    gamma: Option<f64>,
    sigma: f64,
    variant: Variant,
    vertices: Vertices,
    out: PathBuf,
) -> Result<(), Failure> {
    let bundle = DatasetBundle::load(&data)?;
    let points = match vertices {
        Vertices::Rows => bundle.features.clone(),
        Vertices::Features => bundle.features.transposed(),
    };
    let method = match method {
        InferMethod::Naive => Method::Naive,
        InferMethod::Nnk => Method::Nnk,
        InferMethod::Smooth => Method::Smooth,
    };
    let cfg = RunConfig {
        similarity: (method != Method::Smooth).then_some(similarity),
        k: Some(k),
        gamma,
        sigma,
        variant: Some(variant),
        ..RunConfig::new(Task::Ucv, method, 0)
    };
    let mut warnings = Vec::new();
    let raw: Graph = harness::infer_graph(&points, &cfg, &mut warnings)?;
    let (g, isolated) = raw.normalize(variant)?;
    if isolated > 0 {
        warnings.push(format!("isolated={isolated}"));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    g.save(&out)?;
    println!(
        "wrote {}: {} vertices, {} edges, mean degree {:.2}",
        out.display(),
        g.n(),
        g.edge_count(),
        g.mean_degree()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    task: Task,
    data: PathBuf,
    grid: String,
    seed: u64,
    jobs: usize,
    report: PathBuf,
    splits: Option<usize>,
    eigenvectors: Option<EigenSelection>,
    record_time: bool,
) -> Result<(), Failure> {
    let bundle = DatasetBundle::load(&data)?;
    let mut spec = if grid == "full" {
        GridSpec::full(task)
    } else {
        GridSpec::load(&grid, task)?
    };
    if let Some(n) = splits {
        spec.n_splits = n;
    }
    if let Some(e) = eigenvectors {
        spec.eigenvectors = e;
    }
    let configs = spec.expand(task, seed)?;
    log::info!("{} grid points on {} with {jobs} workers", configs.len(), bundle.summary());
    let results = harness::run_grid(&bundle, &configs, jobs)?;
    let table = harness::emit_report(&results, &report, record_time)?;
    print!("{}", harness::format_best_table(&results));
    println!("report: {} (table: {})", report.display(), table.display());
    match results.iter().filter(|r| r.failed()).count() {
        0 => Ok(()),
        n => Err(Failure::Partial(n)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Infer {
            data,
            method,
            similarity,
            k,
            gamma,
            sigma,
            variant,
            vertices,
            out,
        } => infer(data, method, similarity, k, gamma, sigma, variant, vertices, out),
        Command::Run {
            task,
            data,
            grid,
            seed,
            jobs,
            report,
            splits,
            eigenvectors,
            record_time,
        } => run(task, data, grid, seed, jobs, report, splits, eigenvectors, record_time),
        Command::Datasets {
            command: DatasetCommand::Validate { dir },
        } => DatasetBundle::load(&dir)
            .map(|b| println!("ok: {}", b.summary()))
            .map_err(Failure::from),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Partial(n)) => {
            eprintln!("{n} grid points failed; see the report");
            ExitCode::from(2)
        }
    }
}
