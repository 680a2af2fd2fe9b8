//! Dataset ingestion, split protocol, grid execution and reporting.

pub mod config;
pub mod dataset;
pub mod report;
pub mod run;
pub mod splits;

pub use config::{GridSpec, Method, RunConfig, Task, INPUT_SNR_DB, N_SPLITS, SPLIT_FRACTION};
pub use dataset::DatasetBundle;
pub use report::{emit_report, format_best_table, format_csv, CSV_HEADER};
pub use run::{best_per_method, infer_graph, noisy_signal, run_grid, run_point, run_task1, run_task2, run_task3, RunResult};
pub use splits::{derive_seed, split_generator};
