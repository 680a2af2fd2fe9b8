//! CSV reports and best-per-method tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::Task;
use super::run::{best_per_method, RunResult};
use crate::error::{invalid, Result};

pub const CSV_HEADER: &str = "task,dataset,method,similarity,k,variant,score,std,tau,warnings,seconds";

fn number(v: Option<f64>, decimals: usize) -> String {
    match v {
        None => String::new(),
        Some(x) if x == f64::INFINITY => "inf".into(),
        Some(x) if x == f64::NEG_INFINITY => "-inf".into(),
        Some(x) => format!("{x:.decimals$}"),
    }
}

/// Free text made safe for a CSV cell.
fn cell(text: &str) -> String {
    text.replace([',', '\n', '\r'], ";")
}

fn notes(r: &RunResult) -> String {
    let mut parts = r.warnings.clone();
    if let Some(e) = &r.error {
        parts.push(format!("error: {e}"));
    }
    cell(&parts.join(" | "))
}

/// Report body. Wall time is left empty unless `record_time`, so reports
/// stay byte-identical across runs.
pub fn format_csv(results: &[RunResult], record_time: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        let c = &r.config;
        let seconds = if record_time { format!("{:.3}", r.seconds) } else { String::new() };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.task,
            cell(&r.dataset),
            c.method,
            c.similarity_label(),
            c.k_label(),
            c.variant_label(),
            number(r.score, 6),
            number(r.std, 6),
            number(r.tau, 3),
            notes(r),
            seconds
        )
        .expect("writing to a String");
    }
    out
}

fn score_text(task: Task, r: &RunResult) -> String {
    let score = r.score.unwrap_or(f64::NAN);
    match task {
        Task::Ucv => format!("{score:.3}"),
        Task::SscvLp | Task::SscvSgc => {
            format!("{:.2}% ± {:.2}", 100.0 * score, 100.0 * r.std.unwrap_or(0.0))
        }
        Task::Dgs => match r.tau {
            Some(tau) => format!("{} dB (tau={tau:.3})", number(Some(score), 2)),
            None => format!("{} dB", number(Some(score), 2)),
        },
    }
}

/// Plain-text table of the best row for each method.
pub fn format_best_table(results: &[RunResult]) -> String {
    let best = best_per_method(results);
    let headers = ["method", "similarity", "k", "variant", "score"];
    let rows: Vec<[String; 5]> = best
        .iter()
        .map(|r| {
            let c = &r.config;
            [
                c.method.to_string(),
                c.similarity_label().to_string(),
                c.k_label(),
                c.variant_label().to_string(),
                score_text(c.task, r),
            ]
        })
        .collect();
    let mut widths = headers.map(str::len);
    for row in &rows {
        for (w, v) in widths.iter_mut().zip(row) {
            *w = (*w).max(v.chars().count());
        }
    }
    let line = |vals: [&str; 5]| -> String {
        let cells: Vec<String> = vals
            .iter()
            .zip(widths)
            .map(|(v, w)| format!("{v:<w$}"))
            .collect();
        cells.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = String::new();
    if let Some(first) = results.first() {
        let failed = results.iter().filter(|r| r.failed()).count();
        writeln!(
            out,
            "{} on {}: {} points, {failed} failed",
            first.config.task,
            first.dataset,
            results.len()
        )
        .expect("writing to a String");
    }
    out += &line(headers);
    out += &line(widths.map(|w| "-".repeat(w)).each_ref().map(String::as_str));
    for row in &rows {
        out += &line(row.each_ref().map(String::as_str));
    }
    out
}

/// Path of the best-per-method table next to a CSV report.
pub fn best_table_path(csv: &Path) -> PathBuf {
    csv.with_extension("best.txt")
}

/// Writes the CSV report and the best-per-method table next to it.
pub fn emit_report(results: &[RunResult], path: impl AsRef<Path>, record_time: bool) -> Result<PathBuf> {
    if results.is_empty() {
        return Err(invalid("no results to report"));
    }
    let path = path.as_ref();
    fs::write(path, format_csv(results, record_time))?;
    let table = best_table_path(path);
    fs::write(&table, format_best_table(results))?;
    Ok(table)
}
