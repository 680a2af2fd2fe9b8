//! Plain-text dataset bundles.
//!
//! A bundle is a directory with
//!
//! * `features.txt`: one observation per line, whitespace-separated floats;
//! * `labels.txt` (optional): one integer class per line, dense in `0..C`;
//! * `signal.txt` (optional): clean signal, one float per line, one value
//!   per feature column;
//! * `graph.tsv` (optional): reference graph in the TSV edge format;
//! * `meta.txt` (optional): `key=value` lines.
//!
//! Blank lines and lines starting with `#` are skipped in every text file.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::similarity::FeatureMatrix;

const META_KEYS: [&str; 4] = ["name", "seed", "noisy_features", "classes"];

#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub name: String,
    pub features: FeatureMatrix,
    pub labels: Option<Vec<usize>>,
    pub classes: Option<usize>,
    pub clean_signal: Option<Vec<f64>>,
    pub reference_graph: Option<Graph>,
    /// Seed for synthesizing the noisy denoising input.
    pub seed: u64,
    /// `features.txt` already holds the noisy version of `signal.txt`.
    pub noisy_features: bool,
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_float(path: &Path, line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_error(path, line, format!("not a number: '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_error(path, line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, content) in content_lines(&text) {
        let before = values.len();
        for tok in content.split_whitespace() {
            values.push(parse_float(path, line, tok)?);
        }
        let width = values.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(parse_error(path, line, format!("expected {c} values, found {width}")));
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_error(path, 0, "no observations"))?;
    let values = Array2::from_shape_vec((rows, cols), values).expect("row widths checked");
    FeatureMatrix::new(values)
}

pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    content_lines(&text)
        .map(|(line, content)| {
            let mut toks = content.split_whitespace();
            let v = parse_float(path, line, toks.next().expect("non-empty line"))?;
            if toks.next().is_some() {
                return Err(parse_error(path, line, "expected one value per line"));
            }
            Ok(v)
        })
        .collect()
}

/// Labels plus their class count; labels must cover `0..C` without gaps.
pub fn read_labels(path: &Path) -> Result<(Vec<usize>, usize)> {
    let text = fs::read_to_string(path)?;
    let labels = content_lines(&text)
        .map(|(line, content)| {
            content
                .parse::<usize>()
                .map_err(|_| parse_error(path, line, format!("not a class index: '{content}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; classes];
    for &l in &labels {
        seen[l] = true;
    }
    if let Some(gap) = seen.iter().position(|s| !s) {
        return Err(parse_error(
            path,
            0,
            format!("labels must be dense in 0..{classes}, class {gap} is missing"),
        ));
    }
    Ok((labels, classes))
}

#[derive(Debug, Default)]
struct Meta {
    name: Option<String>,
    seed: Option<u64>,
    noisy_features: bool,
    classes: Option<usize>,
}

fn read_meta(path: &Path) -> Result<Meta> {
    let text = fs::read_to_string(path)?;
    let mut meta = Meta::default();
    for (line, content) in content_lines(&text) {
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(path, line, "expected key=value"))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| parse_error(path, line, format!("invalid {what} '{value}'"));
        match key {
            "name" => meta.name = Some(value.to_string()),
            "seed" => meta.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "noisy_features" => meta.noisy_features = value.parse().map_err(|_| bad("flag"))?,
            "classes" => meta.classes = Some(value.parse().map_err(|_| bad("class count"))?),
            other => {
                return Err(parse_error(
                    path,
                    line,
                    format!("unknown key '{other}' (expected one of {})", META_KEYS.join(", ")),
                ));
            }
        }
    }
    Ok(meta)
}

impl DatasetBundle {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let features = read_features(&dir.join("features.txt"))?;
        let (n, f) = (features.rows(), features.cols());

        let optional = |name: &str| {
            let p = dir.join(name);
            p.is_file().then_some(p)
        };
        let meta = match optional("meta.txt") {
            Some(p) => read_meta(&p)?,
            None => Meta::default(),
        };

        let (labels, classes) = match optional("labels.txt") {
            Some(p) => {
                let (labels, classes) = read_labels(&p)?;
                if labels.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{}: {} labels for {n} observations",
                        p.display(),
                        labels.len()
                    )));
                }
                if let Some(c) = meta.classes.filter(|&c| c != classes) {
                    return Err(Error::DimensionMismatch(format!(
                        "meta declares {c} classes, labels have {classes}"
                    )));
                }
                (Some(labels), Some(classes))
            }
            None => (None, None),
        };

        let clean_signal = match optional("signal.txt") {
            Some(p) => {
                let s = read_signal(&p)?;
                if n != 1 || s.len() != f {
                    return Err(Error::DimensionMismatch(format!(
                        "{}: a signal bundle needs one observation with one value per feature, \
                         got {n}x{f} features and {} signal values",
                        p.display(),
                        s.len()
                    )));
                }
                Some(s)
            }
            None => None,
        };
        if meta.noisy_features && clean_signal.is_none() {
            return Err(Error::InvalidInput("noisy_features set without signal.txt".into()));
        }

        let reference_graph = match optional("graph.tsv") {
            Some(p) => {
                let g = Graph::load(&p)?;
                let expected = if clean_signal.is_some() { f } else { n };
                if g.n() != expected {
                    return Err(Error::DimensionMismatch(format!(
                        "{}: graph has {} vertices, expected {expected}",
                        p.display(),
                        g.n()
                    )));
                }
                Some(g)
            }
            None => None,
        };

        let name = meta.name.unwrap_or_else(|| {
            dir.file_name()
                .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned())
        });
        Ok(DatasetBundle {
            name,
            features,
            labels,
            classes,
            clean_signal,
            reference_graph,
            seed: meta.seed.unwrap_or(0),
            noisy_features: meta.noisy_features,
        })
    }

    /// Writes the bundle back in the directory layout read by [`load`].
    ///
    /// [`load`]: DatasetBundle::load
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut text = String::new();
        for row in self.features.view().rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            text.push_str(&line.join(" "));
            text.push('\n');
        }
        fs::write(dir.join("features.txt"), text)?;
        if let Some(labels) = &self.labels {
            let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
            fs::write(dir.join("labels.txt"), text)?;
        }
        if let Some(signal) = &self.clean_signal {
            let text: String = signal.iter().map(|v| format!("{v:e}\n")).collect();
            fs::write(dir.join("signal.txt"), text)?;
        }
        if let Some(g) = &self.reference_graph {
            g.save(dir.join("graph.tsv"))?;
        }
        let meta = format!(
            "name={}\nseed={}\nnoisy_features={}\n",
            self.name, self.seed, self.noisy_features
        );
        fs::write(dir.join("meta.txt"), meta)?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    /// One-line description for validation output.
    pub fn summary(&self) -> String {
        let mut parts = vec![format!("{}: N={} F={}", self.name, self.n(), self.features.cols())];
        if let Some(c) = self.classes {
            parts.push(format!("C={c}"));
        }
        if self.clean_signal.is_some() {
            parts.push(if self.noisy_features { "signal (noisy input packaged)" } else { "signal" }.into());
        }
        if let Some(g) = &self.reference_graph {
            parts.push(format!("reference graph with {} edges", g.edge_count()));
        }
        parts.join(", ")
    }
}
