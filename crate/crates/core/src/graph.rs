//! Sparse symmetric weighted graphs and the adjacency algebra built on them.
//!
//! Edges are stored once, upper-triangular (`i < j`), with strictly positive
//! weights. Self-loops are kept apart in a per-vertex `diagonal` vector, which
//! is only non-zero for augmented graphs.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{invalid, Error, Result};

/// Which adjacency operator a graph currently represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// `W`
    Raw,
    /// `D^{-1/2} W D^{-1/2}`
    SymNorm,
    /// `I + W`
    Augmented,
    /// `D̃^{-1/2} (I + W) D̃^{-1/2}`
    AugmentedSymNorm,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Raw,
        Variant::SymNorm,
        Variant::Augmented,
        Variant::AugmentedSymNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::SymNorm => "sym_norm",
            Variant::Augmented => "augmented",
            Variant::AugmentedSymNorm => "augmented_sym_norm",
        }
    }

    /// Short spelling used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::SymNorm => "sym",
            Variant::Augmented => "aug",
            Variant::AugmentedSymNorm => "augsym",
        }
    }

    fn augments(self) -> bool {
        matches!(self, Variant::Augmented | Variant::AugmentedSymNorm)
    }

    fn normalizes(self) -> bool {
        matches!(self, Variant::SymNorm | Variant::AugmentedSymNorm)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Variant::Raw),
            "sym" | "sym_norm" => Ok(Variant::SymNorm),
            "aug" | "augmented" => Ok(Variant::Augmented),
            "augsym" | "augmented_sym_norm" => Ok(Variant::AugmentedSymNorm),
            other => Err(invalid(format!("unknown adjacency variant `{other}`"))),
        }
    }
}

/// An undirected weighted edge, `i < j`, `weight > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    diagonal: Vec<f64>,
    variant: Variant,
}

impl Graph {
    /// Empty raw graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            diagonal: vec![0.0; n],
            variant: Variant::Raw,
        }
    }

    /// Builds a raw graph from `(i, j, w)` triples.
    ///
    /// Orientation is normalized to `i < j` and duplicate pairs are rejected.
    /// Non-positive weights are dropped. Self-edges are rejected.
    pub fn from_edges(n: usize, triples: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (a, b, w) in triples {
            if a >= n || b >= n {
                return Err(invalid(format!("edge ({a}, {b}) out of range for n={n}")));
            }
            if a == b {
                return Err(invalid(format!("self-edge at vertex {a}")));
            }
            if !w.is_finite() {
                return Err(invalid(format!("edge ({a}, {b}) has non-finite weight")));
            }
            if w > 0.0 {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                edges.push(Edge { i, j, weight: w });
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = edges.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(invalid(format!("duplicate edge ({}, {})", w[0].i, w[0].j)));
        }
        Ok(Graph {
            n,
            edges,
            diagonal: vec![0.0; n],
            variant: Variant::Raw,
        })
    }

    /// Builds a raw graph from the strictly upper triangle of a dense
    /// symmetric matrix, keeping entries above `threshold`.
    pub fn from_dense_upper(w: ArrayView2<'_, f64>, threshold: f64) -> Self {
        let n = w.nrows();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = w[[i, j]];
                if v > threshold && v > 0.0 {
                    edges.push(Edge { i, j, weight: v });
                }
            }
        }
        Graph {
            n,
            edges,
            diagonal: vec![0.0; n],
            variant: Variant::Raw,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Weighted degree `Σ_j W[i, j]`, self-loop included.
    pub fn degrees(&self) -> Array1<f64> {
        let mut d = Array1::from_vec(self.diagonal.clone());
        for e in &self.edges {
            d[e.i] += e.weight;
            d[e.j] += e.weight;
        }
        d
    }

    /// Number of incident edges per vertex, self-loops excluded.
    pub fn neighbor_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for e in &self.edges {
            c[e.i] += 1;
            c[e.j] += 1;
        }
        c
    }

    /// Mean number of neighbors per vertex.
    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    /// Rewrites a raw graph into `target`. Returns the normalized graph and the
    /// number of zero-degree vertices whose rows were left at zero.
    pub fn normalize(&self, target: Variant) -> Result<(Graph, usize)> {
        if self.variant != Variant::Raw {
            return Err(Error::NotRaw(self.variant.name()));
        }
        let mut g = self.clone();
        if target.augments() {
            g.diagonal.iter_mut().for_each(|d| *d += 1.0);
        }
        let mut isolated = 0;
        if target.normalizes() {
            let deg = g.degrees();
            let inv_sqrt: Vec<f64> = deg
                .iter()
                .map(|&d| {
                    if d > 0.0 {
                        1.0 / d.sqrt()
                    } else {
                        isolated += 1;
                        0.0
                    }
                })
                .collect();
            for e in g.edges.iter_mut() {
                e.weight *= inv_sqrt[e.i] * inv_sqrt[e.j];
            }
            for (i, d) in g.diagonal.iter_mut().enumerate() {
                *d *= inv_sqrt[i] * inv_sqrt[i];
            }
            g.edges.retain(|e| e.weight > 0.0);
        }
        g.variant = target;
        Ok((g, isolated))
    }

    /// Dense adjacency, self-loops on the diagonal.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut w = Array2::zeros((self.n, self.n));
        for (i, &d) in self.diagonal.iter().enumerate() {
            w[[i, i]] = d;
        }
        for e in &self.edges {
            w[[e.i, e.j]] = e.weight;
            w[[e.j, e.i]] = e.weight;
        }
        w
    }

    /// Dense combinatorial Laplacian `L = D − W`.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = Array2::zeros((self.n, self.n));
        for e in &self.edges {
            l[[e.i, e.j]] -= e.weight;
            l[[e.j, e.i]] -= e.weight;
            l[[e.i, e.i]] += e.weight;
            l[[e.j, e.j]] += e.weight;
        }
        // self-loops add to both D and W and cancel
        l
    }

    /// Sparse product `W · X`.
    pub fn multiply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} vertices, signal has {} rows",
                self.n,
                x.nrows()
            )));
        }
        let mut out = Array2::zeros(x.raw_dim());
        for (i, &d) in self.diagonal.iter().enumerate() {
            if d != 0.0 {
                out.row_mut(i).scaled_add(d, &x.row(i));
            }
        }
        for e in &self.edges {
            out.row_mut(e.i).scaled_add(e.weight, &x.row(e.j));
            out.row_mut(e.j).scaled_add(e.weight, &x.row(e.i));
        }
        Ok(out)
    }

    /// Connected-component label per vertex, numbered by first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut out = vec![0; self.n];
        for v in 0..self.n {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            out[v] = label[r];
        }
        out
    }

    /// Edges restricted to weights strictly above `sigma`.
    pub fn pruned(&self, sigma: f64) -> Graph {
        let mut g = self.clone();
        g.edges.retain(|e| e.weight > sigma);
        g
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (perm[e.i], perm[e.j]);
                Edge {
                    i: a.min(b),
                    j: a.max(b),
                    weight: e.weight,
                }
            })
            .collect();
        edges.sort_by_key(|e| (e.i, e.j));
        let mut diagonal = vec![0.0; self.n];
        for (v, &d) in self.diagonal.iter().enumerate() {
            diagonal[perm[v]] = d;
        }
        Graph {
            n: self.n,
            edges,
            diagonal,
            variant: self.variant,
        }
    }

    pub fn write_tsv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "#n={} variant={}", self.n, self.variant.name())?;
        // diagonal entries interleave with edges in row order
        let mut e = self.edges.iter().peekable();
        for i in 0..self.n {
            if self.diagonal[i] != 0.0 {
                writeln!(out, "{i}\t{i}\t{}", self.diagonal[i])?;
            }
            while let Some(edge) = e.next_if(|edge| edge.i == i) {
                writeln!(out, "{}\t{}\t{}", edge.i, edge.j, edge.weight)?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_tsv(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn read_tsv(reader: impl BufRead, source: &str) -> Result<Graph> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: source.to_string(),
            line,
            message,
        };
        let mut lines = reader.lines().enumerate();
        let (n, variant) = match lines.next() {
            Some((_, header)) => parse_header(&header?).map_err(|m| parse_err(1, m))?,
            None => return Err(parse_err(1, "missing header".into())),
        };
        let mut diagonal = vec![0.0; n];
        let mut triples = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(parse_err(lineno, format!("expected 3 tab-separated fields, got {}", fields.len())));
            }
            let i: usize = fields[0].trim().parse().map_err(|_| parse_err(lineno, "bad row index".into()))?;
            let j: usize = fields[1].trim().parse().map_err(|_| parse_err(lineno, "bad column index".into()))?;
            let w: f64 = fields[2].trim().parse().map_err(|_| parse_err(lineno, "bad weight".into()))?;
            if i >= n || j >= n {
                return Err(parse_err(lineno, format!("index out of range for n={n}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(parse_err(lineno, "weight must be finite and non-negative".into()));
            }
            if i == j {
                diagonal[i] = w;
            } else if i < j {
                triples.push((i, j, w));
            } else {
                return Err(parse_err(lineno, "edges must satisfy i < j".into()));
            }
        }
        let mut g = Graph::from_edges(n, triples).map_err(|e| parse_err(0, e.to_string()))?;
        if matches!(variant, Variant::Raw | Variant::SymNorm) && diagonal.iter().any(|&d| d != 0.0) {
            return Err(parse_err(0, format!("variant {variant} cannot carry self-loops")));
        }
        g.diagonal = diagonal;
        g.variant = variant;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Graph::read_tsv(f, &path.display().to_string())
    }
}

fn parse_header(header: &str) -> std::result::Result<(usize, Variant), String> {
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| "header must start with `#`".to_string())?;
    let mut n = None;
    let mut variant = None;
    for token in body.split_whitespace() {
        match token.split_once('=') {
            Some(("n", v)) => n = Some(v.parse::<usize>().map_err(|_| format!("bad vertex count `{v}`"))?),
            Some(("variant", v)) => variant = Some(v.parse::<Variant>().map_err(|e| e.to_string())?),
            _ => return Err(format!("unexpected header token `{token}`")),
        }
    }
    Ok((
        n.ok_or("header lacks n=")?,
        variant.unwrap_or(Variant::Raw),
    ))
}
