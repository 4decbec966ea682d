//! Distance matrices over activation patterns (and plain point clouds), plus
//! the lower-triangular text format consumed by persistence tools.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::network::BitVector;

/// Hollow, symmetric, non-negative `N x N` matrix with one label per row.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
    labels: Vec<String>,
}

impl DistanceMatrix {
    /// Builds from a row-major buffer, validating hollowness, symmetry and
    /// non-negativity. `+inf` entries are allowed (never connected).
    pub fn new(n: usize, data: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension { expected: n * n, actual: data.len() });
        }
        if labels.len() != n {
            return Err(Error::Dimension { expected: n, actual: labels.len() });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if a.is_nan() || a < 0.0 {
                    return Err(Error::InvalidArgument(format!("entry ({i},{j}) = {a} is not a distance")));
                }
                if a != b {
                    return Err(Error::InvalidArgument(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(DistanceMatrix { n, data, labels })
    }

    /// [`DistanceMatrix::new`] with labels `0..n`.
    pub fn from_square(n: usize, data: Vec<f64>) -> Result<Self> {
        DistanceMatrix::new(n, data, default_labels(n))
    }

    /// Fills the strict lower triangle from `f(i, j)` with `j < i`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| (0..i).map(|j| f(i, j)).collect()).collect();
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DistanceMatrix::new(n, data, default_labels(n))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Dimension { expected: self.n, actual: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Largest finite entry (0 for matrices with fewer than two points).
    pub fn max_finite(&self) -> f64 {
        self.data.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)
    }

    /// Sorted distinct off-diagonal values.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Edges `(j, i)`, `j < i`, of the graph with adjacency `D_ij <= t`.
    pub fn threshold_graph(&self, t: f64) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (0..i).map(move |j| (j, i)))
            .filter(|&(j, i)| self.get(i, j) <= t)
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        DistanceMatrix::new(self.n, self.data.iter().map(|v| v * factor).collect(), self.labels.clone())
    }

    /// Lower-triangular CSV: line `i` (from 1) holds `D[i][0..i]`.
    pub fn write_lower<W: Write>(&self, mut sink: W) -> Result<()> {
        for i in 1..self.n {
            let row: Vec<String> = (0..i).map(|j| format_entry(self.get(i, j))).collect();
            writeln!(sink, "{}", row.join(","))?;
        }
        sink.flush()?;
        Ok(())
    }

    pub fn read_lower<R: BufRead>(source: R) -> Result<Self> {
        let mut lines: Vec<String> = source.lines().collect::<std::io::Result<_>>()?;
        while lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }
        let n = lines.len() + 1;
        let mut data = vec![0.0; n * n];
        for (k, line) in lines.iter().enumerate() {
            let i = k + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != i {
                return Err(Error::ParseLine {
                    line: k + 1,
                    message: format!("expected {i} entries, found {}", fields.len()),
                });
            }
            for (j, f) in fields.iter().enumerate() {
                let v = parse_entry(f).ok_or_else(|| Error::ParseLine {
                    line: k + 1,
                    message: format!("invalid distance {f:?}"),
                })?;
                if v.is_nan() || v < 0.0 {
                    return Err(Error::ParseLine { line: k + 1, message: format!("negative or NaN distance {f:?}") });
                }
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DistanceMatrix::new(n, data, default_labels(n))
    }

    /// Full square CSV, one row per line.
    pub fn read_square<R: BufRead>(source: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (k, line) in source.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| parse_entry(f.trim()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::ParseLine { line: k + 1, message: "invalid number".into() })?;
            rows.push(row);
        }
        let n = rows.len();
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::ParseLine { line: k + 1, message: format!("expected {n} entries, found {}", r.len()) });
        }
        DistanceMatrix::new(n, rows.concat(), default_labels(n))
    }

    pub fn write_square<W: Write>(&self, mut sink: W) -> Result<()> {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format_entry(self.get(i, j))).collect();
            writeln!(sink, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Shortest representation that parses back to the same double.
fn format_entry(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn parse_entry(s: &str) -> Option<f64> {
    match s {
        "inf" | "Inf" | "infinity" => Some(f64::INFINITY),
        _ => s.parse().ok().filter(|v: &f64| !v.is_infinite()),
    }
}

pub fn hamming(a: &BitVector, b: &BitVector) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), actual: b.len() });
    }
    Ok(a.hamming(b))
}

/// Distinct vectors in first-occurrence order, and each input's index into them.
pub fn dedup_bitvectors(vectors: &[BitVector]) -> Result<(Vec<BitVector>, Vec<usize>)> {
    check_lengths(vectors)?;
    let mut index: HashMap<&BitVector, usize> = HashMap::new();
    let mut distinct = Vec::new();
    let mut assignment = Vec::with_capacity(vectors.len());
    for v in vectors {
        let next = distinct.len();
        let slot = *index.entry(v).or_insert_with(|| {
            distinct.push(v.clone());
            next
        });
        assignment.push(slot);
    }
    Ok((distinct, assignment))
}

fn check_lengths(vectors: &[BitVector]) -> Result<()> {
    if let Some(first) = vectors.first() {
        if let Some(bad) = vectors.iter().find(|v| v.len() != first.len()) {
            return Err(Error::Dimension { expected: first.len(), actual: bad.len() });
        }
    }
    Ok(())
}

/// Pairwise Hamming distances. With `deduplicate`, rows are the distinct
/// vectors labelled by the index of their first occurrence.
pub fn hamming_matrix(vectors: &[BitVector], deduplicate: bool) -> Result<DistanceMatrix> {
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("no bit vectors".into()));
    }
    check_lengths(vectors)?;
    let (rows, labels): (Vec<BitVector>, Vec<String>) = if deduplicate {
        let (distinct, assignment) = dedup_bitvectors(vectors)?;
        let mut first = vec![usize::MAX; distinct.len()];
        for (i, &a) in assignment.iter().enumerate() {
            first[a] = first[a].min(i);
        }
        (distinct, first.iter().map(usize::to_string).collect())
    } else {
        (vectors.to_vec(), default_labels(vectors.len()))
    };
    DistanceMatrix::from_fn(rows.len(), |i, j| rows[i].hamming(&rows[j]) as f64)?.with_labels(labels)
}

/// Euclidean distances between points.
pub fn euclidean_matrix(points: &[Vec<f64>]) -> Result<DistanceMatrix> {
    if let Some(first) = points.first() {
        if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
            return Err(Error::Dimension { expected: first.len(), actual: bad.len() });
        }
    }
    DistanceMatrix::from_fn(points.len(), |i, j| {
        let d: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| a - b).collect();
        linalg::norm(&d)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CombineOp {
    Min,
    Max,
}

/// Entrywise min or max. Under thresholding, max keeps an edge only when
/// both inputs do (AND); min keeps it when either does (OR).
pub fn combine(d1: &DistanceMatrix, d2: &DistanceMatrix, op: CombineOp) -> Result<DistanceMatrix> {
    if d1.n != d2.n {
        return Err(Error::Dimension { expected: d1.n, actual: d2.n });
    }
    if d1.labels != d2.labels {
        return Err(Error::InvalidArgument("matrices have different labels".into()));
    }
    let f = match op {
        CombineOp::Min => f64::min,
        CombineOp::Max => f64::max,
    };
    let data = d1.data.iter().zip(&d2.data).map(|(&a, &b)| f(a, b)).collect();
    DistanceMatrix::new(d1.n, data, d1.labels.clone())
}
