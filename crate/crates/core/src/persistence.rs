//! Vietoris–Rips persistent homology over the two-element field.
//!
//! The filtration is the clique complex of the threshold graphs
//! `{(i, j) : D_ij <= t}`: every clique enters at its diameter. Simplices are
//! ordered by (value, dimension, reverse lexicographic vertex tuple), which puts faces
//! before cofaces. Barcodes come from the standard column reduction of the
//! boundary matrix, run from the top dimension down so that every pivot found
//! in dimension `d + 1` clears the matching column of dimension `d`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;

pub const DEFAULT_SIMPLEX_CAP: usize = 50_000_000;

/// One simplex of a filtration.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    value: f64,
    /// Vertex tuple read as base-`n` digits; numeric order is lexicographic
    /// order within one dimension.
    key: u64,
    dim: u8,
}

/// Simplices up to dimension `max_dim + 1`, in filtration order.
#[derive(Clone, Debug)]
pub struct Filtration {
    n: usize,
    max_dim: usize,
    threshold: f64,
    /// Every pair of points is joined by the final threshold.
    complete: bool,
    entries: Vec<Entry>,
}

impl Filtration {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    fn decode(&self, e: &Entry) -> Vec<usize> {
        let n = self.n as u64;
        let mut key = e.key;
        let mut v = vec![0; e.dim as usize + 1];
        for slot in v.iter_mut().rev() {
            *slot = (key % n) as usize;
            key /= n;
        }
        v
    }

    pub fn simplex(&self, i: usize) -> Simplex {
        let e = &self.entries[i];
        Simplex { vertices: self.decode(e), value: e.value }
    }

    pub fn iter(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.len()).map(|i| self.simplex(i))
    }

    /// Number of simplices of each dimension `0..=max_dim + 1`.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 2];
        for e in &self.entries {
            counts[e.dim as usize] += 1;
        }
        counts
    }
}

fn encode(vertices: &[usize], n: u64) -> u64 {
    vertices.iter().fold(0u64, |acc, &v| acc * n + v as u64)
}

/// Builds the Rips filtration of `d` up to dimension `max_dim + 1`, keeping
/// cliques of diameter at most `t_max` (default: the largest finite entry).
pub fn build_filtration(d: &DistanceMatrix, max_dim: usize, t_max: Option<f64>) -> Result<Filtration> {
    build_filtration_capped(d, max_dim, t_max, DEFAULT_SIMPLEX_CAP)
}

pub fn build_filtration_capped(
    d: &DistanceMatrix,
    max_dim: usize,
    t_max: Option<f64>,
    cap: usize,
) -> Result<Filtration> {
    let n = d.len();
    let threshold = t_max.unwrap_or_else(|| d.max_finite());
    if threshold.is_nan() {
        return Err(Error::InvalidArgument("t_max is NaN".into()));
    }
    let top = max_dim + 1;
    let fits = (n as u128).checked_pow(top as u32 + 1).is_some_and(|v| v <= u64::MAX as u128);
    if !fits && n > 1 {
        return Err(Error::ResourceCap(format!("{n} points in dimension {top} overflow simplex keys")));
    }
    let base = n.max(1) as u64;

    // Higher-indexed neighbours within the threshold.
    let up: Vec<Vec<usize>> = (0..n)
        .map(|i| ((i + 1)..n).filter(|&j| d.get(i, j) <= threshold).collect())
        .collect();

    let mut entries: Vec<Entry> = Vec::new();
    let mut clique = Vec::with_capacity(top + 1);
    for v in 0..n {
        entries.push(Entry { value: 0.0, key: v as u64, dim: 0 });
        if top >= 1 {
            clique.clear();
            clique.push(v);
            extend_cliques(d, &up, &mut clique, &up[v], 0.0, top, base, &mut entries, cap)?;
        }
        if entries.len() > cap {
            return Err(cap_error(cap));
        }
    }
    entries.sort_by(|a, b| {
        a.value.total_cmp(&b.value).then(a.dim.cmp(&b.dim)).then(b.key.cmp(&a.key))
    });
    let complete = (0..n).all(|i| up[i].len() == n - i - 1);
    Ok(Filtration { n, max_dim, threshold, complete, entries })
}

fn cap_error(cap: usize) -> Error {
    Error::ResourceCap(format!("filtration exceeds {cap} simplices; lower max_dim or t_max"))
}

#[allow(clippy::too_many_arguments)]
fn extend_cliques(
    d: &DistanceMatrix,
    up: &[Vec<usize>],
    clique: &mut Vec<usize>,
    candidates: &[usize],
    value: f64,
    top: usize,
    base: u64,
    entries: &mut Vec<Entry>,
    cap: usize,
) -> Result<()> {
    for (k, &w) in candidates.iter().enumerate() {
        let v = clique.iter().fold(value, |acc, &u| acc.max(d.get(u, w)));
        clique.push(w);
        entries.push(Entry { value: v, key: encode(clique, base), dim: (clique.len() - 1) as u8 });
        if entries.len() > cap {
            return Err(cap_error(cap));
        }
        if clique.len() <= top {
            let next: Vec<usize> = candidates[k + 1..].iter().copied().filter(|x| up[w].binary_search(x).is_ok()).collect();
            if !next.is_empty() {
                extend_cliques(d, up, clique, &next, v, top, base, entries, cap)?;
            }
        }
        clique.pop();
    }
    Ok(())
}

/// Half-open interval `[birth, death)`; `death == None` means it never dies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub birth: f64,
    pub death: Option<f64>,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.death.map_or(f64::INFINITY, |d| d - self.birth)
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_none()
    }

    fn sort_key(&self) -> (f64, f64) {
        (self.birth, self.death.unwrap_or(f64::INFINITY))
    }
}

/// Intervals per homology dimension `0..=max_dim`, each list sorted by
/// (birth, death).
#[derive(Clone, Debug, PartialEq)]
pub struct Barcode {
    pub dims: Vec<Vec<Interval>>,
}

#[derive(Serialize, Deserialize)]
struct DimBars {
    dim: usize,
    bars: Vec<(f64, Option<f64>)>,
}

impl Barcode {
    pub fn dim(&self, i: usize) -> &[Interval] {
        self.dims.get(i).map_or(&[], Vec::as_slice)
    }

    pub fn max_dim(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    /// Drops intervals with `birth == death`.
    pub fn without_zero_length(&self) -> Barcode {
        Barcode {
            dims: self
                .dims
                .iter()
                .map(|bars| bars.iter().copied().filter(|iv| iv.death != Some(iv.birth)).collect())
                .collect(),
        }
    }

    /// Bars at least `fraction` as long as the longest bar of their
    /// dimension. Infinite bars count as longest.
    pub fn long_bars(&self, dim: usize, fraction: f64) -> Vec<Interval> {
        let bars = self.dim(dim);
        let longest = bars.iter().map(Interval::length).fold(0.0, f64::max);
        bars.iter().copied().filter(|b| b.length() >= fraction * longest && b.length() > 0.0).collect()
    }

    /// `[{"dim": i, "bars": [[birth, death-or-null], ...]}, ...]`
    pub fn to_json(&self) -> String {
        let dims: Vec<DimBars> = self
            .dims
            .iter()
            .enumerate()
            .map(|(dim, bars)| DimBars { dim, bars: bars.iter().map(|b| (b.birth, b.death)).collect() })
            .collect();
        serde_json::to_string(&dims).expect("barcode serializes")
    }

    pub fn from_json(s: &str) -> Result<Barcode> {
        let parsed: Vec<DimBars> = serde_json::from_str(s)?;
        let max = parsed.iter().map(|d| d.dim + 1).max().unwrap_or(0);
        let mut dims = vec![Vec::new(); max];
        for d in parsed {
            dims[d.dim] = d.bars.into_iter().map(|(birth, death)| Interval { birth, death }).collect();
        }
        Ok(Barcode { dims })
    }

    /// Plain-text table, one bar per line.
    pub fn write_table<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "dim\tbirth\tdeath")?;
        for (dim, bars) in self.dims.iter().enumerate() {
            for b in bars {
                match b.death {
                    Some(d) => writeln!(sink, "{dim}\t{}\t{d}", b.birth)?,
                    None => writeln!(sink, "{dim}\t{}\tinf", b.birth)?,
                }
            }
        }
        Ok(())
    }
}

const NONE: u32 = u32::MAX;

/// Working column of the reduction: a bitmap over the rows of one dimension.
struct Accumulator {
    words: Vec<u64>,
}

impl Accumulator {
    fn new(rows: usize) -> Self {
        Accumulator { words: vec![0; rows.div_ceil(64)] }
    }

    fn flip(&mut self, row: u32) {
        self.words[row as usize / 64] ^= 1 << (row % 64);
    }

    /// Highest set row at or below `from`.
    fn highest_from(&self, from: u32) -> Option<u32> {
        let mut w = from as usize / 64;
        let shift = 63 - from % 64;
        let mut word = (self.words[w] << shift) >> shift;
        loop {
            if word != 0 {
                return Some((w * 64 + 63 - word.leading_zeros() as usize) as u32);
            }
            if w == 0 {
                return None;
            }
            w -= 1;
            word = self.words[w];
        }
    }

    /// Set rows in ascending order up to `last`; clears the bitmap.
    fn drain(&mut self, last: u32) -> Vec<u32> {
        let mut out = Vec::new();
        for (w, word) in self.words[..=last as usize / 64].iter_mut().enumerate() {
            while *word != 0 {
                let bit = word.trailing_zeros();
                out.push((w * 64) as u32 + bit);
                *word &= *word - 1;
            }
        }
        out
    }
}

/// Persistence pairs by column reduction with clearing.
pub fn compute_barcodes(f: &Filtration) -> Result<Barcode> {
    let total = f.len();
    if total >= NONE as usize {
        return Err(Error::ResourceCap("filtration too large to index".into()));
    }
    let top = f.max_dim + 1;
    let base = f.n.max(1) as u64;

    // Filtration positions per dimension; rows and columns of one boundary
    // matrix are indexed by rank within their dimension.
    let mut positions: Vec<Vec<u32>> = vec![Vec::new(); top + 1];
    for (pos, e) in f.entries.iter().enumerate() {
        positions[e.dim as usize].push(pos as u32);
    }
    let rank_tables: Vec<Vec<(u64, u32)>> = positions
        .iter()
        .map(|list| {
            let mut table: Vec<(u64, u32)> =
                list.iter().enumerate().map(|(rank, &pos)| (f.entries[pos as usize].key, rank as u32)).collect();
            table.sort_unstable();
            table
        })
        .collect();
    let rank_of = |dim: usize, key: u64| -> u32 {
        let table = &rank_tables[dim];
        let idx = table.binary_search_by_key(&key, |&(k, _)| k).expect("face present in filtration");
        table[idx].1
    };

    // killer[pos] = filtration position of the simplex that kills `pos`.
    let mut killer = vec![NONE; total];
    let mut negative = vec![false; total];
    // cleared[rank] for the dimension about to be reduced.
    let mut cleared = vec![false; positions[top].len()];

    // When the last complex is a full simplex skeleton its homology is known
    // (one component, nothing else), so the number of classes the top
    // dimension must kill follows from the simplex counts alone and the
    // top-dimension pass can stop once that many pivots are found.
    let mut top_budget = f.complete.then(|| {
        let counts = f.counts_by_dim();
        let mut negative_count = 0;
        let mut positive_count = counts[0];
        for &c in counts.iter().take(top).skip(1) {
            negative_count = positive_count - usize::from(negative_count == 0 && positive_count > 0);
            positive_count = c - negative_count;
        }
        positive_count - usize::from(top == 1 && positive_count > 0)
    });

    let mut verts = Vec::with_capacity(top + 1);
    let mut face = Vec::with_capacity(top);
    for dim in (1..=top).rev() {
        let rows = positions[dim - 1].len();
        let mut acc = Accumulator::new(rows);
        let mut pivot_owner = vec![NONE; rows];
        let mut reduced: Vec<Vec<u32>> = Vec::new();
        let mut cleared_below = vec![false; rows];
        for (rank, &col) in positions[dim].iter().enumerate() {
            if dim == top && top_budget == Some(0) {
                break;
            }
            if cleared[rank] {
                continue;
            }
            verts.clear();
            verts.extend(f.decode(&f.entries[col as usize]));
            let mut low = 0;
            for skip in 0..verts.len() {
                face.clear();
                face.extend(verts.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v));
                let row = rank_of(dim - 1, encode(&face, base));
                acc.flip(row);
                low = low.max(row);
            }
            let mut current = Some(low);
            while let Some(low) = current {
                let owner = pivot_owner[low as usize];
                if owner == NONE {
                    break;
                }
                for &row in &reduced[owner as usize] {
                    acc.flip(row);
                }
                current = acc.highest_from(low);
            }
            if let Some(low) = current {
                pivot_owner[low as usize] = reduced.len() as u32;
                reduced.push(acc.drain(low));
                let row_pos = positions[dim - 1][low as usize];
                killer[row_pos as usize] = col;
                negative[col as usize] = true;
                cleared_below[low as usize] = true;
                if dim == top {
                    top_budget = top_budget.map(|b| b - 1);
                }
            }
        }
        cleared = cleared_below;
    }

    let mut dims = vec![Vec::new(); f.max_dim + 1];
    for (pos, e) in f.entries.iter().enumerate() {
        let dim = e.dim as usize;
        if dim > f.max_dim || negative[pos] {
            continue;
        }
        let death = match killer[pos] {
            NONE => None,
            k => Some(f.entries[k as usize].value),
        };
        dims[dim].push(Interval { birth: e.value, death });
    }
    for bars in &mut dims {
        bars.sort_by(|a, b| {
            let (ab, ad) = a.sort_key();
            let (bb, bd) = b.sort_key();
            ab.total_cmp(&bb).then(ad.total_cmp(&bd))
        });
    }
    Ok(Barcode { dims })
}

/// Filtration plus reduction in one call.
pub fn barcodes(d: &DistanceMatrix, max_dim: usize, t_max: Option<f64>) -> Result<Barcode> {
    compute_barcodes(&build_filtration(d, max_dim, t_max)?)
}
