//! Enumeration of all linear regions, over `R^m` or inside an axis-aligned box.
//!
//! Two routes are provided. [`enumerate_brute`] tries every one of the `2^h`
//! patterns and keeps those whose system is feasible and full-dimensional.
//! [`enumerate_traverse`] starts from the region of a seed point and walks the
//! dual graph by flipping active bits until no new region appears. Both build
//! adjacency with the same facet test, so their outputs are directly
//! comparable.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{BitVector, NetworkSpec};
use crate::regions::{shares_facet, Inequalities, Region};
use crate::tolerance::Tolerances;

pub const DEFAULT_MAX_BRUTE_BITS: usize = 24;
const SEED_ATTEMPTS: usize = 100;

/// `lower <= x <= upper`, componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidArgument("box bounds must have equal, non-zero length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l >= u || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument("box needs finite lower < upper in every coordinate".into()));
        }
        Ok(BoxRegion { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        BoxRegion::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| l <= v && v <= u)
    }

    /// Rows `x_j <= upper_j`, `-x_j <= -lower_j` for each coordinate in turn.
    pub fn inequalities(&self) -> Inequalities {
        let m = self.dim();
        let mut a = Matrix::zeros(2 * m, m);
        let mut c = Vec::with_capacity(2 * m);
        for j in 0..m {
            a[(2 * j, j)] = 1.0;
            c.push(self.upper[j]);
            a[(2 * j + 1, j)] = -1.0;
            c.push(-self.lower[j]);
        }
        Inequalities { a, c }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| l + (u - l) * rng.random::<f64>()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct EnumerateOptions {
    pub tol: Tolerances,
    /// Guard for the `2^h` brute-force loop.
    pub max_brute_bits: usize,
    /// Seeds redraws of boundary seed points.
    pub rng_seed: u64,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { tol: Tolerances::default(), max_brute_bits: DEFAULT_MAX_BRUTE_BITS, rng_seed: 0 }
    }
}

/// All regions found, keyed by bit vector, plus the dual-graph edges.
#[derive(Clone, Debug)]
pub struct DecompositionAtlas {
    pub regions: BTreeMap<BitVector, Region>,
    /// Edges `(a, b)` with `a < b`.
    pub edges: BTreeSet<(BitVector, BitVector)>,
    pub bounded: bool,
}

impl DecompositionAtlas {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn bit_vectors(&self) -> impl Iterator<Item = &BitVector> {
        self.regions.keys()
    }

    pub fn boundary_flags(&self) -> impl Iterator<Item = (&BitVector, bool)> {
        self.regions.iter().map(|(b, r)| (b, r.boundary_flag))
    }

    /// Same region set and the same edges.
    pub fn same_decomposition(&self, other: &DecompositionAtlas) -> bool {
        self.regions.keys().eq(other.regions.keys()) && self.edges == other.edges
    }

    /// One JSON object per region, sorted by bit string.
    pub fn write_regions<W: Write>(&self, mut sink: W) -> Result<()> {
        for region in self.regions.values() {
            let line = AtlasLine {
                bits: region.bits.clone(),
                active_bits: region.active_bits.clone(),
                boundary_flag: region.boundary_flag,
            };
            serde_json::to_writer(&mut sink, &line)?;
            sink.write_all(b"\n")?;
        }
        Ok(())
    }

    /// One edge per line, `<bits> <bits>`, sorted.
    pub fn write_edges<W: Write>(&self, mut sink: W) -> Result<()> {
        for (a, b) in &self.edges {
            writeln!(sink, "{a} {b}")?;
        }
        Ok(())
    }
}

/// A line of the atlas region file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasLine {
    pub bits: BitVector,
    pub active_bits: Vec<usize>,
    pub boundary_flag: bool,
}

pub fn read_atlas_lines<R: BufRead>(source: R) -> Result<Vec<AtlasLine>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::ParseLine { line: i + 1, message: e.to_string() })?,
        );
    }
    Ok(out)
}

pub fn read_edges<R: BufRead>(source: R) -> Result<Vec<(BitVector, BitVector)>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            [] => continue,
            [a, b] => out.push((
                a.parse().map_err(|_| Error::ParseLine { line: i + 1, message: "bad bit string".into() })?,
                b.parse().map_err(|_| Error::ParseLine { line: i + 1, message: "bad bit string".into() })?,
            )),
            _ => {
                return Err(Error::ParseLine { line: i + 1, message: "expected two bit strings".into() });
            }
        }
    }
    Ok(out)
}

/// `Ok(None)` for patterns that do not give a full-dimensional region.
fn try_region(
    net: &NetworkSpec,
    bits: BitVector,
    bounds: Option<&BoxRegion>,
    tol: &Tolerances,
) -> Result<Option<Region>> {
    match Region::build(net, bits.clone(), bounds, tol) {
        Ok(r) => Ok(Some(r)),
        Err(Error::Infeasible | Error::Degenerate { .. }) => Ok(None),
        Err(e) => Err(Error::RegionFailure { bits: bits.to_string(), source: Box::new(e) }),
    }
}

fn check_box(net: &NetworkSpec, bounds: Option<&BoxRegion>) -> Result<()> {
    match bounds {
        Some(b) if b.dim() != net.input_dim() => {
            Err(Error::Dimension { expected: net.input_dim(), actual: b.dim() })
        }
        _ => Ok(()),
    }
}

/// Adjacency by one-bit flips and the shared-facet test.
fn adjacency(
    regions: &BTreeMap<BitVector, Region>,
    tol: &Tolerances,
) -> Result<BTreeSet<(BitVector, BitVector)>> {
    let candidates: Vec<(&Region, &Region)> = regions
        .values()
        .flat_map(|r| {
            (0..r.bits.len()).filter_map(move |k| {
                let other = r.bits.flipped(k);
                (r.bits < other).then_some((r, other))
            })
        })
        .filter_map(|(r, other)| regions.get(&other).map(|o| (r, o)))
        .collect();
    let checked: Vec<Option<(BitVector, BitVector)>> = candidates
        .par_iter()
        .map(|(a, b)| Ok(shares_facet(a, b, tol)?.then(|| (a.bits.clone(), b.bits.clone()))))
        .collect::<Result<_>>()?;
    Ok(checked.into_iter().flatten().collect())
}

/// Tries all `2^h` patterns.
pub fn enumerate_brute(
    net: &NetworkSpec,
    bounds: Option<&BoxRegion>,
    opts: &EnumerateOptions,
) -> Result<DecompositionAtlas> {
    check_box(net, bounds)?;
    let h = net.hidden_count();
    if h > opts.max_brute_bits || h >= 64 {
        return Err(Error::ResourceCap(format!(
            "brute-force enumeration over 2^{h} patterns exceeds the limit of 2^{}",
            opts.max_brute_bits.min(63)
        )));
    }
    let found: Vec<Option<Region>> = (0..1u64 << h)
        .into_par_iter()
        .map(|j| try_region(net, BitVector::from_index(h, j), bounds, &opts.tol))
        .collect::<Result<_>>()?;
    let regions: BTreeMap<BitVector, Region> =
        found.into_iter().flatten().map(|r| (r.bits.clone(), r)).collect();
    let edges = adjacency(&regions, &opts.tol)?;
    Ok(DecompositionAtlas { regions, edges, bounded: bounds.is_some() })
}

/// Region of the seed, redrawing the seed when it sits on a boundary.
fn seed_region(
    net: &NetworkSpec,
    seed: &[f64],
    bounds: Option<&BoxRegion>,
    opts: &EnumerateOptions,
) -> Result<Region> {
    if seed.len() != net.input_dim() {
        return Err(Error::Dimension { expected: net.input_dim(), actual: seed.len() });
    }
    if let Some(b) = bounds {
        if !b.contains(seed) {
            return Err(Error::Seed("seed lies outside the box".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let mut point = seed.to_vec();
    for _ in 0..SEED_ATTEMPTS {
        match crate::regions::region_of(net, &point, bounds, &opts.tol) {
            Ok(r) => return Ok(r),
            Err(Error::OnBoundary { .. } | Error::Degenerate { .. } | Error::Infeasible) => {}
            Err(e) => return Err(e),
        }
        point = match bounds {
            Some(b) => b.sample(&mut rng),
            None => seed
                .iter()
                .map(|v| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    v + 1e-3 * (1.0 + v.abs()) * g
                })
                .collect(),
        };
    }
    Err(Error::Seed(format!("no generic seed found after {SEED_ATTEMPTS} attempts")))
}

/// Walks the dual graph from the seed's region. Each region is expanded once,
/// through the flips of its active bits; box walls are never crossed. Only the
/// connected component of the seed is reached.
pub fn enumerate_traverse(
    net: &NetworkSpec,
    seed: &[f64],
    bounds: Option<&BoxRegion>,
    opts: &EnumerateOptions,
) -> Result<DecompositionAtlas> {
    check_box(net, bounds)?;
    let start = seed_region(net, seed, bounds, opts)?;
    let mut regions: BTreeMap<BitVector, Region> = BTreeMap::new();
    // Patterns already tried and found empty or lower-dimensional.
    let mut rejected: HashSet<BitVector> = HashSet::new();
    let mut edges = BTreeSet::new();
    let mut frontier: VecDeque<BitVector> = VecDeque::new();
    frontier.push_back(start.bits.clone());
    regions.insert(start.bits.clone(), start);

    while !frontier.is_empty() {
        // Expand the current frontier level; new patterns in FIFO order.
        let level: Vec<BitVector> = frontier.drain(..).collect();
        let mut fresh: Vec<BitVector> = Vec::new();
        let mut seen_fresh: BTreeSet<BitVector> = BTreeSet::new();
        for bits in &level {
            for n in regions[bits].neighbors() {
                if !regions.contains_key(&n) && !rejected.contains(&n) && seen_fresh.insert(n.clone()) {
                    fresh.push(n);
                }
            }
        }
        let built: Vec<Option<Region>> = fresh
            .par_iter()
            .map(|b| try_region(net, b.clone(), bounds, &opts.tol))
            .collect::<Result<_>>()?;
        for (bits, region) in fresh.into_iter().zip(built) {
            match region {
                Some(r) => {
                    regions.insert(bits.clone(), r);
                    frontier.push_back(bits);
                }
                None => {
                    rejected.insert(bits);
                }
            }
        }
        let pairs: Vec<(&Region, &Region)> = level
            .iter()
            .flat_map(|b| {
                let r = &regions[b];
                r.neighbors().into_iter().map(move |n| (r, n))
            })
            .filter_map(|(r, n)| regions.get(&n).map(|o| (r, o)))
            .collect();
        let found: Vec<Option<(BitVector, BitVector)>> = pairs
            .par_iter()
            .map(|(a, b)| {
                let (lo, hi) = if a.bits < b.bits { (a, b) } else { (b, a) };
                Ok(shares_facet(lo, hi, &opts.tol)?.then(|| (lo.bits.clone(), hi.bits.clone())))
            })
            .collect::<Result<_>>()?;
        edges.extend(found.into_iter().flatten());
    }
    Ok(DecompositionAtlas { regions, edges, bounded: bounds.is_some() })
}

/// Dual graph with its popcount-parity two-colouring.
#[derive(Clone, Debug)]
pub struct DualGraph {
    pub vertices: Vec<BitVector>,
    pub edges: Vec<(usize, usize)>,
    /// `true` for odd popcount.
    pub colors: Vec<bool>,
}

impl DualGraph {
    pub fn color_class_sizes(&self) -> (usize, usize) {
        let odd = self.colors.iter().filter(|&&c| c).count();
        (self.colors.len() - odd, odd)
    }

    /// Breadth-first hop counts from `from`; `None` for unreachable vertices.
    pub fn hop_distances(&self, from: usize) -> Vec<Option<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut dist = vec![None; self.vertices.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Fails loudly if any edge joins two vertices of the same parity, which
/// would mean the adjacency is wrong.
pub fn dual_graph(atlas: &DecompositionAtlas) -> Result<DualGraph> {
    let vertices: Vec<BitVector> = atlas.regions.keys().cloned().collect();
    let index: HashMap<&BitVector, usize> = vertices.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let colors: Vec<bool> = vertices.iter().map(BitVector::parity).collect();
    let mut edges = Vec::with_capacity(atlas.edges.len());
    for (a, b) in &atlas.edges {
        let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) else {
            return Err(Error::Consistency(format!("edge {a} {b} references a missing region")));
        };
        if colors[i] == colors[j] {
            return Err(Error::Consistency(format!("monochromatic dual-graph edge {a} {b}")));
        }
        edges.push((i, j));
    }
    Ok(DualGraph { vertices, edges, colors })
}
