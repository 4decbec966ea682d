//! Helpers shared by the integration tests: random inputs and independent
//! reference implementations.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use relu_atlas::linalg::Matrix;
use relu_atlas::network::Layer;
use relu_atlas::{DistanceMatrix, NetworkSpec};

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian weights and biases, hidden `widths`, one output node.
pub fn random_net(rng: &mut impl Rng, input_dim: usize, widths: &[usize]) -> NetworkSpec {
    let mut layers = Vec::new();
    let mut prev = input_dim;
    for &w in widths.iter().chain(std::iter::once(&1)) {
        let data = (0..w * prev).map(|_| gaussian(rng)).collect();
        let bias = (0..w).map(|_| gaussian(rng)).collect();
        layers.push(Layer::new(Matrix::from_flat(w, prev, data), bias));
        prev = w;
    }
    NetworkSpec::new(input_dim, layers).unwrap()
}

/// Hollow symmetric matrix with integer entries in `1..=max`.
pub fn random_int_matrix(rng: &mut impl Rng, n: usize, max: u32) -> DistanceMatrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let v = f64::from(rng.random_range(1..=max));
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    DistanceMatrix::from_square(n, data).unwrap()
}

/// Hollow symmetric matrix with uniform entries in `(0, 1)`.
pub fn random_real_matrix(rng: &mut impl Rng, n: usize) -> DistanceMatrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let v: f64 = rng.random_range(0.001..1.0);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    DistanceMatrix::from_square(n, data).unwrap()
}

pub type Bars = Vec<Vec<(f64, Option<f64>)>>;

/// Textbook persistence: every clique of diameter `<= t_max` up to dimension
/// `max_dim + 1`, ordered by (value, dimension, vertex list), full boundary
/// matrix reduced left to right without clearing. Bars sorted per dimension.
pub fn naive_barcode(d: &DistanceMatrix, max_dim: usize, t_max: Option<f64>) -> Bars {
    let n = d.len();
    let t = t_max.unwrap_or_else(|| d.max_finite());
    let mut simplices: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    while let Some(s) = stack.pop() {
        let value = diameter(d, &s);
        if value > t {
            continue;
        }
        if s.len() < max_dim + 2 {
            for w in s.last().unwrap() + 1..n {
                let mut next = s.clone();
                next.push(w);
                stack.push(next);
            }
        }
        simplices.push((value, s));
    }
    simplices.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.len().cmp(&b.1.len())).then(a.1.cmp(&b.1)));
    let index: std::collections::HashMap<Vec<usize>, usize> =
        simplices.iter().enumerate().map(|(i, s)| (s.1.clone(), i)).collect();

    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|(_, s)| {
            if s.len() == 1 {
                return Vec::new();
            }
            let mut col: Vec<usize> = (0..s.len())
                .map(|k| {
                    let face: Vec<usize> = s.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect();
                    index[&face]
                })
                .collect();
            col.sort_unstable();
            col
        })
        .collect();

    let mut low_owner: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match low_owner.get(&low) {
                Some(&k) => {
                    let other = columns[k].clone();
                    let mut merged: Vec<usize> = columns[j].clone();
                    for r in other {
                        match merged.binary_search(&r) {
                            Ok(p) => {
                                merged.remove(p);
                            }
                            Err(p) => merged.insert(p, r),
                        }
                    }
                    columns[j] = merged;
                }
                None => {
                    low_owner.insert(low, j);
                    break;
                }
            }
        }
    }

    let mut bars: Bars = vec![Vec::new(); max_dim + 1];
    for (i, (value, s)) in simplices.iter().enumerate() {
        let dim = s.len() - 1;
        if dim > max_dim || !columns[i].is_empty() {
            continue;
        }
        let death = low_owner.get(&i).map(|&k| simplices[k].0);
        bars[dim].push((*value, death));
    }
    for list in &mut bars {
        sort_bars(list);
    }
    bars
}

pub fn sort_bars(list: &mut [(f64, Option<f64>)]) {
    list.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then(a.1.unwrap_or(f64::INFINITY).total_cmp(&b.1.unwrap_or(f64::INFINITY)))
    });
}

pub fn diameter(d: &DistanceMatrix, s: &[usize]) -> f64 {
    let mut v: f64 = 0.0;
    for (k, &a) in s.iter().enumerate() {
        for &b in &s[..k] {
            v = v.max(d.get(a, b));
        }
    }
    v
}

pub fn as_bars(b: &relu_atlas::Barcode) -> Bars {
    b.dims.iter().map(|list| list.iter().map(|iv| (iv.birth, iv.death)).collect()).collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.parent[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Kruskal over edges with weight `<= t`: (sorted MST weights, component count).
pub fn kruskal(d: &DistanceMatrix, t: f64) -> (Vec<f64>, usize) {
    let n = d.len();
    let mut edges: Vec<(f64, usize, usize)> =
        (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| (d.get(i, j), i, j)).filter(|e| e.0 <= t).collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut uf = UnionFind::new(n);
    let mut weights = Vec::new();
    for (w, i, j) in edges {
        if uf.union(i, j) {
            weights.push(w);
        }
    }
    let components = n - weights.len();
    (weights, components)
}

/// Whether two finite diagrams are within bottleneck distance `eps`
/// (perfect matching with the diagonal allowed on both sides).
pub fn bottleneck_within(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> bool {
    let (na, nb) = (a.len(), b.len());
    // left: a_0..a_na, diag copies for b; right: b_0..b_nb, diag copies for a
    let left = na + nb;
    let mut adj = vec![Vec::new(); left];
    let close = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs() <= eps && (p.1 - q.1).abs() <= eps;
    let near_diag = |p: (f64, f64)| (p.1 - p.0) / 2.0 <= eps;
    for i in 0..na {
        for j in 0..nb {
            if close(a[i], b[j]) {
                adj[i].push(j);
            }
        }
        if near_diag(a[i]) {
            adj[i].push(nb + i);
        }
    }
    for j in 0..nb {
        if near_diag(b[j]) {
            adj[na + j].push(j);
        }
        for i in 0..na {
            adj[na + j].push(nb + i);
        }
    }
    let mut matched: Vec<Option<usize>> = vec![None; nb + na];
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], matched: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if matched[v].is_none_or(|w| augment(w, adj, seen, matched)) {
                matched[v] = Some(u);
                return true;
            }
        }
        false
    }
    (0..left).all(|u| {
        let mut seen = vec![false; nb + na];
        augment(u, &adj, &mut seen, &mut matched)
    })
}
