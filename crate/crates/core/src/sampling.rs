//! Sample families on circles and tori spanned by anchor vectors.
//!
//! A circle is `offset + sin(θ) A1 + cos(θ) A2`; a torus curve family is
//! `A5 + α (sin θ1 A1 + cos θ1 A2 + sin θ2 A3 + cos θ2 A4)`. Anchors are
//! arbitrary flattened tensors of the network's input length.

use std::f64::consts::TAU;
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

#[derive(Clone, Debug, PartialEq)]
pub struct AnchorFamily {
    anchors: Vec<Vec<f64>>,
    /// Index of the anchor used as additive center.
    offset_index: Option<usize>,
}

impl AnchorFamily {
    pub fn new(anchors: Vec<Vec<f64>>, offset_index: Option<usize>) -> Result<Self> {
        if anchors.is_empty() || anchors.len() > 5 {
            return Err(Error::InvalidArgument(format!("expected 1 to 5 anchors, got {}", anchors.len())));
        }
        let len = anchors[0].len();
        if len == 0 {
            return Err(Error::InvalidArgument("anchors are empty".into()));
        }
        if let Some(bad) = anchors.iter().find(|a| a.len() != len) {
            return Err(Error::Dimension { expected: len, actual: bad.len() });
        }
        if let Some(i) = offset_index {
            if i >= anchors.len() {
                return Err(Error::InvalidArgument(format!("offset anchor {i} does not exist")));
            }
        }
        Ok(AnchorFamily { anchors, offset_index })
    }

    pub fn dim(&self) -> usize {
        self.anchors[0].len()
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    /// Anchors other than the offset, in order.
    fn directions(&self) -> Vec<&[f64]> {
        self.anchors
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != self.offset_index)
            .map(|(_, a)| a.as_slice())
            .collect()
    }

    fn offset(&self) -> Vec<f64> {
        self.offset_index.map_or_else(|| vec![0.0; self.dim()], |i| self.anchors[i].clone())
    }

    /// True when all pairs satisfy `|<a, b>| <= 1e-6 |a| |b|`.
    pub fn is_orthogonal(&self) -> bool {
        let a = &self.anchors;
        (0..a.len()).all(|i| (0..i).all(|j| dot(&a[i], &a[j]).abs() <= 1e-6 * norm(&a[i]) * norm(&a[j])))
    }
}

/// `count` evenly spaced angles on `[t0, t1)`.
fn angles(count: usize, t0: f64, t1: f64) -> Vec<f64> {
    (0..count).map(|k| t0 + k as f64 * (t1 - t0) / count as f64).collect()
}

/// `offset + sin(θ_k) A1 + cos(θ_k) A2` for `θ_k = t0 + k (t1 - t0) / count`.
pub fn circle_samples(family: &AnchorFamily, count: usize, theta_range: (f64, f64)) -> Result<Vec<Vec<f64>>> {
    let dirs = family.directions();
    if dirs.len() < 2 {
        return Err(Error::InvalidArgument("a circle needs two direction anchors".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let offset = family.offset();
    Ok(angles(count, theta_range.0, theta_range.1)
        .into_iter()
        .map(|t| {
            let (s, c) = t.sin_cos();
            (0..offset.len()).map(|i| offset[i] + s * dirs[0][i] + c * dirs[1][i]).collect()
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TorusLayout {
    /// `n1 x n2` product of evenly spaced angles.
    Grid,
    /// `n1 * n2` i.i.d. uniform angle pairs.
    Uniform,
}

fn torus_point(offset: &[f64], dirs: &[&[f64]], alpha: f64, t1: f64, t2: f64) -> Vec<f64> {
    let (s1, c1) = t1.sin_cos();
    let (s2, c2) = t2.sin_cos();
    (0..offset.len())
        .map(|i| offset[i] + alpha * (s1 * dirs[0][i] + c1 * dirs[1][i] + s2 * dirs[2][i] + c2 * dirs[3][i]))
        .collect()
}

fn torus_parts(family: &AnchorFamily) -> Result<(Vec<f64>, Vec<&[f64]>)> {
    let dirs = family.directions();
    if family.anchors.len() != 5 || family.offset_index.is_none() || dirs.len() != 4 {
        return Err(Error::InvalidArgument("a torus needs four direction anchors plus an offset anchor".into()));
    }
    Ok((family.offset(), dirs))
}

/// Grid over `[0, 2π)^2`, `θ1` varying slowest.
pub fn torus_samples(family: &AnchorFamily, grid: (usize, usize), alpha: f64) -> Result<Vec<Vec<f64>>> {
    let (offset, dirs) = torus_parts(family)?;
    let (n1, n2) = grid;
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument("grid sizes must be positive".into()));
    }
    let mut out = Vec::with_capacity(n1 * n2);
    for t1 in angles(n1, 0.0, TAU) {
        for t2 in angles(n2, 0.0, TAU) {
            out.push(torus_point(&offset, &dirs, alpha, t1, t2));
        }
    }
    Ok(out)
}

/// `count` points with independent uniform angles.
pub fn torus_samples_uniform(family: &AnchorFamily, count: usize, alpha: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (offset, dirs) = torus_parts(family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let t1 = TAU * rng.random::<f64>();
            let t2 = TAU * rng.random::<f64>();
            torus_point(&offset, &dirs, alpha, t1, t2)
        })
        .collect())
}

/// `count` orthonormal vectors in `R^dim`: Gram–Schmidt on seeded Gaussian draws.
pub fn random_orthogonal_anchors(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count > dim {
        return Err(Error::InvalidArgument(format!("cannot fit {count} orthogonal vectors in dimension {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    Ok(basis)
}

/// `{"points": [[...], ...]}`, used for sample dumps and anchor files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn load<R: Read>(source: R) -> Result<Self> {
        let set: PointSet = serde_json::from_reader(source)?;
        if let Some(first) = set.points.first() {
            if let Some(bad) = set.points.iter().find(|p| p.len() != first.len()) {
                return Err(Error::Dimension { expected: first.len(), actual: bad.len() });
            }
        }
        if set.points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite coordinate".into()));
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("points serialize")
    }
}
