//! Linear regions of a ReLU network.
//!
//! Fixing the activation pattern `s` turns every hidden pre-activation into an
//! affine function of the input. Writing `s'` for the sign vector (bit 1 ->
//! -1, bit 0 -> +1), layer j contributes the rows
//!
//! ```text
//! diag(s'_j) W^_j x <= diag(s'_j) (-b^_j)
//! W^_1 = W_1,  W^_j = W_j diag(s_{j-1}) W^_{j-1}
//! b^_1 = b_1,  b^_j = W_j diag(s_{j-1}) b^_{j-1} + b_j
//! ```
//!
//! and the stacked system `A x <= c` cuts out the polyhedron of inputs whose
//! pattern is `s`. Its essential rows are the facets; flipping the bit of a
//! facet row gives the neighbouring region on the other side.

use serde::{Deserialize, Serialize};

use crate::enumerate::BoxRegion;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::lp;
use crate::network::{BitVector, NetworkSpec};
use crate::tolerance::Tolerances;

/// Rows whose normal is shorter than this are treated as constant rows.
const ZERO_ROW: f64 = 1e-12;

/// Radius cap for interior witnesses of unbounded regions.
const WITNESS_CAP: f64 = 1.0;

/// `A x <= c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequalities {
    pub a: Matrix,
    pub c: Vec<f64>,
}

impl Inequalities {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn select(&self, rows: &[usize]) -> Inequalities {
        Inequalities { a: self.a.select_rows(rows), c: rows.iter().map(|&r| self.c[r]).collect() }
    }

    /// Largest violation `max_i (a_i·x - c_i)`, negative inside.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| dot(self.a.row(i), x) - self.c[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn satisfied_by(&self, x: &[f64], tol: f64) -> bool {
        self.is_empty() || self.max_violation(x) <= tol
    }
}

/// `G(x) = matrix · x + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub matrix: Matrix,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.matrix.mul_vec(x);
        for (v, o) in y.iter_mut().zip(&self.offset) {
            *v += o;
        }
        y
    }
}

/// Composed per-layer maps `(W^_j, b^_j)` for a fixed pattern.
fn composed_maps(net: &NetworkSpec, bits: &BitVector) -> Result<Vec<(Matrix, Vec<f64>)>> {
    let h = net.hidden_count();
    if bits.len() != h {
        return Err(Error::Dimension { expected: h, actual: bits.len() });
    }
    let hidden = net.hidden_layers();
    let mut maps: Vec<(Matrix, Vec<f64>)> = Vec::with_capacity(hidden.len());
    let mut offset = 0;
    for (j, layer) in hidden.iter().enumerate() {
        if j == 0 {
            maps.push((layer.weights.clone(), layer.bias.clone()));
        } else {
            let (prev_w, prev_b) = &maps[j - 1];
            let width = hidden[j - 1].width();
            let start = offset - width;
            let gated = layer.weights.mask_columns(|k| bits.get(start + k));
            let w = gated.matmul(prev_w);
            let mut b = gated.mul_vec(prev_b);
            for (v, bias) in b.iter_mut().zip(&layer.bias) {
                *v += bias;
            }
            maps.push((w, b));
        }
        offset += layer.width();
    }
    Ok(maps)
}

/// Inequality system of the pattern `bits`, rows stacked layer-major.
pub fn assemble(net: &NetworkSpec, bits: &BitVector) -> Result<Inequalities> {
    let maps = composed_maps(net, bits)?;
    let m = net.input_dim();
    let mut a = Matrix::zeros(bits.len(), m);
    let mut c = Vec::with_capacity(bits.len());
    let mut row = 0;
    for (w, b) in &maps {
        for k in 0..w.rows() {
            let sign = if bits.get(row) { -1.0 } else { 1.0 };
            for (dst, &src) in a.row_mut(row).iter_mut().zip(w.row(k)) {
                *dst = sign * src;
            }
            c.push(-sign * b[k]);
            row += 1;
        }
    }
    Ok(Inequalities { a, c })
}

/// The affine map the network computes on the region labelled `bits`.
pub fn affine_map(net: &NetworkSpec, bits: &BitVector) -> Result<AffineMap> {
    let maps = composed_maps(net, bits)?;
    let (last_w, last_b) = maps.last().expect("at least one hidden layer");
    let h = bits.len();
    let width = last_w.rows();
    let start = h - width;
    let out = net.output_layer();
    let gated = out.weights.mask_columns(|k| bits.get(start + k));
    let matrix = gated.matmul(last_w);
    let mut offset = gated.mul_vec(last_b);
    for (v, b) in offset.iter_mut().zip(&out.bias) {
        *v += b;
    }
    Ok(AffineMap { matrix, offset })
}

/// Rows of `sys` scaled to unit normals. Constant rows keep their zero normal.
fn normalized(sys: &Inequalities) -> (Inequalities, Vec<bool>) {
    let mut a = sys.a.clone();
    let mut c = sys.c.clone();
    let mut constant = vec![false; sys.len()];
    for i in 0..sys.len() {
        let n = norm(sys.a.row(i));
        if n <= ZERO_ROW {
            constant[i] = true;
            a.row_mut(i).iter_mut().for_each(|v| *v = 0.0);
        } else {
            a.row_mut(i).iter_mut().for_each(|v| *v /= n);
            c[i] /= n;
        }
    }
    (Inequalities { a, c }, constant)
}

/// Outcome of pruning a system to its facets.
#[derive(Clone, Debug, PartialEq)]
pub struct Essential {
    /// Retained row indices, ascending.
    pub rows: Vec<usize>,
    /// Chebyshev center (radius capped at 1 for unbounded regions).
    pub witness: Vec<f64>,
    pub radius: f64,
}

/// Removes redundant rows in ascending index order. Exact duplicates keep
/// their lowest-index copy. Fails with [`Error::Infeasible`] or
/// [`Error::Degenerate`] for systems that are not full-dimensional.
pub fn essentialize(sys: &Inequalities, tol: &Tolerances) -> Result<Essential> {
    let (unit, constant) = normalized(sys);
    let m = sys.a.cols();

    for i in 0..sys.len() {
        if constant[i] && sys.c[i] < -tol.lp {
            return Err(Error::Infeasible);
        }
    }
    let live: Vec<usize> = (0..sys.len()).filter(|&i| !constant[i]).collect();
    let live_sys = unit.select(&live);
    let ball = lp::inscribed_ball(&live_sys.a, &live_sys.c, None, Some(WITNESS_CAP))?
        .ok_or(Error::Infeasible)?;
    if ball.radius <= tol.dim {
        return Err(Error::Degenerate { radius: ball.radius });
    }

    let mut retained: Vec<usize> = Vec::with_capacity(live.len());
    'rows: for &i in &live {
        for &j in &retained {
            let same_normal = unit.a.row(i).iter().zip(unit.a.row(j)).all(|(x, y)| (x - y).abs() <= 1e-12);
            if same_normal && (unit.c[i] - unit.c[j]).abs() <= 1e-12 * (1.0 + unit.c[j].abs()) {
                continue 'rows;
            }
        }
        retained.push(i);
    }

    let mut k = 0;
    while k < retained.len() {
        let i = retained[k];
        let others: Vec<usize> = retained.iter().copied().filter(|&r| r != i).collect();
        let redundant = if others.is_empty() {
            false
        } else {
            lp::redundant_against(&unit.a, &unit.c, i, &others, tol.lp)?
        };
        if redundant {
            retained.remove(k);
        } else {
            k += 1;
        }
    }

    let mut witness = ball.center;
    witness.truncate(m);
    Ok(Essential { rows: retained, witness, radius: ball.radius })
}

/// A full-dimensional linear region.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub bits: BitVector,
    /// Network rows first (one per hidden node), then box rows if any.
    pub system: Inequalities,
    /// Indices of the retained rows of `system`.
    pub essential_rows: Vec<usize>,
    /// Hidden nodes whose rows are essential.
    pub active_bits: Vec<usize>,
    pub affine: AffineMap,
    /// Chebyshev center of the region, radius capped at 1.
    pub witness: Vec<f64>,
    pub radius: f64,
    /// Some box row is a facet (bounded mode only).
    pub boundary_flag: bool,
}

impl Region {
    /// Builds and prunes the region of `bits`, optionally intersected with a box.
    pub fn build(
        net: &NetworkSpec,
        bits: BitVector,
        bounds: Option<&BoxRegion>,
        tol: &Tolerances,
    ) -> Result<Region> {
        let mut system = assemble(net, &bits)?;
        let h = bits.len();
        // A constant row encodes a node whose pre-activation is the constant
        // b^ on the whole cell; bit 1 needs b^ > 0, bit 0 needs b^ <= 0.
        for i in 0..h {
            if norm(system.a.row(i)) <= ZERO_ROW {
                let ok = if bits.get(i) { system.c[i] > tol.bit } else { system.c[i] >= -tol.bit };
                if !ok {
                    return Err(Error::Infeasible);
                }
            }
        }
        if let Some(b) = bounds {
            if b.dim() != net.input_dim() {
                return Err(Error::Dimension { expected: net.input_dim(), actual: b.dim() });
            }
            let rows = b.inequalities();
            system = Inequalities { a: system.a.vstack(&rows.a), c: [system.c, rows.c].concat() };
        }
        let essential = essentialize(&system, tol)?;
        let active_bits: Vec<usize> = essential.rows.iter().copied().filter(|&r| r < h).collect();
        let boundary_flag = essential.rows.iter().any(|&r| r >= h);
        let affine = affine_map(net, &bits)?;
        Ok(Region {
            bits,
            system,
            essential_rows: essential.rows,
            active_bits,
            affine,
            witness: essential.witness,
            radius: essential.radius,
            boundary_flag,
        })
    }

    /// The essential subsystem `(A', c')`.
    pub fn essential(&self) -> Inequalities {
        self.system.select(&self.essential_rows)
    }

    /// One bit vector per active bit, each with that bit flipped.
    pub fn neighbors(&self) -> Vec<BitVector> {
        self.active_bits.iter().map(|&k| self.bits.flipped(k)).collect()
    }

    pub fn to_dump(&self) -> RegionDump {
        let essential = self
            .essential_rows
            .iter()
            .map(|&r| EssentialRow { row: r, a: self.system.a.row(r).to_vec(), c: self.system.c[r] })
            .collect();
        RegionDump {
            bits: self.bits.clone(),
            active_bits: self.active_bits.clone(),
            essential_rows: essential,
            affine: AffineDump { matrix: self.affine.matrix.to_rows(), offset: self.affine.offset.clone() },
            witness: self.witness.clone(),
            boundary_flag: self.boundary_flag,
        }
    }
}

/// Region of the point `x`. Points within the bit tolerance of a node's
/// hyperplane are rejected with [`Error::OnBoundary`].
pub fn region_of(
    net: &NetworkSpec,
    x: &[f64],
    bounds: Option<&BoxRegion>,
    tol: &Tolerances,
) -> Result<Region> {
    let pre = net.pre_activations(x)?;
    if let Some((node, &value)) = pre.iter().enumerate().find(|(_, v)| v.abs() <= tol.bit) {
        return Err(Error::OnBoundary { node, value });
    }
    let bits = BitVector::from_fn(pre.len(), |i| pre[i] > tol.bit);
    Region::build(net, bits, bounds, tol)
}

/// Neighbours of an already-pruned region.
pub fn neighbors(region: &Region) -> Vec<BitVector> {
    region.neighbors()
}

/// Chebyshev ball of the common facet of two one-bit neighbours, centered on
/// the flipped node's hyperplane. Returns the ball and the unit plane normal.
fn facet_ball(first: &Region, second: &Region) -> Result<Option<(lp::Ball, Vec<f64>)>> {
    let k = first.bits.diff_positions(&second.bits)[0];
    let n = norm(first.system.a.row(k));
    if n <= ZERO_ROW {
        return Ok(None);
    }
    let plane: Vec<f64> = first.system.a.row(k).iter().map(|v| v / n).collect();
    let level = first.system.c[k] / n;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    let mut weights = Vec::new();
    for region in [first, second] {
        let (unit, constant) = normalized(&region.system);
        for i in 0..unit.len() {
            if i == k || constant[i] {
                continue;
            }
            rows.push(unit.a.row(i).to_vec());
            rhs.push(unit.c[i]);
            weights.push(1.0);
        }
    }
    rows.push(plane.clone());
    rhs.push(level);
    weights.push(0.0);
    rows.push(plane.iter().map(|v| -v).collect());
    rhs.push(-level);
    weights.push(0.0);
    let a = Matrix::from_rows(&rows).expect("rectangular");
    let ball = lp::inscribed_ball(&a, &rhs, Some(&weights), Some(WITNESS_CAP))?;
    Ok(ball.map(|b| (b, plane)))
}

/// True iff the two regions differ in exactly one bit and their closures
/// meet in an `(m-1)`-dimensional piece of that bit's hyperplane.
pub fn shares_facet(first: &Region, second: &Region, tol: &Tolerances) -> Result<bool> {
    if first.bits.len() != second.bits.len() || first.bits.hamming(&second.bits) != 1 {
        return Ok(false);
    }
    Ok(facet_ball(first, second)?.is_some_and(|(b, _)| b.radius > tol.dim))
}

/// Points on the shared facet of two adjacent regions: the facet's Chebyshev
/// center plus `count - 1` points scattered inside the facet ball.
pub fn shared_facet_points(
    first: &Region,
    second: &Region,
    count: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<Vec<f64>>> {
    use rand_distr::{Distribution, StandardNormal};
    if first.bits.len() != second.bits.len() || first.bits.hamming(&second.bits) != 1 {
        return Err(Error::InvalidArgument("regions are not one-bit neighbours".into()));
    }
    let (ball, plane) = facet_ball(first, second)?.ok_or(Error::Infeasible)?;
    let m = plane.len();
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        if m == 1 {
            points.push(ball.center.clone());
            continue;
        }
        let mut d: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let along = dot(&d, &plane);
        d.iter_mut().zip(&plane).for_each(|(v, p)| *v -= along * p);
        let dn = norm(&d);
        if dn < 1e-9 {
            continue;
        }
        let t = if points.is_empty() { 0.0 } else { rng.random::<f64>() * ball.radius * 0.9 };
        points.push(ball.center.iter().zip(&d).map(|(c, v)| c + t * v / dn).collect());
    }
    Ok(points)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssentialRow {
    pub row: usize,
    pub a: Vec<f64>,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineDump {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

/// JSON form of a region, written by the `region` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDump {
    pub bits: BitVector,
    pub active_bits: Vec<usize>,
    pub essential_rows: Vec<EssentialRow>,
    pub affine: AffineDump,
    pub witness: Vec<f64>,
    pub boundary_flag: bool,
}
