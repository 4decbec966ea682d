//! Dense two-phase simplex for problems of the form
//!
//! ```text
//! maximize  objective · x
//! subject to  A x <= b,  lower <= x <= upper (optional)
//! ```
//!
//! with `x` free. Free variables are split as `x = u - v` with `u, v >= 0`,
//! every row gets a slack, and rows with a negative right-hand side get an
//! artificial variable for phase one. Pivoting follows Bland's rule
//! (smallest eligible index for both entering and leaving variables), which
//! rules out cycling on the degenerate systems that show up when many
//! hyperplanes pass through one vertex.
//!
//! The helpers at the bottom (`is_feasible`, `is_redundant`,
//! `inscribed_ball`) are the queries the region code needs.

use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};

/// Pivot and reduced-cost threshold inside the tableau.
const PIVOT_EPS: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Matrix,
    pub rhs: Vec<f64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: f64,
        witness: Vec<f64>,
        /// One multiplier per inequality row (box rows excluded), `>= 0`.
        duals: Vec<f64>,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, constraints: Matrix, rhs: Vec<f64>) -> Self {
        LinearProgram { objective, constraints, rhs, lower: None, upper: None }
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = Some(lower);
        self.upper = Some(upper);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.constraints.rows() != self.rhs.len() {
            return Err(Error::Dimension {
                expected: self.constraints.rows(),
                actual: self.rhs.len(),
            });
        }
        if self.constraints.rows() > 0 && self.constraints.cols() != n {
            return Err(Error::Dimension { expected: n, actual: self.constraints.cols() });
        }
        for bound in [&self.lower, &self.upper].into_iter().flatten() {
            if bound.len() != n {
                return Err(Error::Dimension { expected: n, actual: bound.len() });
            }
        }
        Ok(())
    }

    /// All inequality rows, with finite box bounds appended as extra rows.
    fn expanded_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.objective.len();
        let mut rows: Vec<Vec<f64>> = if self.constraints.rows() == 0 {
            Vec::new()
        } else {
            self.constraints.to_rows()
        };
        let mut rhs = self.rhs.clone();
        if let Some(upper) = &self.upper {
            for (j, &u) in upper.iter().enumerate() {
                if u.is_finite() {
                    let mut r = vec![0.0; n];
                    r[j] = 1.0;
                    rows.push(r);
                    rhs.push(u);
                }
            }
        }
        if let Some(lower) = &self.lower {
            for (j, &l) in lower.iter().enumerate() {
                if l.is_finite() {
                    let mut r = vec![0.0; n];
                    r[j] = -1.0;
                    rows.push(r);
                    rhs.push(-l);
                }
            }
        }
        (rows, rhs)
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        self.validate()?;
        let (rows, rhs) = self.expanded_rows();
        let n = self.objective.len();
        let mut tableau = Tableau::new(&rows, &rhs, n);
        let limit = 200 * (tableau.width + tableau.height) + 1000;

        if tableau.artificials > 0 {
            match tableau.run(Phase::One, limit)? {
                Step::Optimal => {}
                Step::Unbounded => unreachable!("phase one objective is bounded above by zero"),
            }
            if tableau.objective_value() < -1e-9 * (1.0 + tableau.rhs_scale) {
                return Ok(LpOutcome::Infeasible);
            }
            tableau.evict_artificials();
        }

        tableau.load_objective(&self.objective);
        match tableau.run(Phase::Two, limit)? {
            Step::Unbounded => Ok(LpOutcome::Unbounded),
            Step::Optimal => {
                let witness = tableau.primal(n);
                let value = crate::linalg::dot(&self.objective, &witness);
                let duals = tableau.duals(self.constraints.rows().min(rows.len()));
                Ok(LpOutcome::Optimal { value, witness, duals })
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Step {
    Optimal,
    Unbounded,
}

/// Column layout: `u (n) | v (n) | slack (m) | artificial (k) | rhs`.
struct Tableau {
    /// `height` constraint rows followed by the objective row.
    cells: Vec<Vec<f64>>,
    basis: Vec<usize>,
    height: usize,
    width: usize,
    n: usize,
    artificials: usize,
    rhs_scale: f64,
}

impl Tableau {
    fn new(rows: &[Vec<f64>], rhs: &[f64], n: usize) -> Self {
        let m = rows.len();
        let negative: Vec<usize> = (0..m).filter(|&i| rhs[i] < 0.0).collect();
        let k = negative.len();
        let width = 2 * n + m + k;
        let mut cells = vec![vec![0.0; width + 1]; m + 1];
        let mut basis = vec![0; m];
        let mut art = 0;
        for i in 0..m {
            let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
            let row = &mut cells[i];
            for j in 0..n {
                row[j] = sign * rows[i][j];
                row[n + j] = -sign * rows[i][j];
            }
            row[2 * n + i] = sign;
            row[width] = sign * rhs[i];
            if sign < 0.0 {
                row[2 * n + m + art] = 1.0;
                basis[i] = 2 * n + m + art;
                art += 1;
            } else {
                basis[i] = 2 * n + i;
            }
        }
        let rhs_scale = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut t = Tableau { cells, basis, height: m, width, n, artificials: k, rhs_scale };
        if k > 0 {
            // maximize -sum(artificials): cost -1 on each artificial column.
            let mut cost = vec![0.0; width];
            for c in cost.iter_mut().skip(2 * n + m) {
                *c = -1.0;
            }
            t.set_costs(&cost);
        }
        t
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= 2 * self.n + self.height
    }

    /// Writes the reduced-cost row `z_j - c_j` for cost vector `cost`.
    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        let mut obj = vec![0.0; w + 1];
        for (j, c) in cost.iter().enumerate() {
            obj[j] = -c;
        }
        for i in 0..self.height {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (o, &v) in obj.iter_mut().zip(&self.cells[i]) {
                    *o += cb * v;
                }
            }
        }
        self.cells[self.height] = obj;
    }

    fn load_objective(&mut self, objective: &[f64]) {
        let mut cost = vec![0.0; self.width];
        for (j, &c) in objective.iter().enumerate() {
            cost[j] = c;
            cost[self.n + j] = -c;
        }
        self.set_costs(&cost);
    }

    fn objective_value(&self) -> f64 {
        self.cells[self.height][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.cells[r][c];
        for v in self.cells[r].iter_mut() {
            *v /= p;
        }
        self.cells[r][c] = 1.0;
        let pivot_row = self.cells[r].clone();
        for (i, row) in self.cells.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..=w {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn run(&mut self, phase: Phase, limit: usize) -> Result<Step> {
        for _ in 0..limit {
            let obj = &self.cells[self.height];
            let entering = (0..self.width).find(|&j| {
                obj[j] < -PIVOT_EPS && !(phase == Phase::Two && self.is_artificial(j))
            });
            let Some(c) = entering else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.height {
                let a = self.cells[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.cells[i][self.width] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if ratio < lr && !tie
                                || tie && self.basis[i] < self.basis[li]
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(Step::Unbounded),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::IterationLimit(limit))
    }

    /// After phase one, pivots zero-valued artificials out of the basis where
    /// possible. Rows that cannot be pivoted are linearly dependent and keep
    /// their artificial at zero; phase two never lets artificials re-enter.
    fn evict_artificials(&mut self) {
        for i in 0..self.height {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let col = (0..2 * self.n + self.height)
                .filter(|&j| self.cells[i][j].abs() > 1e-9)
                .max_by(|&a, &b| self.cells[i][a].abs().total_cmp(&self.cells[i][b].abs()));
            if let Some(c) = col {
                self.pivot(i, c);
            }
        }
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            let v = self.cells[i][self.width];
            if b < n {
                x[b] += v;
            } else if b < 2 * n {
                x[b - n] -= v;
            }
        }
        x
    }

    fn duals(&self, rows: usize) -> Vec<f64> {
        let obj = &self.cells[self.height];
        (0..rows).map(|i| obj[2 * self.n + i]).collect()
    }
}

/// True iff `{x : A x <= c}` is non-empty.
pub fn is_feasible(a: &Matrix, c: &[f64]) -> Result<bool> {
    let lp = LinearProgram::new(vec![0.0; a.cols()], a.clone(), c.to_vec());
    Ok(!matches!(lp.solve()?, LpOutcome::Infeasible))
}

/// Row `i` is redundant when maximizing `a_i · x` over the remaining rows
/// stays within `c_i + tol`. An unbounded relaxation means the row constrains.
pub fn is_redundant(a: &Matrix, c: &[f64], i: usize, tol: f64) -> Result<bool> {
    if i >= a.rows() {
        return Err(Error::InvalidArgument(format!("row {i} out of range ({})", a.rows())));
    }
    let keep: Vec<usize> = (0..a.rows()).filter(|&r| r != i).collect();
    redundant_against(a, c, i, &keep, tol)
}

/// Redundancy of row `i` with respect to the rows in `keep` only.
pub(crate) fn redundant_against(
    a: &Matrix,
    c: &[f64],
    i: usize,
    keep: &[usize],
    tol: f64,
) -> Result<bool> {
    let sub = a.select_rows(keep);
    let rhs: Vec<f64> = keep.iter().map(|&r| c[r]).collect();
    let lp = LinearProgram::new(a.row(i).to_vec(), sub, rhs);
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => Ok(value <= c[i] + tol),
        LpOutcome::Unbounded => Ok(false),
        LpOutcome::Infeasible => Err(Error::Infeasible),
    }
}

/// Largest ball inside `{x : A x <= c}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    /// `f64::INFINITY` when the polyhedron contains arbitrarily large balls
    /// and no cap was given.
    pub radius: f64,
}

/// Chebyshev center LP: maximize `r` subject to `a_i·x + w_i r <= c_i`,
/// `r >= 0`, optionally `r <= cap`. `weights` defaults to the row norms;
/// a zero weight makes a row behave as a hard face (used to pin a point to a
/// hyperplane). Returns `None` for an empty polyhedron.
pub fn inscribed_ball(
    a: &Matrix,
    c: &[f64],
    weights: Option<&[f64]>,
    cap: Option<f64>,
) -> Result<Option<Ball>> {
    let m = a.cols();
    let mut rows = Vec::with_capacity(a.rows() + 2);
    let mut rhs = Vec::with_capacity(a.rows() + 2);
    for i in 0..a.rows() {
        let mut r = a.row(i).to_vec();
        r.push(weights.map_or_else(|| norm(a.row(i)), |w| w[i]));
        rows.push(r);
        rhs.push(c[i]);
    }
    let mut nonneg = vec![0.0; m + 1];
    nonneg[m] = -1.0;
    rows.push(nonneg);
    rhs.push(0.0);
    if let Some(cap) = cap {
        let mut top = vec![0.0; m + 1];
        top[m] = 1.0;
        rows.push(top);
        rhs.push(cap);
    }
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let lp = LinearProgram::new(objective, Matrix::from_rows(&rows).expect("rectangular"), rhs);
    match lp.solve()? {
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Ok(Some(Ball { center: vec![0.0; m], radius: f64::INFINITY })),
        LpOutcome::Optimal { witness, .. } => {
            let radius = witness[m].max(0.0);
            let mut center = witness;
            center.truncate(m);
            Ok(Some(Ball { center, radius }))
        }
    }
}

/// Radius of the largest inscribed ball; infinite for polyhedra that contain
/// arbitrarily large balls.
pub fn chebyshev_radius(a: &Matrix, c: &[f64]) -> Result<f64> {
    inscribed_ball(a, c, None, None)?.map(|b| b.radius).ok_or(Error::Infeasible)
}
