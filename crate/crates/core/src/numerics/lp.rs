//! Two-phase dense tableau simplex with Bland's anti-cycling rule.
//!
//! Problems are stated over free variables:
//!
//! ```text
//! minimize / maximize  c.x   subject to  E x = d,  G x >= h
//! ```
//!
//! Internally each free variable is split as `x = x+ - x-`, each inequality
//! gets a surplus column, and phase one drives one artificial per row to
//! zero. After phase two the basic solution is recomputed from the original
//! columns with a fresh LU solve, which removes drift accumulated by the
//! tableau updates.

use serde::{Deserialize, Serialize};

use super::linalg::{dot, Matrix, Vector};
use super::lu::Lu;
use super::{FEAS_TOL, PIVOT_REL_TOL};
use crate::error::{check_dim, Error, Result};

/// A block of linear constraints `lhs * x (op) rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraints {
    pub lhs: Matrix,
    pub rhs: Vec<f64>,
}

impl LinearConstraints {
    pub fn new(lhs: Matrix, rhs: Vec<f64>) -> Result<Self> {
        check_dim(lhs.rows(), rhs.len())?;
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("constraint right-hand side"));
        }
        Ok(Self { lhs, rhs })
    }

    pub fn empty(dim: usize) -> Self {
        Self { lhs: Matrix::empty(dim), rhs: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.lhs.cols()
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn push(&mut self, row: &[f64], rhs: f64) {
        self.lhs.push_row(row);
        self.rhs.push(rhs);
    }

    pub fn extend(&mut self, other: &LinearConstraints) {
        for i in 0..other.len() {
            self.push(other.lhs.row(i), other.rhs[i]);
        }
    }

    /// Largest violation of `lhs x >= rhs`, zero when satisfied.
    pub fn ineq_violation(&self, x: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| self.rhs[i] - dot(self.lhs.row(i), x))
            .fold(0.0, f64::max)
    }

    /// Largest violation of `lhs x = rhs`.
    pub fn eq_violation(&self, x: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| (self.rhs[i] - dot(self.lhs.row(i), x)).abs())
            .fold(0.0, f64::max)
    }

    fn rhs_scale(&self) -> f64 {
        self.rhs.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub objective: Vector,
    pub eq: LinearConstraints,
    pub ineq: LinearConstraints,
    pub sense: Sense,
}

impl LpProblem {
    pub fn new(objective: Vector, sense: Sense) -> Self {
        let n = objective.dim();
        Self {
            objective,
            eq: LinearConstraints::empty(n),
            ineq: LinearConstraints::empty(n),
            sense,
        }
    }

    pub fn minimize(objective: Vector) -> Self {
        Self::new(objective, Sense::Minimize)
    }

    pub fn maximize(objective: Vector) -> Self {
        Self::new(objective, Sense::Maximize)
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    /// Adds `row . x >= rhs`.
    pub fn geq(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        self.ineq.push(row, rhs);
        self
    }

    /// Adds `row . x <= rhs`.
    pub fn leq(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        self.ineq.push(&neg, -rhs);
        self
    }

    /// Adds `row . x = rhs`.
    pub fn equal(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        self.eq.push(row, rhs);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        for (block, name) in [(&self.eq, "equality"), (&self.ineq, "inequality")] {
            if block.dim() != n {
                return Err(Error::MalformedProblem(format!(
                    "{name} constraints have {} columns, objective has {n}",
                    block.dim()
                )));
            }
            if block.lhs.rows() != block.rhs.len() {
                return Err(Error::MalformedProblem(format!(
                    "{name} constraints have {} rows but {} right-hand sides",
                    block.lhs.rows(),
                    block.rhs.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub value: f64,
    pub point: Option<Vector>,
}

impl LpResult {
    /// Optimal value and point, or the matching error for other statuses.
    pub fn optimum(self) -> Result<(f64, Vector)> {
        match self.status {
            LpStatus::Optimal => Ok((self.value, self.point.expect("optimal result has a point"))),
            LpStatus::Unbounded => Err(Error::Unbounded),
            LpStatus::Infeasible => Err(Error::Infeasible("no feasible point".into())),
        }
    }
}

/// Solves a linear program; see the module docs for the accepted form.
pub fn solve_lp(p: &LpProblem) -> Result<LpResult> {
    p.validate()?;
    let n = p.dim();
    let (me, mi) = (p.eq.len(), p.ineq.len());
    let m = me + mi;
    let n_real = 2 * n + mi;

    // Standard form rows, sign-normalized so that rhs >= 0.
    let mut a_std = Matrix::zeros(m, n_real);
    let mut b_std = vec![0.0; m];
    for r in 0..m {
        let (row, rhs, surplus) = if r < me {
            (p.eq.lhs.row(r), p.eq.rhs[r], None)
        } else {
            let k = r - me;
            (p.ineq.lhs.row(k), p.ineq.rhs[k], Some(2 * n + k))
        };
        for j in 0..n {
            a_std[(r, j)] = row[j];
            a_std[(r, n + j)] = -row[j];
        }
        if let Some(s) = surplus {
            a_std[(r, s)] = -1.0;
        }
        b_std[r] = rhs;
        if rhs < 0.0 {
            for j in 0..n_real {
                a_std[(r, j)] = -a_std[(r, j)];
            }
            b_std[r] = -rhs;
        }
    }

    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; n_real];
    for j in 0..n {
        cost[j] = sign * p.objective[j];
        cost[n + j] = -sign * p.objective[j];
    }

    let mut tab = Tableau::new(&a_std, &b_std);
    let b_scale = b_std.iter().fold(0.0, |acc: f64, v| acc.max(*v));

    // Phase one.
    tab.set_phase_one_objective();
    match tab.iterate(n_real)? {
        Pivoting::Optimal => {}
        Pivoting::Unbounded => {
            return Err(Error::NumericalFailure("phase one reported unbounded".into()))
        }
    }
    let infeas = -tab.obj[tab.width - 1];
    if infeas > FEAS_TOL * (1.0 + b_scale) {
        return Ok(LpResult { status: LpStatus::Infeasible, value: f64::NAN, point: None });
    }
    tab.drive_out_artificials(n_real);

    // Phase two.
    tab.set_objective(&cost);
    match tab.iterate(n_real)? {
        Pivoting::Optimal => {}
        Pivoting::Unbounded => {
            return Ok(LpResult { status: LpStatus::Unbounded, value: f64::NAN, point: None })
        }
    }

    let mut z = tab.basic_solution(n_real);
    refine(&a_std, &b_std, &tab.basis, &tab.rows_kept, &mut z);

    let x: Vec<f64> = (0..n).map(|j| z[j] - z[n + j]).collect();
    let point = Vector::from_vec(x);
    let viol = p.ineq.ineq_violation(&point).max(p.eq.eq_violation(&point));
    let scale = 1.0 + p.ineq.rhs_scale().max(p.eq.rhs_scale());
    if viol > 1e3 * FEAS_TOL * scale {
        return Err(Error::NumericalFailure(format!(
            "optimal point violates constraints by {viol:e}"
        )));
    }
    Ok(LpResult {
        status: LpStatus::Optimal,
        value: p.objective.dot(&point),
        point: Some(point),
    })
}

enum Pivoting {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// Row-major `rows x width`; last column is the right-hand side.
    t: Vec<f64>,
    /// Reduced costs; last entry is minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Original standard-form row index of each tableau row.
    rows_kept: Vec<usize>,
    piv_tol: f64,
}

impl Tableau {
    fn new(a: &Matrix, b: &[f64]) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let width = n + m + 1;
        let mut t = vec![0.0; m * width];
        for i in 0..m {
            t[i * width..i * width + n].copy_from_slice(a.row(i));
            t[i * width + n + i] = 1.0;
            t[i * width + width - 1] = b[i];
        }
        Self {
            rows: m,
            width,
            t,
            obj: vec![0.0; width],
            basis: (n..n + m).collect(),
            rows_kept: (0..m).collect(),
            piv_tol: PIVOT_REL_TOL * a.max_abs().max(1.0),
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn set_phase_one_objective(&mut self) {
        let n_art_start = self.width - 1 - self.rows;
        self.obj.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.rows {
            for j in 0..self.width {
                if j < n_art_start || j == self.width - 1 {
                    self.obj[j] -= self.at(i, j);
                }
            }
        }
    }

    fn set_objective(&mut self, cost: &[f64]) {
        self.obj.iter_mut().for_each(|v| *v = 0.0);
        self.obj[..cost.len()].copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..self.width {
                    self.obj[j] -= cb * self.at(i, j);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let d = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= d;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f != 0.0 {
                for j in 0..w {
                    self.t[i * w + j] -= f * pivot_row[j];
                }
                self.t[i * w + c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for j in 0..w {
                self.obj[j] -= f * pivot_row[j];
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs Bland pivots; only columns `< allowed` may enter.
    fn iterate(&mut self, allowed: usize) -> Result<Pivoting> {
        let cost_scale = self.obj[..allowed].iter().fold(1.0, |m: f64, v| m.max(v.abs()));
        let opt_tol = 1e-11 * cost_scale;
        let cap = 10_000 + 50 * (self.rows + self.width);
        let rhs = self.width - 1;
        for _ in 0..cap {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j] < -opt_tol) else {
                return Ok(Pivoting::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a > self.piv_tol {
                    let ratio = self.at(i, rhs).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Ok(Pivoting::Unbounded),
            }
        }
        Err(Error::NumericalFailure(format!("simplex exceeded {cap} pivots")))
    }

    fn drive_out_artificials(&mut self, n_real: usize) {
        let mut i = 0;
        while i < self.rows {
            if self.basis[i] >= n_real {
                let best = (0..n_real)
                    .map(|j| (j, self.at(i, j).abs()))
                    .fold((usize::MAX, 0.0), |b, cur| if cur.1 > b.1 { cur } else { b });
                if best.0 != usize::MAX && best.1 > self.piv_tol {
                    self.pivot(i, best.0);
                } else {
                    // Redundant row.
                    let w = self.width;
                    self.t.drain(i * w..(i + 1) * w);
                    self.basis.remove(i);
                    self.rows_kept.remove(i);
                    self.rows -= 1;
                    continue;
                }
            }
            i += 1;
        }
    }

    fn basic_solution(&self, n_real: usize) -> Vec<f64> {
        let mut z = vec![0.0; n_real];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n_real {
                z[b] = self.at(i, self.width - 1).max(0.0);
            }
        }
        z
    }
}

/// Recomputes basic variables from the original columns.
fn refine(a: &Matrix, b: &[f64], basis: &[usize], rows: &[usize], z: &mut [f64]) {
    let k = basis.len();
    if k == 0 {
        return;
    }
    let mut bm = Matrix::zeros(k, k);
    for (ri, &r) in rows.iter().enumerate() {
        for (ci, &c) in basis.iter().enumerate() {
            bm[(ri, ci)] = a[(r, c)];
        }
    }
    let rhs: Vec<f64> = rows.iter().map(|&r| b[r]).collect();
    let Ok(lu) = Lu::factorize(&bm) else { return };
    let Ok(xb) = lu.solve(&rhs) else { return };
    if xb.iter().any(|v| *v < -FEAS_TOL * (1.0 + v.abs())) {
        return;
    }
    for (ci, &c) in basis.iter().enumerate() {
        z[c] = xb[ci].max(0.0);
    }
}
