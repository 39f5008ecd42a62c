//! Brute-force vertex enumeration of `{x : G x >= h}`.
//!
//! Every `dim`-subset of constraints is solved as a square system and kept
//! when the solution is feasible. Exponential in the constraint count, so it
//! only serves as an independent oracle on small instances.

use itertools::Itertools;

use super::linalg::{Matrix, Vector};
use super::lp::LinearConstraints;
use super::lu::linear_solve;
use super::FEAS_TOL;
use crate::error::{Error, Result};

pub const MAX_VERTEX_DIM: usize = 10;

/// Lists each vertex of the polyhedron once. An unbounded polyhedron without
/// vertices (one containing a line) yields an empty list.
pub fn enumerate_vertices(ineq: &LinearConstraints) -> Result<Vec<Vector>> {
    let dim = ineq.dim();
    if dim > MAX_VERTEX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_VERTEX_DIM });
    }
    if dim == 0 {
        return Err(Error::Empty("polyhedron dimension"));
    }
    let m = ineq.len();
    let mut out: Vec<Vector> = Vec::new();
    for subset in (0..m).combinations(dim) {
        let rows: Vec<Vec<f64>> = subset.iter().map(|&i| ineq.lhs.row(i).to_vec()).collect();
        let a = Matrix::from_rows(&rows)?;
        let b = Vector::from_vec(subset.iter().map(|&i| ineq.rhs[i]).collect());
        let Ok(x) = linear_solve(&a, &b) else { continue };
        let scale = 1.0 + x.norm_inf();
        if ineq.ineq_violation(&x) > FEAS_TOL * scale {
            continue;
        }
        if out.iter().all(|v| v.max_abs_diff(&x) > FEAS_TOL * scale) {
            out.push(x);
        }
    }
    Ok(out)
}
