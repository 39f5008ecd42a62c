//! Dense linear algebra and linear programming kernel.

mod expm;
mod linalg;
mod lp;
mod lu;
mod vertices;

pub use expm::{matrix_exp, EXPM_NORM_GUARD};
pub use linalg::{dot, Matrix, Vector};
pub use linalg::fmt_real;
pub use lp::{solve_lp, LinearConstraints, LpProblem, LpResult, LpStatus, Sense};
pub use lu::{linear_solve, null_space, rank, Lu};
pub use vertices::{enumerate_vertices, MAX_VERTEX_DIM};

/// Feasibility tolerance shared by every LP-based check.
pub const FEAS_TOL: f64 = 1e-9;

/// Relative pivot threshold for LU and simplex pivots.
pub const PIVOT_REL_TOL: f64 = 1e-12;
