//! Matrix exponential by scaling and squaring with a diagonal Padé approximant.

use super::linalg::Matrix;
use super::lu::Lu;
use crate::error::{Error, Result};

/// Largest `||tA||_inf` accepted by [`matrix_exp`].
pub const EXPM_NORM_GUARD: f64 = 1e7;

/// Scaled argument bound before squaring.
const SCALED_NORM: f64 = 0.5;

/// Degree of the diagonal Padé approximant. At `||B|| <= 0.5` the truncation
/// error of the [8/8] approximant is far below double precision.
const PADE_DEGREE: usize = 8;

fn pade_coefficients() -> [f64; PADE_DEGREE + 1] {
    // c_k = (2q - k)! q! / ((2q)! k! (q - k)!), built by the ratio recurrence.
    let q = PADE_DEGREE as f64;
    let mut c = [0.0; PADE_DEGREE + 1];
    c[0] = 1.0;
    for k in 1..=PADE_DEGREE {
        let kf = k as f64;
        c[k] = c[k - 1] * (q - kf + 1.0) / (kf * (2.0 * q - kf + 1.0));
    }
    c
}

/// Approximates `exp(tA)` for square `A` and `t >= 0`.
pub fn matrix_exp(a: &Matrix, t: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::MalformedProblem("matrix exponential needs a square matrix".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    let n = a.rows();
    let ta = a.scale(t);
    let norm = ta.norm_inf();
    if norm > EXPM_NORM_GUARD {
        return Err(Error::NormTooLarge { norm, max: EXPM_NORM_GUARD });
    }
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }

    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let b = ta.scale(0.5f64.powi(squarings));

    let c = pade_coefficients();
    let mut num = Matrix::identity(n).scale(c[0]);
    let mut den = Matrix::identity(n).scale(c[0]);
    let mut power = Matrix::identity(n);
    for (k, ck) in c.iter().enumerate().skip(1) {
        power = power.matmul(&b)?;
        let term = power.scale(*ck);
        num = num.add(&term)?;
        den = if k % 2 == 0 { den.add(&term)? } else { den.sub(&term)? };
    }
    let mut r = Lu::factorize(&den)?.solve_matrix(&num)?;
    for _ in 0..squarings {
        r = r.matmul(&r)?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    #[test]
    fn zero_matrix_gives_identity() {
        let r = matrix_exp(&Matrix::zeros(3, 3), 1.0).unwrap();
        assert_eq!(r, Matrix::identity(3));
    }

    #[test]
    fn scalar_decay() {
        let r = matrix_exp(&Matrix::diag(&[-1.0]), 1.0).unwrap();
        assert!((r[(0, 0)] - 1.0 / E).abs() <= 1e-15);
    }

    #[test]
    fn rotation_quarter_turn() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let r = matrix_exp(&a, FRAC_PI_2).unwrap();
        // exp(tA) = [[cos t, sin t], [-sin t, cos t]]
        let expect = [[0.0, 1.0], [-1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((r[(i, j)] - expect[i][j]).abs() <= 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn large_scalar_relative_accuracy() {
        // ||tA|| = 50 at the edge of the accuracy contract.
        let r = matrix_exp(&Matrix::diag(&[-1.0, 0.5]), 50.0).unwrap();
        assert!((r[(0, 0)] / (-50.0f64).exp() - 1.0).abs() <= 1e-9);
        assert!((r[(1, 1)] / 25.0f64.exp() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn guard_and_argument_checks() {
        let a = Matrix::diag(&[1.0]);
        assert!(matches!(matrix_exp(&a, 2e7), Err(Error::NormTooLarge { .. })));
        assert!(matrix_exp(&a, -1.0).is_err());
        assert!(matrix_exp(&Matrix::zeros(2, 3), 1.0).is_err());
    }
}
