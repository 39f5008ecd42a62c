//! LU factorization with partial pivoting, plus rank and null-space helpers
//! built on Gaussian elimination.

use super::linalg::{Matrix, Vector};
use super::PIVOT_REL_TOL;
use crate::error::{check_dim, Error, Result};

/// `PA = LU`, stored compactly in one matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factorize(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::MalformedProblem(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = PIVOT_REL_TOL * a.max_abs().max(f64::MIN_POSITIVE);

        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= threshold {
                return Err(Error::Singular { pivot });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vector> {
        check_dim(self.n, b.len())?;
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(Vector::from_vec(x))
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix> {
        check_dim(self.n, b.rows())?;
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col = self.solve(&b.column(j))?;
            for i in 0..b.rows() {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }
}

/// Solves the square system `A x = b`.
pub fn linear_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    check_dim(a.rows(), b.dim())?;
    Lu::factorize(a)?.solve(b)
}

/// Reduced row echelon form with absolute tolerance `tol`; returns the pivot columns.
fn rref(m: &mut Matrix, tol: f64) -> Vec<usize> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, m[(i, c)].abs()))
            .fold((r, -1.0), |b, cur| if cur.1 > b.1 { cur } else { b });
        if best <= tol {
            continue;
        }
        for j in 0..cols {
            let tmp = m[(r, j)];
            m[(r, j)] = m[(p, j)];
            m[(p, j)] = tmp;
        }
        let d = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= d;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        m[(i, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn rank_tol(m: &Matrix) -> f64 {
    1e-9 * m.max_abs().max(1.0)
}

/// Numerical rank of the matrix whose rows are `rows`.
pub fn rank(rows: &[Vector]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m = Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
        .expect("rows share a dimension");
    let tol = rank_tol(&m);
    rref(&mut m, tol).len()
}

/// Basis of `{x : r . x = 0 for every row r}` in an ambient space of dimension `dim`.
pub fn null_space(rows: &[Vector], dim: usize) -> Vec<Vector> {
    if rows.is_empty() {
        return (0..dim).map(|i| Vector::basis(dim, i)).collect();
    }
    let mut m = Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
        .expect("rows share a dimension");
    let tol = rank_tol(&m);
    let pivots = rref(&mut m, tol);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0.0; dim];
            v[f] = 1.0;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[(r, f)];
            }
            Vector::from_vec(v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_system_returns_rhs() {
        let b = Vector::new(vec![3.0, -1.0, 2.5]).unwrap();
        assert_eq!(linear_solve(&Matrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn diagonal_system() {
        let a = Matrix::diag(&[2.0, 4.0]);
        let x = linear_solve(&a, &Vector::new(vec![2.0, 4.0]).unwrap()).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn random_well_conditioned_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut a = Matrix::zeros(5, 5);
            for i in 0..5 {
                for j in 0..5 {
                    a[(i, j)] = rng.random_range(-1.0..1.0);
                }
                a[(i, i)] += 6.0;
            }
            let b = Vector::new((0..5).map(|_| rng.random_range(-10.0..10.0)).collect()).unwrap();
            let x = linear_solve(&a, &b).unwrap();
            let r = a.mul_vec(&x).unwrap().max_abs_diff(&b);
            assert!(r <= 1e-10 * (1.0 + b.norm_inf()), "residual {r}");
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            linear_solve(&a, &Vector::new(vec![1.0, 1.0]).unwrap()),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn null_space_of_a_line() {
        let rows = vec![Vector::new(vec![1.0, 1.0, 0.0]).unwrap()];
        let ns = null_space(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(v.dot(&rows[0]).abs() < 1e-12);
        }
        assert_eq!(rank(&ns), 2);
    }
}
