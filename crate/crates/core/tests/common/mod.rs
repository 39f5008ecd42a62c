//! Instance generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use conesemi::cone::{DualVector, PolyCone};
use conesemi::numerics::{
    dot, enumerate_vertices, solve_lp, LinearConstraints, LpProblem, LpStatus, Matrix, Vector,
};
use conesemi::sampling::{self, SampleRng};
use rand::RngExt;

pub fn v(x: &[f64]) -> Vector {
    Vector::new(x.to_vec()).unwrap()
}

pub fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn diamond() -> PolyCone {
    PolyCone::from_generators(&[v(&[1.0, 1.0]), v(&[1.0, -1.0])]).unwrap()
}

/// A simplicial cone in three dimensions that is not the orthant.
pub fn skewed3() -> PolyCone {
    PolyCone::from_generators(&[v(&[1.0, 0.0, 0.0]), v(&[1.0, 1.0, 0.0]), v(&[0.0, 1.0, 2.0])])
        .unwrap()
}

/// Four rays over a square: the standard non-lattice cone.
pub fn pyramid() -> PolyCone {
    PolyCone::from_generators(&[
        v(&[1.0, 1.0, 1.0]),
        v(&[1.0, -1.0, 1.0]),
        v(&[-1.0, 1.0, 1.0]),
        v(&[-1.0, -1.0, 1.0]),
    ])
    .unwrap()
}

pub fn lattice_cones() -> Vec<(&'static str, PolyCone)> {
    vec![
        ("orthant2", PolyCone::orthant(2).unwrap()),
        ("orthant3", PolyCone::orthant(3).unwrap()),
        ("diamond", diamond()),
        ("skewed3", skewed3()),
    ]
}

pub fn all_cones() -> Vec<(&'static str, PolyCone)> {
    let mut c = lattice_cones();
    c.push(("pyramid", pyramid()));
    c
}

/// Random functional in the interior of `K'`: a positive combination of facets.
pub fn random_positive_functional(rng: &mut SampleRng, cone: &PolyCone) -> DualVector {
    let mut phi = Vector::zeros(cone.dim());
    for f in cone.facets() {
        phi = phi.axpy(rng.random_range(0.1..2.0), f);
    }
    DualVector::certified(cone, phi).unwrap()
}

/// Metzler matrix with `phi^T A = -margin * phi` columnwise, hence
/// `p_phi`-dissipative on the orthant; returns the matrix and `phi`.
pub fn dissipative_instance(rng: &mut SampleRng, n: usize) -> (Matrix, Vector) {
    let phi: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a[(i, j)] = rng.random_range(0.0..1.0);
            }
        }
    }
    for j in 0..n {
        let off: f64 = (0..n).filter(|&i| i != j).map(|i| phi[i] * a[(i, j)]).sum();
        a[(j, j)] = -off / phi[j] - rng.random_range(0.1..1.0);
    }
    (a, Vector::new(phi).unwrap())
}

/// Random matrix shifted so every Gershgorin disc sits in the left half-plane.
pub fn stable_matrix(rng: &mut SampleRng, n: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        a[(i, i)] = -r - rng.random_range(0.2..1.0);
    }
    a
}

fn facet_block(cone: &PolyCone, at: usize, total: usize, rhs: &[f64]) -> LinearConstraints {
    let mut c = LinearConstraints::empty(total);
    for f in cone.facets() {
        let mut row = vec![0.0; total];
        row[at..at + cone.dim()].copy_from_slice(f);
        c.push(&row, dot(f, rhs));
    }
    c
}

/// `p_phi(x)` as the minimum of `<y, phi>` over the vertices of the majorant set.
pub fn brute_phi_gauge(cone: &PolyCone, phi: &[f64], x: &[f64]) -> f64 {
    let n = cone.dim();
    let mut c = facet_block(cone, 0, n, &vec![0.0; n]);
    c.extend(&facet_block(cone, 0, n, x));
    enumerate_vertices(&c).unwrap().iter().map(|y| dot(y, phi)).fold(f64::INFINITY, f64::min)
}

/// Canonical half-norm for the unweighted sup norm, over vertices of the
/// epigraph `{(y, s) : y >= x, -s <= y_i <= s}`.
pub fn brute_canonical_linf(cone: &PolyCone, x: &[f64]) -> f64 {
    let n = cone.dim();
    let mut c = facet_block(cone, 0, n + 1, x);
    for i in 0..n {
        let mut row = vec![0.0; n + 1];
        row[n] = 1.0;
        row[i] = -1.0;
        c.push(&row, 0.0);
        row[i] = 1.0;
        c.push(&row, 0.0);
    }
    enumerate_vertices(&c).unwrap().iter().map(|y| y[n]).fold(f64::INFINITY, f64::min)
}

/// Minimum of `<A x, phi>` over sampled boundary points `x` of `K` and the
/// face `{phi in K' : <x, phi> = 0, |phi_i| <= 1}`, solved by LP.
pub fn sampled_pod_margin(a: &Matrix, cone: &PolyCone, rng: &mut SampleRng, samples: usize) -> f64 {
    let n = cone.dim();
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        // A random point on a random facet of K.
        let f = &cone.facets()[rng.random_range(0..cone.facets().len())];
        let mut x = Vector::zeros(n);
        for g in cone.generators().iter().filter(|g| dot(g, f).abs() <= 1e-10) {
            // Zero weights half the time so single extreme rays are hit often.
            if rng.random::<bool>() {
                x = x.axpy(rng.random_range(0.0..1.0), g);
            }
        }
        let ax = a.mul_vec(&x).unwrap();
        let mut lp = LpProblem::minimize(ax);
        for g in cone.generators() {
            lp.geq(g, 0.0);
        }
        lp.equal(&x, 0.0);
        for i in 0..n {
            let e = Vector::basis(n, i);
            lp.geq(&e, -1.0).leq(&e, 1.0);
        }
        let r = solve_lp(&lp).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        worst = worst.min(r.value);
    }
    worst
}

/// Vertices of `{u : <y, u> <= p(y) for y in sample}`.
pub fn sampled_dual_vertices(dim: usize, sample: &[(Vector, f64)]) -> Vec<Vector> {
    let mut c = LinearConstraints::empty(dim);
    for (y, py) in sample {
        c.push(&y.neg(), -py);
    }
    enumerate_vertices(&c).unwrap()
}

pub fn same_point_sets(a: &[Vector], b: &[Vector], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| p.max_abs_diff(q) <= tol))
        && b.iter().all(|q| a.iter().any(|p| p.max_abs_diff(q) <= tol))
}

pub fn rng(seed: u64) -> SampleRng {
    sampling::rng(seed)
}
