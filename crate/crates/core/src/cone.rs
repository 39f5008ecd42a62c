//! Polyhedral cones and the order they induce.
//!
//! A [`PolyCone`] carries both descriptions of a pointed polyhedral cone `K`:
//! its extreme rays and its facet normals `f` with `K = {x : <x, f> >= 0}`.
//! The facet normals are exactly the extreme rays of the dual cone `K'`, so
//! [`PolyCone::dual`] just swaps the two lists.
//!
//! Facets are found by brute force over `(rank - 1)`-subsets of the rays,
//! which is adequate for the handful of rays used here but exponential in
//! general; dimension is capped at [`MAX_CONE_DIM`] for that reason.
//! [`PolyCone::orthant`] bypasses the enumeration and has no cap.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, linear_solve, null_space, rank, LpProblem, Matrix, Vector};
use crate::report::{Report, Verdict, Witness};

/// Membership tolerance on facet inner products.
pub const CONE_TOL: f64 = 1e-10;

/// Dimension cap for facet enumeration.
pub const MAX_CONE_DIM: usize = 10;

/// Threshold on `min <x, f>` over the witness box for total-set checks.
const TOTAL_TOL: f64 = 1e-9;

/// A linear functional, optionally certified positive on a cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualVector {
    pub coords: Vector,
    pub certified_positive: bool,
}

impl DualVector {
    pub fn uncertified(coords: Vector) -> Self {
        Self { coords, certified_positive: false }
    }

    /// Checks `<g, phi> >= -CONE_TOL` on every generator of `cone`.
    pub fn certified(cone: &PolyCone, coords: Vector) -> Result<Self> {
        check_dim(cone.dim(), coords.dim())?;
        if !cone.is_positive_functional(&coords) {
            return Err(Error::InvalidArgument(format!(
                "functional {coords} is not positive on the cone"
            )));
        }
        Ok(Self { coords, certified_positive: true })
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    pub fn apply(&self, x: &[f64]) -> f64 {
        self.coords.dot(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyCone {
    dim: usize,
    generators: Vec<Vector>,
    facets: Vec<Vector>,
    #[serde(skip)]
    orthant: bool,
}

impl PolyCone {
    /// The standard cone `R^n_+`.
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("cone dimension"));
        }
        let basis: Vec<Vector> = (0..dim).map(|i| Vector::basis(dim, i)).collect();
        Ok(Self { dim, generators: basis.clone(), facets: basis, orthant: true })
    }

    /// Builds the cone spanned by `rays`, computing its facets.
    ///
    /// Rays are rescaled to unit max-norm, duplicates and non-extreme rays are
    /// dropped. Cones that are not full-dimensional get a pair `+-c` of facet
    /// normals for each direction `c` orthogonal to their span.
    pub fn from_generators(rays: &[Vector]) -> Result<Self> {
        let first = rays.first().ok_or(Error::Empty("cone generators"))?;
        let dim = first.dim();
        if dim > MAX_CONE_DIM {
            return Err(Error::DimensionTooLarge { dim, max: MAX_CONE_DIM });
        }
        let mut gens: Vec<Vector> = Vec::new();
        for r in rays {
            check_dim(dim, r.dim())?;
            if r.norm_inf() == 0.0 {
                return Err(Error::InvalidArgument("cone generators must be nonzero".into()));
            }
            let g = r.normalized_inf();
            if gens.iter().all(|h| h.max_abs_diff(&g) > 1e-12) {
                gens.push(g);
            }
        }

        let r = rank(&gens);
        let complement = null_space(&gens, dim);
        let mut facets: Vec<Vector> = Vec::new();
        let push_facet = |f: Vector, facets: &mut Vec<Vector>| {
            let f = f.normalized_inf();
            if facets.iter().all(|h| h.max_abs_diff(&f) > 1e-9) {
                facets.push(f);
            }
        };

        for subset in (0..gens.len()).combinations(r - 1) {
            let mut rows: Vec<Vector> = subset.iter().map(|&i| gens[i].clone()).collect();
            rows.extend(complement.iter().cloned());
            if rank(&rows) != dim - 1 {
                continue;
            }
            let normal = null_space(&rows, dim).remove(0).normalized_inf();
            let signs: Vec<f64> = gens.iter().map(|g| g.dot(&normal)).collect();
            if signs.iter().all(|s| *s >= -CONE_TOL) {
                push_facet(normal, &mut facets);
            } else if signs.iter().all(|s| *s <= CONE_TOL) {
                push_facet(normal.neg(), &mut facets);
            }
        }
        for c in &complement {
            push_facet(c.clone(), &mut facets);
            push_facet(c.neg(), &mut facets);
        }

        if rank(&facets) < dim {
            return Err(Error::NotPointed);
        }

        // Keep extreme rays only: those with dim - 1 independent active facets.
        let extreme: Vec<Vector> = gens
            .into_iter()
            .filter(|g| {
                let active: Vec<Vector> = facets
                    .iter()
                    .filter(|f| g.dot(f).abs() <= 1e-9)
                    .cloned()
                    .collect();
                rank(&active) == dim - 1
            })
            .collect();

        let orthant = extreme.len() == dim
            && extreme.iter().all(|g| g.iter().filter(|c| **c != 0.0).count() == 1 && g.iter().all(|c| *c >= 0.0));
        Ok(Self { dim, generators: extreme, facets, orthant })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extreme rays, each scaled to unit max-norm.
    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    /// Facet normals, each scaled to unit max-norm; also the extreme rays of `K'`.
    pub fn facets(&self) -> &[Vector] {
        &self.facets
    }

    pub fn is_orthant(&self) -> bool {
        self.orthant
    }

    /// True when the generators span the whole space, so every vector has a majorant.
    pub fn is_generating(&self) -> bool {
        self.orthant || rank(&self.generators) == self.dim
    }

    /// The dual cone `K'`. Requires a generating cone, otherwise `K'` contains a line.
    pub fn dual(&self) -> Result<PolyCone> {
        if !self.is_generating() {
            return Err(Error::NotPointed);
        }
        Ok(Self {
            dim: self.dim,
            generators: self.facets.clone(),
            facets: self.generators.clone(),
            orthant: self.orthant,
        })
    }

    /// Smallest facet inner product, i.e. the signed distance-like membership margin.
    pub fn membership_margin(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.facets.iter().map(|f| dot(f, x)).fold(f64::INFINITY, f64::min))
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.membership_margin(x)? >= -CONE_TOL)
    }

    /// `x <= y` in the cone order.
    pub fn leq(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        let diff: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        self.contains(&diff)
    }

    pub fn is_positive_functional(&self, phi: &[f64]) -> bool {
        phi.len() == self.dim && self.generators.iter().all(|g| dot(g, phi) >= -CONE_TOL)
    }

    /// Simplicial cones, the only polyhedral cones that induce a lattice order.
    pub fn is_lattice(&self) -> bool {
        self.orthant || (self.generators.len() == self.dim && rank(&self.generators) == self.dim)
    }

    /// Coordinates of `x` in the generator basis of a lattice cone.
    pub fn generator_coordinates(&self, x: &[f64]) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        if !self.is_lattice() {
            return Err(Error::NotLattice);
        }
        if self.orthant {
            return Ok(Vector::from_vec(x.to_vec()));
        }
        let cols = Matrix::from_rows(&self.generators.iter().map(|g| g.to_vec()).collect::<Vec<_>>())?
            .transpose();
        linear_solve(&cols, &Vector::from_vec(x.to_vec()))
    }

    /// `x+ = sup(x, 0)`, computed by clamping generator coordinates.
    pub fn positive_part(&self, x: &[f64]) -> Result<Vector> {
        let coords = self.generator_coordinates(x)?;
        if self.orthant {
            return Ok(Vector::from_vec(coords.iter().map(|c| c.max(0.0)).collect()));
        }
        let mut out = Vector::zeros(self.dim);
        for (g, c) in self.generators.iter().zip(coords.iter()) {
            if *c > 0.0 {
                out = out.axpy(*c, g);
            }
        }
        Ok(out)
    }

    /// Interior points of `K`, the order units of a finite-dimensional space.
    pub fn is_order_unit(&self, u: &[f64]) -> Result<bool> {
        Ok(self.membership_margin(u)? > CONE_TOL)
    }

    /// Decides whether `{x : <x, phi> >= 0 for all phi}` lies inside `K`.
    ///
    /// For each facet `f`, minimizes `<x, f>` over that set intersected with
    /// the unit box; by homogeneity the box loses nothing. A negative optimum
    /// is a witness outside `K`.
    pub fn is_total(&self, phis: &[DualVector]) -> Result<Report> {
        if phis.is_empty() {
            return Err(Error::EmptyPhi);
        }
        for phi in phis {
            check_dim(self.dim, phi.dim())?;
            if !phi.certified_positive && !self.is_positive_functional(&phi.coords) {
                return Err(Error::InvalidArgument(format!(
                    "functional {} is not positive on the cone",
                    phi.coords
                )));
            }
        }
        let mut report = Report::new("total set: {x : phi(x) >= 0} within K", Verdict::Holds, TOTAL_TOL);
        let mut worst = f64::INFINITY;
        for f in &self.facets {
            let mut lp = LpProblem::minimize(f.clone());
            for phi in phis {
                lp.geq(&phi.coords, 0.0);
            }
            for i in 0..self.dim {
                let e = Vector::basis(self.dim, i);
                lp.geq(&e, -1.0).leq(&e, 1.0);
            }
            let (value, x) = crate::numerics::solve_lp(&lp)?.optimum()?;
            worst = worst.min(value);
            if value < -TOTAL_TOL {
                report.verdict = Verdict::Fails;
                report
                    .witnesses
                    .push(Witness::new(x, Some(DualVector::uncertified(f.clone())), value));
            }
        }
        report.worst_margin = Some(worst);
        report.samples_used = self.facets.len();
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn diamond() -> PolyCone {
        PolyCone::from_generators(&[v(&[1.0, 1.0]), v(&[1.0, -1.0])]).unwrap()
    }

    fn sorted(mut vs: Vec<Vector>) -> Vec<Vec<f64>> {
        vs.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap());
        vs.into_iter().map(|x| x.into_vec()).collect()
    }

    #[test]
    fn orthant_is_self_dual() {
        let k = PolyCone::from_generators(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert_eq!(sorted(k.facets().to_vec()), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(k.is_orthant());
    }

    #[test]
    fn diamond_facets_and_grid_agreement() {
        let k = diamond();
        assert_eq!(sorted(k.facets().to_vec()), vec![vec![1.0, -1.0], vec![1.0, 1.0]]);
        // Direct inequality x1 >= |x2| on a 10x10 grid.
        for i in 0..10 {
            for j in 0..10 {
                let x = [-1.0 + 2.0 * i as f64 / 9.0, -1.0 + 2.0 * j as f64 / 9.0];
                let direct = x[0] >= x[1].abs() - 1e-12;
                assert_eq!(k.contains(&x).unwrap(), direct, "{x:?}");
            }
        }
    }

    #[test]
    fn line_is_not_pointed() {
        let err = PolyCone::from_generators(&[v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).unwrap_err();
        assert_eq!(err, Error::NotPointed);
    }

    #[test]
    fn dimension_guard() {
        let rays: Vec<Vector> = (0..11).map(|i| Vector::basis(11, i)).collect();
        assert!(matches!(
            PolyCone::from_generators(&rays),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(PolyCone::orthant(63).is_ok());
    }

    #[test]
    fn redundant_generators_are_dropped() {
        let k = PolyCone::from_generators(&[v(&[1.0, 0.0]), v(&[1.0, 1.0]), v(&[0.0, 2.0])]).unwrap();
        assert_eq!(k.generators().len(), 2);
        assert!(k.is_lattice());
    }

    #[test]
    fn lower_dimensional_cone() {
        // A single ray in the plane.
        let k = PolyCone::from_generators(&[v(&[1.0, 1.0])]).unwrap();
        assert!(!k.is_generating());
        assert!(k.contains(&[2.0, 2.0]).unwrap());
        assert!(!k.contains(&[2.0, 1.0]).unwrap());
        assert!(!k.contains(&[-1.0, -1.0]).unwrap());
    }

    #[test]
    fn membership_examples() {
        let k = PolyCone::orthant(2).unwrap();
        assert!(k.contains(&[1.0, 2.0]).unwrap());
        assert!(!k.contains(&[1.0, -0.001]).unwrap());
        let d = diamond();
        assert!(d.contains(&[1.0, 0.5]).unwrap());
        assert!(!d.contains(&[0.5, 1.0]).unwrap());
        assert!(matches!(k.contains(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn order_examples() {
        let k = PolyCone::orthant(2).unwrap();
        assert!(k.leq(&[0.0, 0.0], &[1.0, 1.0]).unwrap());
        assert!(!k.leq(&[1.0, 0.0], &[0.0, 1.0]).unwrap());
        assert!(diamond().leq(&[0.0, 0.0], &[1.0, 0.5]).unwrap());
    }

    #[test]
    fn lattice_detection() {
        assert!(PolyCone::orthant(4).unwrap().is_lattice());
        assert!(diamond().is_lattice());
        let pyramid = PolyCone::from_generators(&[
            v(&[1.0, 1.0, 1.0]),
            v(&[1.0, -1.0, 1.0]),
            v(&[-1.0, 1.0, 1.0]),
            v(&[-1.0, -1.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(pyramid.generators().len(), 4);
        assert_eq!(pyramid.facets().len(), 4);
        assert!(!pyramid.is_lattice());
        assert_eq!(pyramid.positive_part(&[0.0, 0.0, 1.0]), Err(Error::NotLattice));
    }

    #[test]
    fn positive_part_examples() {
        let k = PolyCone::orthant(2).unwrap();
        assert_eq!(k.positive_part(&[1.0, -2.0]).unwrap().as_slice(), &[1.0, 0.0]);
        assert_eq!(k.positive_part(&[-1.0, -2.0]).unwrap().as_slice(), &[0.0, 0.0]);
        let p = diamond().positive_part(&[0.0, 1.0]).unwrap();
        assert!(p.max_abs_diff(&v(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn order_unit_examples() {
        let k = PolyCone::orthant(2).unwrap();
        assert!(k.is_order_unit(&[1.0, 1.0]).unwrap());
        assert!(!k.is_order_unit(&[1.0, 0.0]).unwrap());
        assert!(diamond().is_order_unit(&[1.0, 0.0]).unwrap());
    }

    #[test]
    fn total_sets() {
        let k = PolyCone::orthant(2).unwrap();
        let coord: Vec<DualVector> = k
            .facets()
            .iter()
            .map(|f| DualVector::certified(&k, f.clone()).unwrap())
            .collect();
        assert_eq!(k.is_total(&coord).unwrap().verdict, Verdict::Holds);

        let single = [DualVector::certified(&k, v(&[1.0, 1.0])).unwrap()];
        let r = k.is_total(&single).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let w = &r.witnesses[0];
        assert!(w.point.dot(&[1.0, 1.0]) >= -1e-12);
        assert!(!k.contains(&w.point).unwrap());

        let d = diamond();
        let facets: Vec<DualVector> =
            d.facets().iter().map(|f| DualVector::certified(&d, f.clone()).unwrap()).collect();
        assert_eq!(d.is_total(&facets).unwrap().verdict, Verdict::Holds);
        assert_eq!(d.is_total(&[]).unwrap_err(), Error::EmptyPhi);
    }

    #[test]
    fn certification_rejects_non_positive() {
        let k = PolyCone::orthant(2).unwrap();
        assert!(DualVector::certified(&k, v(&[1.0, -0.5])).is_err());
    }
}
