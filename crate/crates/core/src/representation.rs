//! Positive functionals as nonnegative measures on a finite state space.
//!
//! With an order unit `u`, the states are the facet normals of `K` rescaled
//! so that `<u, w> = 1`. Evaluating at the states embeds `x` into functions on
//! the state space, and the embedding is bipositive because the states are
//! exactly the facets. Every positive functional is a nonnegative combination
//! of states; the weights form the measure.
//!
//! Each representation has total mass `phi(u)` (evaluate at `u`), so the
//! minimal-mass choice does not single out one measure on non-simplicial
//! cones. The LP's deterministic pivoting picks one.
//!
//! Order density of the embedded space in `C(Omega)` has no content for a finite
//! state space; injectivity of the embedding (the states span the dual) is
//! what holds here.

use serde::Serialize;

use crate::cone::{DualVector, PolyCone};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, solve_lp, LpProblem, LpStatus, Vector};

/// Residual allowed when reproducing a functional from its measure.
pub const REPRESENT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateSpace {
    states: Vec<DualVector>,
    unit: Vector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measure {
    pub weights: Vec<f64>,
}

impl Measure {
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl StateSpace {
    pub fn states(&self) -> &[DualVector] {
        &self.states
    }

    pub fn unit(&self) -> &Vector {
        &self.unit
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.unit.dim()
    }

    /// `sum_w mu_w * w`, the functional a measure represents.
    pub fn functional(&self, mu: &Measure) -> Result<Vector> {
        check_dim(self.len(), mu.weights.len())?;
        let mut v = Vector::zeros(self.dim());
        for (w, s) in mu.weights.iter().zip(&self.states) {
            v = v.axpy(*w, &s.coords);
        }
        Ok(v)
    }
}

/// States of `K` normalized against the order unit `u`.
pub fn build_states(cone: &PolyCone, unit: &Vector) -> Result<StateSpace> {
    check_dim(cone.dim(), unit.dim())?;
    if !cone.is_order_unit(unit)? {
        return Err(Error::NotOrderUnit);
    }
    let states = cone
        .facets()
        .iter()
        .map(|f| DualVector::certified(cone, f.scale(1.0 / dot(f, unit))))
        .collect::<Result<Vec<_>>>()?;
    Ok(StateSpace { states, unit: unit.clone() })
}

/// `(<x, w>)` over the states.
pub fn embed(space: &StateSpace, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(space.dim(), x.len())?;
    Ok(space.states.iter().map(|s| s.apply(x)).collect())
}

/// Nonnegative weights with `sum_w mu_w * w = phi`, minimizing total mass.
pub fn represent_functional(space: &StateSpace, phi: &DualVector) -> Result<Measure> {
    let n = space.dim();
    check_dim(n, phi.dim())?;
    let k = space.len();
    let mut lp = LpProblem::minimize(Vector::filled(k, 1.0));
    for i in 0..n {
        let row: Vec<f64> = space.states.iter().map(|s| s.coords[i]).collect();
        lp.equal(&row, phi.coords[i]);
    }
    for j in 0..k {
        lp.geq(&Vector::basis(k, j), 0.0);
    }
    let r = solve_lp(&lp)?;
    if r.status != LpStatus::Optimal {
        let residual = phi.coords.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        return Err(Error::NotRepresentable { residual });
    }
    let weights: Vec<f64> = r
        .point
        .expect("optimal point")
        .iter()
        .map(|&w| if w < 0.0 && w >= -1e-12 { 0.0 } else { w })
        .collect();
    if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
        return Err(Error::NotRepresentable { residual: -w });
    }
    let mu = Measure { weights };
    let residual = space.functional(&mu)?.max_abs_diff(&phi.coords);
    let scale = 1.0 + phi.coords.norm_inf();
    if residual > REPRESENT_TOL * scale || residual.is_nan() {
        return Err(Error::NotRepresentable { residual });
    }
    Ok(mu)
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

    fn coords(space: &StateSpace) -> Vec<Vec<f64>> {
        let mut s: Vec<Vec<f64>> = space.states().iter().map(|s| s.coords.to_vec()).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    #[test]
    fn state_examples() {
        let s = build_states(&PolyCone::orthant(2).unwrap(), &v(&[1.0, 1.0])).unwrap();
        assert_eq!(coords(&s), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);

        let s = build_states(&diamond(), &v(&[1.0, 0.0])).unwrap();
        let c = coords(&s);
        assert!(v(&c[0]).max_abs_diff(&v(&[1.0, 1.0])) < 1e-12);
        assert!(v(&c[1]).max_abs_diff(&v(&[1.0, -1.0])) < 1e-12);

        let s = build_states(&PolyCone::orthant(3).unwrap(), &v(&[2.0, 1.0, 1.0])).unwrap();
        assert_eq!(coords(&s), vec![vec![0.5, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);

        let err = build_states(&PolyCone::orthant(2).unwrap(), &v(&[1.0, 0.0])).unwrap_err();
        assert_eq!(err, Error::NotOrderUnit);
    }

    #[test]
    fn embed_examples() {
        let s = build_states(&diamond(), &v(&[1.0, 0.0])).unwrap();
        assert!(embed(&s, &[1.0, 0.0]).unwrap().iter().all(|e| (e - 1.0).abs() < 1e-12));
        let mut e = embed(&s, &[0.0, 1.0]).unwrap();
        e.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] + 1.0).abs() < 1e-12);

        let s = build_states(&PolyCone::orthant(2).unwrap(), &v(&[1.0, 1.0])).unwrap();
        assert_eq!(embed(&s, &[1.0, -2.0]).unwrap(), vec![1.0, -2.0]);
        assert!(embed(&s, &[1.0]).is_err());
    }

    #[test]
    fn measure_examples() {
        let k = PolyCone::orthant(2).unwrap();
        let s = build_states(&k, &v(&[1.0, 1.0])).unwrap();
        let phi = DualVector::certified(&k, v(&[2.0, 3.0])).unwrap();
        let mu = represent_functional(&s, &phi).unwrap();
        assert!(s.functional(&mu).unwrap().max_abs_diff(&phi.coords) < 1e-12);
        assert!((mu.total_mass() - 5.0).abs() < 1e-12);

        let k = diamond();
        let s = build_states(&k, &v(&[1.0, 0.0])).unwrap();
        let phi = DualVector::certified(&k, v(&[3.0, 1.0])).unwrap();
        let mu = represent_functional(&s, &phi).unwrap();
        let mut w = mu.weights.clone();
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((w[0] - 2.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);

        let zero = DualVector::uncertified(Vector::zeros(2));
        assert!(represent_functional(&s, &zero).unwrap().weights.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn non_positive_functional_is_not_representable() {
        let k = PolyCone::orthant(2).unwrap();
        let s = build_states(&k, &v(&[1.0, 1.0])).unwrap();
        let phi = DualVector::uncertified(v(&[1.0, -1.0]));
        assert!(matches!(
            represent_functional(&s, &phi).unwrap_err(),
            Error::NotRepresentable { .. }
        ));
    }
}
