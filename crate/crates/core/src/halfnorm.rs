//! Sublinear functionals on an ordered space and their subdifferentials.
//!
//! Every order-dependent variant is evaluated as one linear program over the
//! facet description of the cone. The order relation `y >= x` becomes
//! `F y >= F x` with `F` the facet matrix, so the LPs stay in the ambient
//! coordinates with a few auxiliary variables for the norm epigraph.
//!
//! Subdifferentials come from LP duality rather than from the defining
//! condition `<y, u> <= p(y)` for all `y`:
//!
//! | variant            | dual set `D` (so that `p(x) = max_{u in D} <x, u>`) |
//! |--------------------|------------------------------------------------------|
//! | `Phi(phi)`         | `u in K'` and `phi - u in K'`                        |
//! | `Canonical(norm)`  | `u in K'` and `norm_dual(u) <= 1`                    |
//! | `NPlus(norm)`      | same as `Canonical`                                  |
//! | `OrderUnit(e)`     | `u in K'` and `<u, e> <= 1`                          |
//!
//! and the subdifferential at `x` is the face of `D` maximizing `<x, .>`.
//!
//! `NPlus` is the exception: `||x+||` matches `Canonical` only when the norm is
//! a lattice norm for the cone (always on orthants). Its subdifferential is the
//! slice of `D` at level `||x+||`, and an empty slice is reported as
//! [`Error::EmptySubdifferential`].

use serde::{Deserialize, Serialize};

use crate::cone::{DualVector, PolyCone};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{
    dot, enumerate_vertices, solve_lp, LinearConstraints, LpProblem, LpStatus, Sense, Vector,
    FEAS_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `sum_i w_i |x_i|`
    #[serde(alias = "l1")]
    WeightedL1,
    /// `max_i w_i |x_i|`
    #[serde(alias = "linf")]
    WeightedLInf,
}

/// The ambient norm of the ordered space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub kind: NormKind,
    pub weights: Vector,
}

impl NormSpec {
    pub fn new(kind: NormKind, weights: Vector) -> Result<Self> {
        if weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::InvalidArgument("norm weights must be strictly positive".into()));
        }
        Ok(Self { kind, weights })
    }

    pub fn l1(dim: usize) -> Self {
        Self { kind: NormKind::WeightedL1, weights: Vector::filled(dim, 1.0) }
    }

    pub fn linf(dim: usize) -> Self {
        Self { kind: NormKind::WeightedLInf, weights: Vector::filled(dim, 1.0) }
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let terms = x.iter().zip(self.weights.iter()).map(|(a, w)| w * a.abs());
        match self.kind {
            NormKind::WeightedL1 => terms.sum(),
            NormKind::WeightedLInf => terms.fold(0.0, f64::max),
        }
    }

    pub fn dual_eval(&self, u: &[f64]) -> f64 {
        let terms = u.iter().zip(self.weights.iter()).map(|(a, w)| a.abs() / w);
        match self.kind {
            NormKind::WeightedL1 => terms.fold(0.0, f64::max),
            NormKind::WeightedLInf => terms.sum(),
        }
    }

    /// Appends epigraph variables for `||y||` where `y` occupies columns
    /// `y_at..y_at + n` of a problem with `total` columns. Returns the
    /// objective row that equals the norm at the optimum.
    fn epigraph(&self, lp: &mut LpProblem, y_at: usize, aux_at: usize, total: usize) -> Vec<f64> {
        let n = self.dim();
        let mut objective = vec![0.0; total];
        match self.kind {
            NormKind::WeightedLInf => {
                // s >= +-w_i y_i
                for i in 0..n {
                    for sign in [1.0, -1.0] {
                        let mut row = vec![0.0; total];
                        row[aux_at] = 1.0;
                        row[y_at + i] = -sign * self.weights[i];
                        lp.geq(&row, 0.0);
                    }
                }
                objective[aux_at] = 1.0;
            }
            NormKind::WeightedL1 => {
                // t_i >= +-y_i
                for i in 0..n {
                    for sign in [1.0, -1.0] {
                        let mut row = vec![0.0; total];
                        row[aux_at + i] = 1.0;
                        row[y_at + i] = -sign;
                        lp.geq(&row, 0.0);
                    }
                    objective[aux_at + i] = self.weights[i];
                }
            }
        }
        objective
    }

    fn aux_count(&self) -> usize {
        match self.kind {
            NormKind::WeightedLInf => 1,
            NormKind::WeightedL1 => self.dim(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum HalfNormVariant {
    /// `inf { ||y|| : y >= x }`
    Canonical { norm: NormSpec },
    /// `inf { ||y||_r : y >= 0, y >= x }` with `||.||_r` the regularized norm.
    RegularGauge { norm: NormSpec },
    /// `inf { <y, phi> : y >= 0, y >= x }`
    Phi { phi: DualVector },
    /// `inf { lambda >= 0 : x <= lambda e }`
    OrderUnit { unit: Vector },
    /// `||x+||` on lattice cones.
    NPlus { norm: NormSpec },
    /// `||x||_2`, independent of the order.
    Euclidean,
}

impl HalfNormVariant {
    pub fn name(&self) -> &'static str {
        match self {
            HalfNormVariant::Canonical { .. } => "canonical",
            HalfNormVariant::RegularGauge { .. } => "regular_gauge",
            HalfNormVariant::Phi { .. } => "phi",
            HalfNormVariant::OrderUnit { .. } => "order_unit",
            HalfNormVariant::NPlus { .. } => "nplus",
            HalfNormVariant::Euclidean => "euclidean",
        }
    }
}

/// A sublinear functional bound to the cone that orders the space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfNormSpec {
    variant: HalfNormVariant,
    cone: PolyCone,
}

fn facet_rows(
    lp: &mut LpProblem,
    cone: &PolyCone,
    at: usize,
    total: usize,
    other: Option<(usize, f64)>,
    rhs_point: Option<&[f64]>,
) {
    // F y[at..] + s * F y[other..] >= F x (or 0)
    let n = cone.dim();
    for f in cone.facets() {
        let mut row = vec![0.0; total];
        for i in 0..n {
            row[at + i] = f[i];
        }
        if let Some((o, s)) = other {
            for i in 0..n {
                row[o + i] += s * f[i];
            }
        }
        let rhs = rhs_point.map_or(0.0, |x| dot(f, x));
        lp.geq(&row, rhs);
    }
}

fn majorant_optimum(lp: &LpProblem) -> Result<f64> {
    let r = solve_lp(lp)?;
    match r.status {
        LpStatus::Optimal => Ok(r.value),
        LpStatus::Infeasible => Err(Error::NotGenerating),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

/// `inf { <y, phi> : y >= 0, y >= x }` for any functional `phi`.
///
/// Bounded exactly when `phi` is positive on the cone; other functionals
/// yield [`Error::Unbounded`]. [`HalfNormSpec`] only admits positive ones.
pub fn phi_gauge(cone: &PolyCone, phi: &[f64], x: &[f64]) -> Result<f64> {
    let n = cone.dim();
    check_dim(n, phi.len())?;
    check_dim(n, x.len())?;
    let mut lp = LpProblem::minimize(Vector::from_vec(phi.to_vec()));
    facet_rows(&mut lp, cone, 0, n, None, None);
    facet_rows(&mut lp, cone, 0, n, None, Some(x));
    majorant_optimum(&lp)
}

/// `inf { ||y|| : y >= x }`, the distance from `-x` to the cone.
pub fn canonical_gauge(cone: &PolyCone, norm: &NormSpec, x: &[f64]) -> Result<f64> {
    let n = cone.dim();
    check_dim(n, x.len())?;
    let total = n + norm.aux_count();
    let mut lp = LpProblem::minimize(Vector::zeros(total));
    facet_rows(&mut lp, cone, 0, total, None, Some(x));
    lp.objective = Vector::from_vec(norm.epigraph(&mut lp, 0, n, total));
    majorant_optimum(&lp)
}

/// The regularization `||x||_r = inf { ||z|| : -z <= x <= z }`.
pub fn regularized_norm(cone: &PolyCone, norm: &NormSpec, x: &[f64]) -> Result<f64> {
    let n = cone.dim();
    check_dim(n, x.len())?;
    check_dim(n, norm.dim())?;
    let total = n + norm.aux_count();
    let mut lp = LpProblem::minimize(Vector::zeros(total));
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    facet_rows(&mut lp, cone, 0, total, None, Some(x));
    facet_rows(&mut lp, cone, 0, total, None, Some(&neg));
    lp.objective = Vector::from_vec(norm.epigraph(&mut lp, 0, n, total));
    majorant_optimum(&lp)
}

/// `inf { ||y||_r : y >= 0, y >= x }` as a single LP over `(y, z, aux)` with
/// `-z <= y <= z` standing in for the inner regularization.
pub fn regular_gauge(cone: &PolyCone, norm: &NormSpec, x: &[f64]) -> Result<f64> {
    let n = cone.dim();
    check_dim(n, x.len())?;
    let (y, z, aux) = (0, n, 2 * n);
    let total = 2 * n + norm.aux_count();
    let mut lp = LpProblem::minimize(Vector::zeros(total));
    facet_rows(&mut lp, cone, y, total, None, None);
    facet_rows(&mut lp, cone, y, total, None, Some(x));
    facet_rows(&mut lp, cone, z, total, Some((y, -1.0)), None);
    facet_rows(&mut lp, cone, z, total, Some((y, 1.0)), None);
    lp.objective = Vector::from_vec(norm.epigraph(&mut lp, z, aux, total));
    majorant_optimum(&lp)
}

/// `inf { lambda >= 0 : x <= lambda e }` by the facet formula
/// `max(0, max_f <x, f> / <e, f>)`.
pub fn order_unit_gauge(cone: &PolyCone, unit: &[f64], x: &[f64]) -> Result<f64> {
    check_dim(cone.dim(), x.len())?;
    check_dim(cone.dim(), unit.len())?;
    Ok(cone
        .facets()
        .iter()
        .map(|f| dot(f, x) / dot(f, unit))
        .fold(0.0, f64::max))
}

impl HalfNormSpec {
    pub fn new(variant: HalfNormVariant, cone: PolyCone) -> Result<Self> {
        let n = cone.dim();
        let variant = match variant {
            HalfNormVariant::Phi { phi } => {
                check_dim(n, phi.dim())?;
                if !cone.is_positive_functional(&phi.coords) {
                    return Err(Error::VariantPreconditionFailed(format!(
                        "phi = {} is not positive on the cone",
                        phi.coords
                    )));
                }
                HalfNormVariant::Phi { phi: DualVector::certified(&cone, phi.coords)? }
            }
            HalfNormVariant::OrderUnit { unit } => {
                check_dim(n, unit.dim())?;
                if !cone.is_order_unit(&unit)? {
                    return Err(Error::VariantPreconditionFailed(format!(
                        "{unit} is not an order unit"
                    )));
                }
                HalfNormVariant::OrderUnit { unit }
            }
            HalfNormVariant::NPlus { norm } => {
                check_dim(n, norm.dim())?;
                if !cone.is_lattice() {
                    return Err(Error::VariantPreconditionFailed(
                        "N+ needs a lattice (simplicial) cone".into(),
                    ));
                }
                HalfNormVariant::NPlus { norm }
            }
            HalfNormVariant::Canonical { norm } => {
                check_dim(n, norm.dim())?;
                HalfNormVariant::Canonical { norm }
            }
            HalfNormVariant::RegularGauge { norm } => {
                check_dim(n, norm.dim())?;
                HalfNormVariant::RegularGauge { norm }
            }
            HalfNormVariant::Euclidean => HalfNormVariant::Euclidean,
        };
        Ok(Self { variant, cone })
    }

    /// `p_phi` for a positive functional.
    pub fn phi(cone: &PolyCone, phi: &[f64]) -> Result<Self> {
        let phi = DualVector::uncertified(Vector::new(phi.to_vec())?);
        Self::new(HalfNormVariant::Phi { phi }, cone.clone())
    }

    pub fn variant(&self) -> &HalfNormVariant {
        &self.variant
    }

    pub fn cone(&self) -> &PolyCone {
        &self.cone
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let cone = &self.cone;
        let value = match &self.variant {
            HalfNormVariant::Euclidean => return Ok(dot(x, x).sqrt()),
            HalfNormVariant::Phi { phi } => phi_gauge(cone, &phi.coords, x)?,
            HalfNormVariant::Canonical { norm } => canonical_gauge(cone, norm, x)?,
            HalfNormVariant::RegularGauge { norm } => regular_gauge(cone, norm, x)?,
            HalfNormVariant::OrderUnit { unit } => order_unit_gauge(cone, unit, x)?,
            HalfNormVariant::NPlus { norm } => norm.eval(&cone.positive_part(x)?),
        };
        let scale = 1.0 + x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        if value.abs() <= FEAS_TOL * scale && cone.contains(&neg)? {
            return Ok(0.0);
        }
        Ok(value.max(0.0))
    }

    /// The dual set `D` with `p(x) = max_{u in D} <x, u>`; see the module docs.
    fn dual_set(&self) -> Result<(usize, LinearConstraints)> {
        let n = self.dim();
        let mut ineq = LinearConstraints::empty(n);
        let in_dual_cone = |ineq: &mut LinearConstraints, total: usize| {
            for g in self.cone.generators() {
                let mut row = vec![0.0; total];
                row[..n].copy_from_slice(g);
                ineq.push(&row, 0.0);
            }
        };
        match &self.variant {
            HalfNormVariant::Phi { phi } => {
                in_dual_cone(&mut ineq, n);
                for g in self.cone.generators() {
                    let row: Vec<f64> = g.iter().map(|v| -v).collect();
                    ineq.push(&row, -g.dot(&phi.coords));
                }
                Ok((0, ineq))
            }
            HalfNormVariant::OrderUnit { unit } => {
                in_dual_cone(&mut ineq, n);
                let row: Vec<f64> = unit.iter().map(|v| -v).collect();
                ineq.push(&row, -1.0);
                Ok((0, ineq))
            }
            HalfNormVariant::Canonical { norm } | HalfNormVariant::NPlus { norm } => {
                match norm.kind {
                    NormKind::WeightedL1 => {
                        in_dual_cone(&mut ineq, n);
                        // |u_i| <= w_i
                        for i in 0..n {
                            let mut row = vec![0.0; n];
                            row[i] = -1.0;
                            ineq.push(&row, -norm.weights[i]);
                            row[i] = 1.0;
                            ineq.push(&row, -norm.weights[i]);
                        }
                        Ok((0, ineq))
                    }
                    NormKind::WeightedLInf => {
                        // sum_i t_i / w_i <= 1 with t_i >= |u_i|
                        let total = 2 * n;
                        let mut ineq = LinearConstraints::empty(total);
                        in_dual_cone(&mut ineq, total);
                        for i in 0..n {
                            for sign in [1.0, -1.0] {
                                let mut row = vec![0.0; total];
                                row[n + i] = 1.0;
                                row[i] = -sign;
                                ineq.push(&row, 0.0);
                            }
                        }
                        let mut row = vec![0.0; total];
                        for i in 0..n {
                            row[n + i] = -1.0 / norm.weights[i];
                        }
                        ineq.push(&row, -1.0);
                        Ok((n, ineq))
                    }
                }
            }
            HalfNormVariant::RegularGauge { .. } | HalfNormVariant::Euclidean => {
                Err(Error::VariantUnsupported(self.variant.name().into()))
            }
        }
    }

    /// Constraint description of `dp(x)`.
    pub fn subdifferential(&self, x: &[f64]) -> Result<SubdiffDesc> {
        let n = self.dim();
        check_dim(n, x.len())?;
        if let HalfNormVariant::Euclidean = self.variant {
            let r = dot(x, x).sqrt();
            return Ok(if r > 0.0 {
                SubdiffDesc::Singleton(Vector::from_vec(x.iter().map(|v| v / r).collect()))
            } else {
                SubdiffDesc::Ball { center: Vector::zeros(n), radius: 1.0 }
            });
        }
        let (n_aux, ineq) = self.dual_set()?;
        let total = n + n_aux;
        let mut objective = vec![0.0; total];
        objective[..n].copy_from_slice(x);
        let mut lp = LpProblem::maximize(Vector::from_vec(objective.clone()));
        lp.ineq = ineq.clone();
        let dual = solve_lp(&lp)?;
        let top = match dual.status {
            LpStatus::Optimal => dual.value,
            LpStatus::Infeasible => return Err(Error::EmptySubdifferential),
            LpStatus::Unbounded => return Err(Error::Unbounded),
        };
        // dN+(x) sits at the level ||x+||, which the dual optimum reaches
        // only when the norm is a lattice norm for this cone.
        let level = match self.variant {
            HalfNormVariant::NPlus { .. } => {
                let target = self.eval(x)?;
                if top < target - 1e-9 * (1.0 + target.abs()) {
                    return Err(Error::EmptySubdifferential);
                }
                target
            }
            _ => top,
        };
        // The exposed face, with slack for the optimum's rounding.
        let mut face = ineq;
        face.push(&objective, level - 1e-10 * (1.0 + level.abs()));
        SubdiffDesc::polyhedral(n, n_aux, LinearConstraints::empty(total), face)
    }
}

/// A description of a subdifferential set supporting linear optimization.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubdiffDesc {
    /// `{u : exists t, eq(u, t), ineq(u, t)}` with `dim` functional and `n_aux` auxiliary columns.
    Polyhedral { dim: usize, n_aux: usize, eq: LinearConstraints, ineq: LinearConstraints },
    Singleton(Vector),
    /// Closed Euclidean ball.
    Ball { center: Vector, radius: f64 },
}

impl SubdiffDesc {
    /// Builds a polyhedral description, rejecting empty sets.
    pub fn polyhedral(
        dim: usize,
        n_aux: usize,
        eq: LinearConstraints,
        ineq: LinearConstraints,
    ) -> Result<Self> {
        let total = dim + n_aux;
        check_dim(total, eq.dim())?;
        check_dim(total, ineq.dim())?;
        let mut lp = LpProblem::minimize(Vector::zeros(total));
        lp.eq = eq.clone();
        lp.ineq = ineq.clone();
        if solve_lp(&lp)?.status == LpStatus::Infeasible {
            return Err(Error::EmptySubdifferential);
        }
        Ok(SubdiffDesc::Polyhedral { dim, n_aux, eq, ineq })
    }

    pub fn dim(&self) -> usize {
        match self {
            SubdiffDesc::Polyhedral { dim, .. } => *dim,
            SubdiffDesc::Singleton(v) => v.dim(),
            SubdiffDesc::Ball { center, .. } => center.dim(),
        }
    }

    /// Optimal value and an optimizing element.
    pub fn optimize(&self, c: &[f64], sense: Sense) -> Result<(f64, Vector)> {
        check_dim(self.dim(), c.len())?;
        match self {
            SubdiffDesc::Singleton(u) => Ok((u.dot(c), u.clone())),
            SubdiffDesc::Ball { center, radius } => {
                let norm = dot(c, c).sqrt();
                let dir = match sense {
                    Sense::Minimize => -1.0,
                    Sense::Maximize => 1.0,
                };
                let u = if norm > 0.0 {
                    center.axpy(dir * radius / norm, &Vector::from_vec(c.to_vec()))
                } else {
                    center.clone()
                };
                Ok((center.dot(c) + dir * radius * norm, u))
            }
            SubdiffDesc::Polyhedral { dim, n_aux, eq, ineq } => {
                let mut obj = c.to_vec();
                obj.resize(dim + n_aux, 0.0);
                let mut lp = LpProblem::new(Vector::from_vec(obj), sense);
                lp.eq = eq.clone();
                lp.ineq = ineq.clone();
                let r = solve_lp(&lp)?;
                match r.status {
                    LpStatus::Optimal => {
                        let p = r.point.expect("optimal point");
                        Ok((r.value, Vector::from_vec(p.as_slice()[..*dim].to_vec())))
                    }
                    LpStatus::Unbounded => Err(Error::Unbounded),
                    LpStatus::Infeasible => Err(Error::EmptySubdifferential),
                }
            }
        }
    }

    /// Vertices of a polyhedral description, projected to the functional
    /// coordinates. Singletons return their point; balls are rejected.
    pub fn vertices(&self) -> Result<Vec<Vector>> {
        match self {
            SubdiffDesc::Singleton(u) => Ok(vec![u.clone()]),
            SubdiffDesc::Ball { .. } => Err(Error::VariantUnsupported("ball vertices".into())),
            SubdiffDesc::Polyhedral { dim, eq, ineq, .. } => {
                let mut all = ineq.clone();
                for i in 0..eq.len() {
                    let row = eq.lhs.row(i);
                    all.push(row, eq.rhs[i]);
                    let neg: Vec<f64> = row.iter().map(|v| -v).collect();
                    all.push(&neg, -eq.rhs[i]);
                }
                let mut out: Vec<Vector> = Vec::new();
                for v in enumerate_vertices(&all)? {
                    let u = Vector::from_vec(v.as_slice()[..*dim].to_vec());
                    if out.iter().all(|w| w.max_abs_diff(&u) > 1e-8) {
                        out.push(u);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Optimal value of `<c, u>` over the described set.
pub fn optimize_over_subdiff(d: &SubdiffDesc, c: &[f64], sense: Sense) -> Result<f64> {
    d.optimize(c, sense).map(|(v, _)| v)
}
