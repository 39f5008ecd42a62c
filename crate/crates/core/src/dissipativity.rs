//! Dissipativity and the positive off-diagonal property.
//!
//! Pointwise checks ([`is_dissipative_at`], [`is_strictly_dissipative_at`])
//! are exact: one LP describes `dp(x)` and a second optimizes `<Ax, u>` over it.
//! The universal claim "for all x in the domain" is only ever sampled, so
//! [`certify_dissipative`] returns [`Verdict::Inconclusive`] when it finds no
//! violation. POD, by contrast, reduces to finitely many extreme pairs and is
//! decided exactly by [`has_pod`].

use serde::{Deserialize, Serialize};

use crate::cone::{DualVector, PolyCone, CONE_TOL};
use crate::error::{check_dim, Error, Result};
use crate::halfnorm::HalfNormSpec;
use crate::numerics::{
    dot, enumerate_vertices, solve_lp, LinearConstraints, LpProblem, LpStatus, Matrix, Sense,
    Vector, FEAS_TOL,
};
use crate::report::{Report, Verdict, Witness};
use crate::sampling::{self, SampleRng};

/// Dissipativity margins at or below this count as nonpositive.
pub const DISSIPATIVE_TOL: f64 = 1e-9;

/// POD margins at or above `-POD_TOL` count as nonnegative.
pub const POD_TOL: f64 = 1e-9;

/// Largest dimension for which domain vertices are enumerated exhaustively.
const VERTEX_ENUM_DIM: usize = 6;

/// The polyhedral set `{x : ineq.lhs x >= ineq.rhs, eq.lhs x = eq.rhs}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub ineq: LinearConstraints,
    pub eq: LinearConstraints,
}

impl Domain {
    pub fn new(ineq: LinearConstraints, eq: LinearConstraints) -> Result<Self> {
        check_dim(ineq.dim(), eq.dim())?;
        Ok(Self { ineq, eq })
    }

    pub fn dim(&self) -> usize {
        self.ineq.dim()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        self.ineq.ineq_violation(x).max(self.eq.eq_violation(x))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let scale = 1.0 + x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        self.violation(x) <= FEAS_TOL * scale
    }

    /// Inequality description of the domain intersected with `[-r, r]^n`.
    fn boxed(&self, r: f64) -> LinearConstraints {
        let n = self.dim();
        let mut all = self.ineq.clone();
        for i in 0..self.eq.len() {
            let row = self.eq.lhs.row(i);
            all.push(row, self.eq.rhs[i]);
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            all.push(&neg, -self.eq.rhs[i]);
        }
        for i in 0..n {
            let e = Vector::basis(n, i);
            all.push(&e, -r);
            all.push(&e.neg(), -r);
        }
        all
    }

    fn box_radius(&self) -> f64 {
        let m = self
            .ineq
            .rhs
            .iter()
            .chain(&self.eq.rhs)
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        1.0 + m
    }
}

/// A square matrix acting on an optional polyhedral domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinOp {
    matrix: Matrix,
    domain: Option<Domain>,
}

impl LinOp {
    /// Rejects non-square matrices, mismatched domains and empty domains.
    pub fn new(matrix: Matrix, domain: Option<Domain>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::MalformedProblem(format!(
                "operator matrix is {}x{}, expected square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if let Some(d) = &domain {
            check_dim(matrix.rows(), d.dim())?;
            let mut lp = LpProblem::minimize(Vector::zeros(d.dim()));
            lp.ineq = d.ineq.clone();
            lp.eq = d.eq.clone();
            if solve_lp(&lp)?.status == LpStatus::Infeasible {
                return Err(Error::EmptyDomain);
            }
        }
        Ok(Self { matrix, domain })
    }

    /// Operator defined on the whole space.
    pub fn full(matrix: Matrix) -> Result<Self> {
        Self::new(matrix, None)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.domain.as_ref().is_none_or(|d| d.contains(x))
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vector> {
        self.matrix.mul_vec(x)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        match &self.domain {
            Some(d) if !d.contains(x) => Err(Error::NotInDomain { violation: d.violation(x) }),
            _ => Ok(()),
        }
    }
}

/// `min { <Ax, u> : u in dp(x) }` and a minimizer.
pub fn dissipativity_margin(a: &LinOp, p: &HalfNormSpec, x: &[f64]) -> Result<(f64, Vector)> {
    check_dim(p.dim(), a.dim())?;
    a.check_point(x)?;
    let ax = a.apply(x)?;
    p.subdifferential(x)?.optimize(&ax, Sense::Minimize)
}

/// Whether some `u in dp(x)` has `<Ax, u> <= 0`, with the minimal pairing.
pub fn is_dissipative_at(a: &LinOp, p: &HalfNormSpec, x: &[f64]) -> Result<(bool, f64)> {
    let (m, _) = dissipativity_margin(a, p, x)?;
    Ok((m <= DISSIPATIVE_TOL, m))
}

/// Whether every `u in dp(x)` has `<Ax, u> <= 0`, with the maximal pairing.
pub fn is_strictly_dissipative_at(a: &LinOp, p: &HalfNormSpec, x: &[f64]) -> Result<(bool, f64)> {
    check_dim(p.dim(), a.dim())?;
    a.check_point(x)?;
    let ax = a.apply(x)?;
    let (m, _) = p.subdifferential(x)?.optimize(&ax, Sense::Maximize)?;
    Ok((m <= DISSIPATIVE_TOL, m))
}

/// Vertices of the domain clipped to a box, or of the box itself.
fn structural_points(a: &LinOp) -> Result<Vec<Vector>> {
    let n = a.dim();
    if n > VERTEX_ENUM_DIM {
        return Ok(Vec::new());
    }
    let boxed = match a.domain() {
        Some(d) => d.boxed(d.box_radius()),
        None => Domain::new(LinearConstraints::empty(n), LinearConstraints::empty(n))?.boxed(1.0),
    };
    enumerate_vertices(&boxed)
}

/// Extreme points of the clipped domain found by optimizing random objectives.
fn lp_vertex_pool(d: &Domain, rng: &mut SampleRng, count: usize) -> Result<Vec<Vector>> {
    let n = d.dim();
    let mut pool = Vec::new();
    for _ in 0..count {
        let mut lp = LpProblem::minimize(sampling::uniform_box(rng, n, 1.0));
        lp.ineq = d.boxed(d.box_radius());
        let r = solve_lp(&lp)?;
        if r.status == LpStatus::Optimal {
            pool.push(r.point.expect("optimal point"));
        }
    }
    Ok(pool)
}

/// Random convex combination of up to three pool points.
fn pool_point(rng: &mut SampleRng, pool: &[Vector]) -> Vector {
    use rand::RngExt;
    let k = rng.random_range(1..=pool.len().min(3));
    let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut x = Vector::zeros(pool[0].dim());
    for w in weights {
        let i = rng.random_range(0..pool.len());
        x = x.axpy(w, &pool[i]);
    }
    x
}

/// Test points in discovery order: generators (and their negatives) inside
/// the domain, domain vertices, then `n_samples` seeded domain points.
fn test_points(a: &LinOp, cone: &PolyCone, n_samples: usize, seed: u64) -> Result<Vec<Vector>> {
    let mut points = Vec::new();
    for g in cone.generators() {
        for x in [g.clone(), g.neg()] {
            if a.in_domain(&x) {
                points.push(x);
            }
        }
    }
    points.extend(structural_points(a)?.into_iter().filter(|v| a.in_domain(v)));
    let mut rng = sampling::rng(seed);
    match a.domain() {
        None => {
            points.extend((0..n_samples).map(|_| sampling::sparse_box(&mut rng, a.dim(), 1.0, 0.2)))
        }
        Some(d) => {
            let mut pool = structural_points(a)?;
            if pool.is_empty() {
                pool = lp_vertex_pool(d, &mut rng, 2 * a.dim() + 4)?;
            }
            if !pool.is_empty() {
                points.extend((0..n_samples).map(|_| pool_point(&mut rng, &pool)));
            }
        }
    }
    Ok(points)
}

/// Samples `is_dissipative_at` over the domain.
///
/// Fails with every violating point as a witness; otherwise the verdict is
/// inconclusive, because passing finitely many points proves nothing about the
/// rest of the domain.
pub fn certify_dissipative(
    a: &LinOp,
    p: &HalfNormSpec,
    n_samples: usize,
    seed: u64,
) -> Result<Report> {
    check_dim(p.dim(), a.dim())?;
    let points = test_points(a, p.cone(), n_samples, seed)?;
    let mut report = Report::new(
        format!("{}-dissipativity: min <Ax, u> over dp(x) <= 0", p.variant().name()),
        Verdict::Inconclusive,
        DISSIPATIVE_TOL,
    );
    let mut worst = f64::NEG_INFINITY;
    for x in &points {
        let (m, u) = dissipativity_margin(a, p, x)?;
        worst = worst.max(m);
        if m > DISSIPATIVE_TOL {
            report.witnesses.push(Witness::new(x.clone(), Some(DualVector::uncertified(u)), m));
        }
    }
    report.samples_used = points.len();
    report.worst_margin = points.is_empty().then_some(0.0).or(Some(worst));
    if report.witnesses.is_empty() {
        report.notes.push(format!(
            "no violation on {} points; sampling cannot prove dissipativity on the whole domain",
            points.len()
        ));
    } else {
        report.verdict = Verdict::Fails;
    }
    Ok(report)
}

/// Extreme pairs `(g, f)` of `K x K'` with `<g, f> = 0`.
fn orthogonal_pairs<'a>(
    cone: &'a PolyCone,
    generators: &'a [Vector],
) -> impl Iterator<Item = (&'a Vector, &'a Vector)> + 'a {
    generators.iter().flat_map(move |g| {
        cone.facets().iter().filter(move |f| dot(g, f) <= CONE_TOL).map(move |f| (g, f))
    })
}

fn pod_report(label: &str, a: &Matrix, cone: &PolyCone, generators: &[Vector]) -> Result<Report> {
    let mut report = Report::new(label, Verdict::Holds, POD_TOL);
    let mut worst = f64::INFINITY;
    let mut pairs = 0;
    for (g, f) in orthogonal_pairs(cone, generators) {
        pairs += 1;
        let m = dot(&a.mul_vec(g)?, f);
        worst = worst.min(m);
        if m < -POD_TOL {
            let phi = DualVector::certified(cone, f.clone())?;
            report.witnesses.push(Witness::new(g.clone(), Some(phi), m));
        }
    }
    report.samples_used = pairs;
    report.worst_margin = (pairs > 0).then_some(worst);
    if !report.witnesses.is_empty() {
        report.verdict = Verdict::Fails;
    }
    Ok(report)
}

/// Decides POD exactly on extreme pairs of `K` and `K'`.
///
/// When the domain does not contain `K`, the verdict still concerns the
/// matrix on all of `K`; a partial part restricted to the generators inside
/// the domain is attached for comparison.
pub fn has_pod(a: &LinOp, cone: &PolyCone) -> Result<Report> {
    check_dim(cone.dim(), a.dim())?;
    let label = "POD: <Ag, f> >= 0 for extreme g in K, f in K' with <g, f> = 0";
    let mut report = pod_report(label, a.matrix(), cone, cone.generators())?;
    let inside: Vec<Vector> =
        cone.generators().iter().filter(|g| a.in_domain(g)).cloned().collect();
    if inside.len() < cone.generators().len() {
        let partial = pod_report(
            "partial POD over generators inside the domain",
            a.matrix(),
            cone,
            &inside,
        )?;
        report.notes.push(format!(
            "domain excludes {} of {} generators; the verdict is for the matrix on all of K",
            cone.generators().len() - inside.len(),
            cone.generators().len()
        ));
        report.parts.push(partial);
    }
    Ok(report)
}

/// Metzler sign test: every off-diagonal entry is nonnegative.
pub fn pod_matrix_characterization(a: &Matrix) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::MalformedProblem("matrix must be square".into()));
    }
    let n = a.rows();
    Ok((0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] >= -1e-12)))
}
