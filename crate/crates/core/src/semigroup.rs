//! Matrix semigroups `T(t)` built from a generator, and the checks run on them.
//!
//! `T(t)` comes either from the backward-Euler formula
//! `(I - (t/n) A)^{-n}` or from the dense matrix exponential. Positivity of an
//! operator on a polyhedral cone is decided exactly on the generators;
//! contractivity with respect to a half-norm is sampled.
//!
//! The two theorem pipelines combine a sampled hypothesis with a conclusion:
//! a failing conclusion is `Fails`; otherwise an unmet hypothesis makes the
//! instance `Vacuous`; otherwise the conclusion's own verdict stands.

use serde::{Deserialize, Serialize};

use crate::cone::{DualVector, PolyCone, CONE_TOL};
use crate::dissipativity::{certify_dissipative, LinOp};
use crate::error::{check_dim, Error, Result};
use crate::halfnorm::{HalfNormSpec, HalfNormVariant};
use crate::numerics::{dot, fmt_real, matrix_exp, Lu, Matrix, Vector};
use crate::report::{Report, Verdict, Witness};
use crate::sampling;

/// Slack for `p(Tx) <= p(x)`; looser than LP tolerances because it composes
/// two evaluations and a linear solve.
pub const CONTRACTIVE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Expm,
    Both,
}

impl Method {
    fn uses_euler(self) -> bool {
        matches!(self, Method::Euler | Method::Both)
    }

    fn uses_expm(self) -> bool {
        matches!(self, Method::Expm | Method::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupConfig {
    pub t_grid: Vec<f64>,
    pub euler_steps: usize,
    pub method: Method,
}

impl SemigroupConfig {
    /// Validates a nonempty, sorted grid of finite nonnegative times.
    pub fn new(t_grid: Vec<f64>, euler_steps: usize, method: Method) -> Result<Self> {
        if t_grid.is_empty() {
            return Err(Error::Empty("t_grid"));
        }
        if t_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("t_grid"));
        }
        if t_grid.iter().any(|&t| t < 0.0) {
            return Err(Error::InvalidArgument("t_grid entries must be nonnegative".into()));
        }
        if t_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("t_grid must be sorted".into()));
        }
        if euler_steps == 0 {
            return Err(Error::InvalidArgument("euler_steps must be at least 1".into()));
        }
        Ok(Self { t_grid, euler_steps, method })
    }
}

impl Default for SemigroupConfig {
    fn default() -> Self {
        Self { t_grid: vec![0.1, 0.5, 1.0, 2.0, 5.0], euler_steps: 64, method: Method::Expm }
    }
}

fn resolvent_lu(a: &LinOp, lambda: f64, step: usize) -> Result<Lu> {
    let m = Matrix::identity(a.dim()).sub(&a.matrix().scale(lambda))?;
    Lu::factorize(&m).map_err(|e| match e {
        Error::Singular { .. } => Error::SingularResolvent { lambda, step },
        other => other,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")))
    }
}

/// Solves `(I - lambda A) x = y`.
pub fn resolvent_apply(a: &LinOp, lambda: f64, y: &[f64]) -> Result<Vector> {
    check_lambda(lambda)?;
    check_dim(a.dim(), y.len())?;
    resolvent_lu(a, lambda, 1)?.solve(y)
}

/// `(I - lambda A)^{-1}` as a dense matrix.
pub fn resolvent_matrix(a: &LinOp, lambda: f64) -> Result<Matrix> {
    check_lambda(lambda)?;
    resolvent_lu(a, lambda, 1)?.solve_matrix(&Matrix::identity(a.dim()))
}

fn check_euler(t: f64, n: usize) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(())
}

/// `(I - (t/n) A)^{-n} x`, factorizing once.
pub fn euler_power(a: &LinOp, t: f64, n: usize, x: &[f64]) -> Result<Vector> {
    check_euler(t, n)?;
    check_dim(a.dim(), x.len())?;
    let mut y = Vector::from_vec(x.to_vec());
    if t == 0.0 {
        return Ok(y);
    }
    let lu = resolvent_lu(a, t / n as f64, 1)?;
    for _ in 0..n {
        y = lu.solve(&y)?;
    }
    Ok(y)
}

/// `(I - (t/n) A)^{-n}` as a dense matrix.
pub fn euler_matrix(a: &LinOp, t: f64, n: usize) -> Result<Matrix> {
    check_euler(t, n)?;
    let mut m = Matrix::identity(a.dim());
    if t == 0.0 {
        return Ok(m);
    }
    let lu = resolvent_lu(a, t / n as f64, 1)?;
    for _ in 0..n {
        m = lu.solve_matrix(&m)?;
    }
    Ok(m)
}

/// `T(t)` by the requested method; `Both` is not a single matrix and is rejected.
pub fn semigroup_matrix(a: &LinOp, t: f64, method: Method, euler_steps: usize) -> Result<Matrix> {
    match method {
        Method::Euler => euler_matrix(a, t, euler_steps),
        Method::Expm => matrix_exp(a.matrix(), t),
        Method::Both => Err(Error::InvalidArgument("pick euler or expm".into())),
    }
}

/// Exact positivity test: `T g` lies in `K` for every generator `g`.
///
/// The worst margin is the smallest facet inner product over all `T g`.
pub fn is_positive_operator(t: &Matrix, cone: &PolyCone) -> Result<Report> {
    if !t.is_square() {
        return Err(Error::MalformedProblem("operator must be square".into()));
    }
    check_dim(cone.dim(), t.rows())?;
    let mut report = Report::new("positivity: <T g, f> >= 0 on generators", Verdict::Holds, CONE_TOL);
    let mut worst = f64::INFINITY;
    for g in cone.generators() {
        let tg = t.mul_vec(g)?;
        for f in cone.facets() {
            let m = dot(&tg, f);
            worst = worst.min(m);
            if m < -CONE_TOL {
                let phi = DualVector::certified(cone, f.clone())?;
                report.witnesses.push(Witness::new(g.clone(), Some(phi), m));
            }
        }
    }
    report.samples_used = cone.generators().len();
    report.worst_margin = Some(worst);
    if !report.witnesses.is_empty() {
        report.verdict = Verdict::Fails;
    }
    Ok(report)
}

/// Samples `p(T x) <= p(x) + CONTRACTIVE_TOL` on generators, their
/// negatives and `n_samples` seeded points. The margin is `p(Tx) - p(x)`.
pub fn is_p_contractive(
    t: &Matrix,
    p: &HalfNormSpec,
    n_samples: usize,
    seed: u64,
) -> Result<Report> {
    let n = p.dim();
    check_dim(n, t.rows())?;
    check_dim(n, t.cols())?;
    let mut points: Vec<Vector> =
        p.cone().generators().iter().flat_map(|g| [g.clone(), g.neg()]).collect();
    let mut rng = sampling::rng(seed);
    for i in 0..n_samples {
        points.push(if i % 2 == 0 {
            sampling::uniform_box(&mut rng, n, 1.0)
        } else {
            sampling::sparse_box(&mut rng, n, 1.0, 0.3)
        });
    }
    let mut report = Report::new(
        format!("{}-contractivity: p(Tx) - p(x) <= 0", p.variant().name()),
        Verdict::Inconclusive,
        CONTRACTIVE_TOL,
    );
    let mut worst = f64::NEG_INFINITY;
    for x in &points {
        let m = p.eval(&t.mul_vec(x)?)? - p.eval(x)?;
        worst = worst.max(m);
        if m > CONTRACTIVE_TOL {
            report.witnesses.push(Witness::new(x.clone(), None, m));
        }
    }
    report.samples_used = points.len();
    report.worst_margin = Some(worst);
    if report.witnesses.is_empty() {
        report.notes.push("sampled; not a proof of contractivity".into());
    } else {
        report.verdict = Verdict::Fails;
    }
    Ok(report)
}

/// Three-valued verdict of a theorem instance.
fn theorem_report(label: String, hypothesis: Report, conclusion: Report) -> Report {
    let hyp_ok = hypothesis.verdict.passed();
    let verdict = if conclusion.verdict.is_failure() {
        Verdict::Fails
    } else if !hyp_ok {
        Verdict::Vacuous
    } else {
        conclusion.verdict
    };
    let mut report = Report::new(label, verdict, conclusion.tolerance);
    report.samples_used = hypothesis.samples_used + conclusion.samples_used;
    report.worst_margin = conclusion.worst_margin;
    match (hyp_ok, conclusion.verdict.is_failure()) {
        (true, true) => report.notes.push(
            "conclusion fails although no hypothesis violation was sampled: \
             the hypothesis fails off-sample or the theorem is contradicted"
                .into(),
        ),
        (false, true) => report
            .notes
            .push("hypothesis unmet, so the failing conclusion does not contradict the theorem".into()),
        (false, false) => {
            report.notes.push("hypothesis unmet; the conclusion holds regardless".into())
        }
        (true, false) => {}
    }
    report.witnesses = conclusion.witnesses.clone();
    report.parts = vec![relabel(hypothesis, "hypothesis: "), relabel(conclusion, "conclusion: ")];
    report
}

fn relabel(mut r: Report, prefix: &str) -> Report {
    r.label = format!("{prefix}{}", r.label);
    r
}

/// Dissipativity for `p_phi` should make `(I - lambda A)^{-1}` `p_phi`-contractive.
///
/// The resolvent is always built and checked, so an unmet hypothesis with a
/// passing conclusion is reported as vacuous rather than skipped.
pub fn check_theorem_contra(
    a: &LinOp,
    cone: &PolyCone,
    phi: &DualVector,
    lambda: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Report> {
    check_lambda(lambda)?;
    let p = HalfNormSpec::new(HalfNormVariant::Phi { phi: phi.clone() }, cone.clone())?;
    let hypothesis = certify_dissipative(a, &p, n_samples, seed)?;
    let r = resolvent_matrix(a, lambda)?;
    let conclusion = is_p_contractive(&r, &p, n_samples, seed.wrapping_add(1))?;
    Ok(theorem_report(
        format!("resolvent contractivity, phi = {}, lambda = {}", phi.coords, fmt_real(lambda)),
        hypothesis,
        conclusion,
    ))
}

/// Dissipativity for every `p_phi` in a total set should make `T(t)` positive.
pub fn check_positivity_via_total_set(
    a: &LinOp,
    phis: &[DualVector],
    cone: &PolyCone,
    cfg: &SemigroupConfig,
    n_samples: usize,
    seed: u64,
) -> Result<Report> {
    check_dim(cone.dim(), a.dim())?;
    let total = cone.is_total(phis)?;
    let mut hyp = Report::new("dissipativity for every phi in a total set", Verdict::Inconclusive, 0.0);
    let total_ok = total.verdict.passed();
    hyp.parts.push(total);
    for (i, phi) in phis.iter().enumerate() {
        let p = HalfNormSpec::new(HalfNormVariant::Phi { phi: phi.clone() }, cone.clone())?;
        let mut r = certify_dissipative(a, &p, n_samples, seed.wrapping_add(i as u64))?;
        r.label = format!("phi = {}: {}", phi.coords, r.label);
        hyp.parts.push(r);
    }
    hyp.samples_used = hyp.parts.iter().map(|r| r.samples_used).sum();
    hyp.tolerance = hyp.parts.last().map_or(0.0, |r| r.tolerance);
    if !total_ok || hyp.parts.iter().any(|r| r.verdict.is_failure()) {
        hyp.verdict = Verdict::Fails;
    }

    let mut concl = Report::new("positivity of T(t) on the grid", Verdict::Holds, CONE_TOL);
    let mut earliest: Option<f64> = None;
    let mut worst = f64::INFINITY;
    for &t in &cfg.t_grid {
        let mut methods = Vec::new();
        if cfg.method.uses_expm() {
            methods.push((Method::Expm, "expm"));
        }
        if cfg.method.uses_euler() {
            methods.push((Method::Euler, "euler"));
        }
        for (m, name) in methods {
            let tm = semigroup_matrix(a, t, m, cfg.euler_steps)?;
            let mut r = is_positive_operator(&tm, cone)?;
            r.label = format!("t = {} ({name}): {}", fmt_real(t), r.label);
            if r.verdict.is_failure() && earliest.is_none() {
                earliest = Some(t);
            }
            worst = worst.min(r.worst_margin.unwrap_or(0.0));
            concl.samples_used += r.samples_used;
            concl.parts.push(r);
        }
    }
    concl.worst_margin = Some(worst);
    if let Some(t) = earliest {
        concl.verdict = Verdict::Fails;
        concl.notes.push(format!("earliest failing t = {}", fmt_real(t)));
        concl.witnesses = concl
            .parts
            .iter()
            .find(|r| r.verdict.is_failure())
            .map(|r| r.witnesses.clone())
            .unwrap_or_default();
    }
    Ok(theorem_report("positivity via a total set".into(), hyp, concl))
}
