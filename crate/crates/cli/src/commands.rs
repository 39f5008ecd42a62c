//! Subcommand bodies. Each returns the checks it ran plus free-form details;
//! `main` turns them into an exit code and a `RunReport`.

use anyhow::Result;
use serde_json::{json, Value};

use conesemi::cone::DualVector;
use conesemi::dirichlet::{convergence_study, verify_example, Grid, Profile};
use conesemi::dissipativity::{certify_dissipative, has_pod};
use conesemi::halfnorm::HalfNormSpec;
use conesemi::numerics::fmt_real;
use conesemi::report::{Report, Verdict};
use conesemi::representation::{build_states, represent_functional};
use conesemi::semigroup::{
    check_positivity_via_total_set, check_theorem_contra, is_p_contractive, is_positive_operator,
    semigroup_matrix, Method, SemigroupConfig,
};
use conesemi::Error;

use crate::problem::ProblemFile;

/// Resolvent parameter used when the file gives none.
pub const DEFAULT_LAMBDA: f64 = 0.5;

pub struct Outcome {
    pub checks: Vec<Report>,
    pub details: Value,
    /// Extra human-readable lines printed after the checks.
    pub text: Vec<String>,
}

impl Outcome {
    fn checks(checks: Vec<Report>) -> Self {
        Self { checks, details: Value::Null, text: Vec::new() }
    }

    /// Fails if any check fails; holds only if all hold; vacuous only if all are.
    pub fn verdict(&self) -> Verdict {
        let vs: Vec<Verdict> = self.checks.iter().map(|c| c.verdict).collect();
        if vs.contains(&Verdict::Fails) {
            Verdict::Fails
        } else if !vs.is_empty() && vs.iter().all(|v| *v == Verdict::Holds) {
            Verdict::Holds
        } else if !vs.is_empty() && vs.iter().all(|v| *v == Verdict::Vacuous) {
            Verdict::Vacuous
        } else {
            Verdict::Inconclusive
        }
    }
}

pub struct Run {
    pub seed: u64,
    pub samples: usize,
}

pub fn check_pod(p: &ProblemFile) -> Result<Outcome> {
    let cone = p.cone()?;
    let a = p.operator(cone.dim())?;
    Ok(Outcome::checks(vec![has_pod(&a, &cone)?]))
}

pub fn check_dissipative(p: &ProblemFile, run: &Run) -> Result<Outcome> {
    let cone = p.cone()?;
    let hn = p.halfnorm(&cone)?;
    let a = p.operator(cone.dim())?;
    Ok(Outcome::checks(vec![certify_dissipative(&a, &hn, run.samples, run.seed)?]))
}

pub fn simulate(p: &ProblemFile, run: &Run) -> Result<Outcome> {
    let cone = p.cone()?;
    let a = p.operator(cone.dim())?;
    let (cfg, lambda) = p.semigroup()?;
    let phis = p.phi_set(&cone)?;
    let phi = p
        .phi()?
        .map(|v| DualVector::certified(&cone, v))
        .transpose()
        .map_err(|e| anyhow::anyhow!("field `phi`: {e}"))?;

    let mut checks = Vec::new();
    if let Some(phi) = &phi {
        let lambda = lambda.unwrap_or(DEFAULT_LAMBDA);
        checks.push(check_theorem_contra(&a, &cone, phi, lambda, run.samples, run.seed)?);
    }
    checks.push(check_positivity_via_total_set(&a, &phis, &cone, &cfg, run.samples, run.seed)?);

    let contra_norm = match &phi {
        Some(phi) => Some(HalfNormSpec::phi(&cone, &phi.coords)?),
        None => None,
    };
    let method = match cfg.method {
        Method::Both => Method::Expm,
        m => m,
    };
    let mut rows = Vec::new();
    let mut text = vec![format!(
        "{:>10}  {:>16}  {:>18}",
        "t",
        "positivity min",
        if contra_norm.is_some() { "p(Tx) - p(x) max" } else { "" }
    )
    .trim_end()
    .to_string()];
    for &t in &cfg.t_grid {
        let tm = semigroup_matrix(&a, t, method, cfg.euler_steps)?;
        let pos = is_positive_operator(&tm, &cone)?;
        let contra = match &contra_norm {
            Some(pn) => Some(is_p_contractive(&tm, pn, run.samples, run.seed)?),
            None => None,
        };
        let pos_margin = pos.worst_margin.unwrap_or(0.0);
        let contra_margin = contra.as_ref().and_then(|r| r.worst_margin);
        text.push(format!(
            "{:>10}  {:>16}  {:>18}",
            fmt_real(t),
            fmt_real(pos_margin),
            contra_margin.map(fmt_real).unwrap_or_default()
        )
        .trim_end()
        .to_string());
        rows.push(json!({
            "t": t,
            "positivity_margin": pos_margin,
            "positive": pos.verdict.passed(),
            "contractivity_margin": contra_margin,
        }));
    }
    let details = json!({
        "method": method,
        "euler_steps": cfg.euler_steps,
        "per_t": rows,
    });
    Ok(Outcome { checks, details, text })
}

/// A unit that is not an order unit, or a functional with no representation,
/// is a failing verdict rather than an error.
pub fn represent(p: &ProblemFile) -> Result<Outcome> {
    let cone = p.cone()?;
    let unit = p.unit()?;
    let phi_v = p.phi()?.ok_or_else(|| anyhow::anyhow!("missing field `phi`"))?;
    let label = "representation of phi by a nonnegative measure on the states";
    let failed = |e: Error| {
        let r = Report::new(label, Verdict::Fails, conesemi::representation::REPRESENT_TOL)
            .with_note(e.to_string());
        Ok(Outcome { checks: vec![r], details: json!({ "reason": e.to_string() }), text: Vec::new() })
    };
    let space = match build_states(&cone, &unit) {
        Ok(s) => s,
        Err(e @ Error::NotOrderUnit) => return failed(e),
        Err(e) => return Err(e.into()),
    };
    let phi = DualVector::certified(&cone, phi_v).map_err(|e| anyhow::anyhow!("field `phi`: {e}"))?;
    let mu = match represent_functional(&space, &phi) {
        Ok(mu) => mu,
        Err(e @ Error::NotRepresentable { .. }) => return failed(e),
        Err(e) => return Err(e.into()),
    };
    let residual = space.functional(&mu)?.max_abs_diff(&phi.coords);
    let mut r = Report::new(label, Verdict::Holds, conesemi::representation::REPRESENT_TOL);
    r.worst_margin = Some(residual);
    r.samples_used = space.len();
    let mut text = vec!["states (normalized against the unit) and weights:".to_string()];
    for (s, w) in space.states().iter().zip(&mu.weights) {
        text.push(format!("  w = {}  mu = {}", s.coords, fmt_real(*w)));
    }
    text.push(format!("total mass {}  residual {}", fmt_real(mu.total_mass()), fmt_real(residual)));
    let details = json!({
        "states": space.states().iter().map(|s| s.coords.to_vec()).collect::<Vec<_>>(),
        "weights": mu.weights,
        "total_mass": mu.total_mass(),
        "residual": residual,
    });
    Ok(Outcome { checks: vec![r], details, text })
}

pub fn dirichlet_demo(ns: &[usize], cfg: &SemigroupConfig, run: &Run) -> Result<Outcome> {
    let mut checks = Vec::new();
    for &n in ns {
        let grid = Grid::new(n)?;
        checks.push(verify_example(&grid, cfg, run.samples, run.seed)?);
    }
    let mut tables = Vec::new();
    let mut text = Vec::new();
    for profile in [Profile::One, Profile::Sine] {
        let t = convergence_study(ns, profile)?;
        text.push(t.to_string());
        tables.push(t);
    }
    Ok(Outcome { checks, details: json!({ "convergence": tables }), text })
}
