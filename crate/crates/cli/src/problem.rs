//! The JSON problem file and its conversion into toolkit inputs.
//!
//! Syntax errors carry serde's line and column; semantic errors name the
//! offending field, e.g. `operator.matrix[1]`.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use conesemi::cone::{DualVector, PolyCone};
use conesemi::dissipativity::{Domain, LinOp};
use conesemi::halfnorm::{HalfNormSpec, HalfNormVariant, NormKind, NormSpec};
use conesemi::numerics::{LinearConstraints, Matrix, Vector};
use conesemi::semigroup::{Method, SemigroupConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfnorm: Option<HalfNormFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorFile>,
    /// Functionals for the total-set pipeline; the cone's facets when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_set: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

/// `{"orthant": n}` or `{"generators": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConeFile {
    Orthant(usize),
    Generators(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormFile {
    pub kind: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum HalfNormFile {
    Canonical { norm: NormFile },
    RegularGauge { norm: NormFile },
    Phi { phi: Vec<f64> },
    OrderUnit { unit: Vec<f64> },
    #[serde(rename = "nplus")]
    NPlus { norm: NormFile },
    Euclidean,
}

/// Rows of `lhs x >= rhs` (or `= rhs` for equalities).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsFile {
    pub lhs: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ineq: Option<ConstraintsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq: Option<ConstraintsFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupFile {
    pub t_grid: Vec<f64>,
    #[serde(default = "default_steps")]
    pub euler_steps: usize,
    #[serde(default = "default_method")]
    pub method: Method,
    /// Resolvent parameter for the contractivity pipeline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

fn default_steps() -> usize {
    64
}

fn default_method() -> Method {
    Method::Expm
}

fn vector(field: &str, v: &[f64]) -> Result<Vector> {
    Vector::new(v.to_vec()).with_context(|| format!("field `{field}`"))
}

fn matrix(field: &str, rows: &[Vec<f64>], cols: Option<usize>) -> Result<Matrix> {
    let width = match (rows.first(), cols) {
        (_, Some(c)) => c,
        (Some(r), None) => r.len(),
        (None, None) => bail!("field `{field}`: no rows"),
    };
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            bail!("field `{field}[{i}]`: row has {} entries, expected {width}", r.len());
        }
        if r.iter().any(|x| !x.is_finite()) {
            bail!("field `{field}[{i}]`: non-finite entry");
        }
    }
    if rows.is_empty() {
        return Ok(Matrix::empty(width));
    }
    Matrix::from_rows(rows).with_context(|| format!("field `{field}`"))
}

fn constraints(field: &str, c: &Option<ConstraintsFile>, dim: usize) -> Result<LinearConstraints> {
    match c {
        None => Ok(LinearConstraints::empty(dim)),
        Some(c) => {
            let lhs = matrix(&format!("{field}.lhs"), &c.lhs, Some(dim))?;
            LinearConstraints::new(lhs, c.rhs.clone()).with_context(|| format!("field `{field}`"))
        }
    }
}

fn norm(field: &str, n: &NormFile, dim: usize) -> Result<NormSpec> {
    let weights = match &n.weights {
        Some(w) => vector(&format!("{field}.weights"), w)?,
        None => Vector::filled(dim, 1.0),
    };
    NormSpec::new(n.kind, weights).with_context(|| format!("field `{field}`"))
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let p: ProblemFile =
            serde_json::from_str(text).map_err(|e| anyhow!("problem file: {e}"))?;
        if p.schema_version != SCHEMA_VERSION {
            bail!(
                "field `schema_version`: unsupported version {}, expected {SCHEMA_VERSION}",
                p.schema_version
            );
        }
        Ok(p)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serializes")
    }

    pub fn cone(&self) -> Result<PolyCone> {
        match self.cone.as_ref().ok_or_else(|| anyhow!("missing field `cone`"))? {
            ConeFile::Orthant(n) => PolyCone::orthant(*n).context("field `cone.orthant`"),
            ConeFile::Generators(rows) => {
                let rays = rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| vector(&format!("cone.generators[{i}]"), r))
                    .collect::<Result<Vec<_>>>()?;
                PolyCone::from_generators(&rays).context("field `cone.generators`")
            }
        }
    }

    pub fn operator(&self, dim: usize) -> Result<LinOp> {
        let op = self.operator.as_ref().ok_or_else(|| anyhow!("missing field `operator`"))?;
        let m = matrix("operator.matrix", &op.matrix, None)?;
        if m.rows() != dim || m.cols() != dim {
            bail!("field `operator.matrix`: expected {dim}x{dim}, found {}x{}", m.rows(), m.cols());
        }
        let domain = match &op.domain {
            None => None,
            Some(d) => Some(Domain::new(
                constraints("operator.domain.ineq", &d.ineq, dim)?,
                constraints("operator.domain.eq", &d.eq, dim)?,
            )?),
        };
        LinOp::new(m, domain).context("field `operator`")
    }

    pub fn halfnorm(&self, cone: &PolyCone) -> Result<HalfNormSpec> {
        let h = self.halfnorm.as_ref().ok_or_else(|| anyhow!("missing field `halfnorm`"))?;
        let n = cone.dim();
        let variant = match h {
            HalfNormFile::Canonical { norm: nf } => {
                HalfNormVariant::Canonical { norm: norm("halfnorm.norm", nf, n)? }
            }
            HalfNormFile::RegularGauge { norm: nf } => {
                HalfNormVariant::RegularGauge { norm: norm("halfnorm.norm", nf, n)? }
            }
            HalfNormFile::NPlus { norm: nf } => {
                HalfNormVariant::NPlus { norm: norm("halfnorm.norm", nf, n)? }
            }
            HalfNormFile::Phi { phi } => {
                HalfNormVariant::Phi { phi: DualVector::uncertified(vector("halfnorm.phi", phi)?) }
            }
            HalfNormFile::OrderUnit { unit } => {
                HalfNormVariant::OrderUnit { unit: vector("halfnorm.unit", unit)? }
            }
            HalfNormFile::Euclidean => HalfNormVariant::Euclidean,
        };
        HalfNormSpec::new(variant, cone.clone()).context("field `halfnorm`")
    }

    pub fn phi_set(&self, cone: &PolyCone) -> Result<Vec<DualVector>> {
        match &self.phi_set {
            None => cone
                .facets()
                .iter()
                .map(|f| DualVector::certified(cone, f.clone()).map_err(Into::into))
                .collect(),
            Some(rows) => rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let field = format!("phi_set[{i}]");
                    DualVector::certified(cone, vector(&field, r)?)
                        .with_context(|| format!("field `{field}`"))
                })
                .collect(),
        }
    }

    pub fn unit(&self) -> Result<Vector> {
        vector("unit", self.unit.as_ref().ok_or_else(|| anyhow!("missing field `unit`"))?)
    }

    pub fn phi(&self) -> Result<Option<Vector>> {
        self.phi.as_ref().map(|p| vector("phi", p)).transpose()
    }

    pub fn semigroup(&self) -> Result<(SemigroupConfig, Option<f64>)> {
        let s = self.semigroup.as_ref().ok_or_else(|| anyhow!("missing field `semigroup`"))?;
        let cfg = SemigroupConfig::new(s.t_grid.clone(), s.euler_steps, s.method)
            .context("field `semigroup`")?;
        Ok((cfg, s.lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_carry_a_location() {
        let err = ProblemFile::parse("{\n  \"schema_version\": 1,\n  \"cone\": [\n}").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn ragged_rows_name_the_row() {
        let p = ProblemFile::parse(
            r#"{"schema_version": 1, "cone": {"orthant": 2},
                "operator": {"matrix": [[1, 2], [3]]}}"#,
        )
        .unwrap();
        let err = p.operator(2).unwrap_err();
        assert!(err.to_string().contains("operator.matrix[1]"), "{err}");
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        assert!(ProblemFile::parse(r#"{"schema_version": 1, "bogus": 3}"#).is_err());
        assert!(ProblemFile::parse(r#"{"schema_version": 2}"#).is_err());
    }

    #[test]
    fn defaults_fill_semigroup_fields() {
        let p = ProblemFile::parse(r#"{"schema_version": 1, "semigroup": {"t_grid": [0.5, 1]}}"#)
            .unwrap();
        let (cfg, lambda) = p.semigroup().unwrap();
        assert_eq!(cfg.euler_steps, 64);
        assert_eq!(cfg.method, Method::Expm);
        assert!(lambda.is_none());
    }

    #[test]
    fn round_trip_preserves_module_inputs() {
        let text = r#"{"schema_version": 1,
            "cone": {"generators": [[1, 1], [1, -1]]},
            "halfnorm": {"variant": "canonical", "norm": {"kind": "linf", "weights": [1, 2]}},
            "operator": {"matrix": [[-1, 0.5], [0.25, -2]],
                         "domain": {"ineq": {"lhs": [[1, 0]], "rhs": [0]}}},
            "phi": [1, 0], "unit": [1, 0],
            "semigroup": {"t_grid": [0, 0.5], "method": "both", "lambda": 0.3}}"#;
        let p = ProblemFile::parse(text).unwrap();
        let q = ProblemFile::parse(&p.to_json()).unwrap();
        assert_eq!(p, q);
        let (c1, c2) = (p.cone().unwrap(), q.cone().unwrap());
        assert_eq!(c1, c2);
        assert_eq!(p.halfnorm(&c1).unwrap(), q.halfnorm(&c2).unwrap());
        assert_eq!(p.operator(2).unwrap(), q.operator(2).unwrap());
        assert_eq!(p.semigroup().unwrap(), q.semigroup().unwrap());
    }

    #[test]
    fn empty_grid_is_an_error() {
        let p = ProblemFile::parse(r#"{"schema_version": 1, "semigroup": {"t_grid": []}}"#).unwrap();
        assert!(p.semigroup().is_err());
    }
}
