//! The second derivative on `[0, 1]` with Dirichlet boundary conditions.
//!
//! Unknowns live on the interior nodes `t_j = j h`, `h = 1/(N+1)`, with zero
//! boundary values implied. The three-point stencil gives a Metzler matrix, so
//! everything in [`crate::semigroup`] applies on the orthant.
//!
//! The continuum resolvent `(I - A)^{-1} y` has a closed form: a particular
//! solution
//!
//! ```text
//! x0(t) = 1/2 [ e^t int_t^1 e^{-s} y(s) ds - e^{-t} int_t^1 e^s y(s) ds ]
//! ```
//!
//! of `x - x'' = y`, corrected by `m e^t + n e^{-t}` to vanish at both ends.
//! The integrals use the trapezoid rule on the grid, which matches the
//! stencil's second order. The discrete model captures the pointwise order and
//! the sup-norm only; smoothness classes of the continuum problem collapse.

use std::fmt;

use serde::Serialize;

use crate::cone::PolyCone;
use crate::dissipativity::{has_pod, LinOp};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{fmt_real, linear_solve, Lu, Matrix, Vector};
use crate::report::{Report, Verdict, Witness};
use crate::sampling;
use crate::semigroup::{is_positive_operator, semigroup_matrix, Method, SemigroupConfig};

/// Slack in `||(T x)^+||_inf <= ||x^+||_inf`.
pub const POSITIVE_PART_TOL: f64 = 1e-8;

/// Slack on `(A x)_j <= 0` at a nonnegative maximum.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    n_interior: usize,
    h: f64,
}

impl Grid {
    pub fn new(n_interior: usize) -> Result<Self> {
        if n_interior < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 interior nodes, got {n_interior}"
            )));
        }
        Ok(Self { n_interior, h: 1.0 / (n_interior + 1) as f64 })
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Interior nodes `t_1, ..., t_N`.
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n_interior).map(|j| self.node(j)).collect()
    }

    /// `t_j` for `j` in `0..=N+1`, boundary included.
    fn node(&self, j: usize) -> f64 {
        j as f64 / (self.n_interior + 1) as f64
    }
}

/// Values at the interior nodes; boundary values are zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridFunction {
    pub values: Vector,
}

impl GridFunction {
    pub fn new(grid: &Grid, values: Vector) -> Result<Self> {
        check_dim(grid.n_interior(), values.dim())?;
        Ok(Self { values })
    }

    /// Samples `f` at the interior nodes.
    pub fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Ok(Self { values: Vector::new(grid.nodes().into_iter().map(f).collect())? })
    }

    /// Value at node `j` in `0..=N+1`, zero on the boundary.
    fn at(&self, j: usize) -> f64 {
        if j == 0 || j > self.values.dim() {
            0.0
        } else {
            self.values[j - 1]
        }
    }
}

/// `(1/h^2) tridiag(1, -2, 1)` on the whole space.
pub fn build_laplacian(grid: &Grid) -> LinOp {
    let n = grid.n_interior();
    let s = 1.0 / (grid.h() * grid.h());
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = -2.0 * s;
        if i > 0 {
            m[(i, i - 1)] = s;
        }
        if i + 1 < n {
            m[(i, i + 1)] = s;
        }
    }
    LinOp::full(m).expect("square matrix without domain")
}

/// Continuum solution of `x - x'' = y`, `x(0) = x(1) = 0`, at the interior nodes.
pub fn resolvent_closed_form(grid: &Grid, y: &GridFunction) -> Result<GridFunction> {
    check_dim(grid.n_interior(), y.values.dim())?;
    let n = grid.n_interior() + 2;
    let h = grid.h();
    let t: Vec<f64> = (0..n).map(|j| grid.node(j)).collect();
    let a: Vec<f64> = (0..n).map(|j| (-t[j]).exp() * y.at(j)).collect();
    let b: Vec<f64> = (0..n).map(|j| t[j].exp() * y.at(j)).collect();
    // Cumulative trapezoid integrals from t_j to 1.
    let (mut ia, mut ib) = (vec![0.0; n], vec![0.0; n]);
    for j in (0..n - 1).rev() {
        ia[j] = ia[j + 1] + 0.5 * h * (a[j] + a[j + 1]);
        ib[j] = ib[j + 1] + 0.5 * h * (b[j] + b[j + 1]);
    }
    let x0: Vec<f64> =
        (0..n).map(|j| 0.5 * (t[j].exp() * ia[j] - (-t[j]).exp() * ib[j])).collect();
    let e = std::f64::consts::E;
    let sys = Matrix::from_rows(&[vec![1.0, 1.0], vec![e, 1.0 / e]])?;
    let mn = linear_solve(&sys, &Vector::from_vec(vec![-x0[0], -x0[n - 1]]))?;
    let values = (1..n - 1).map(|j| x0[j] + mn[0] * t[j].exp() + mn[1] * (-t[j]).exp()).collect();
    Ok(GridFunction { values: Vector::from_vec(values) })
}

/// Finite-difference solution of `(I - A_h) x = y`.
pub fn fd_resolvent(grid: &Grid, y: &GridFunction) -> Result<GridFunction> {
    check_dim(grid.n_interior(), y.values.dim())?;
    let a = build_laplacian(grid);
    let m = Matrix::identity(grid.n_interior()).sub(a.matrix())?;
    Ok(GridFunction { values: Lu::factorize(&m)?.solve(&y.values)? })
}

/// Right-hand sides with known smooth solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `y = 1`, solved by `1 - (e^t + e^{1-t}) / (1 + e)`.
    One,
    /// `y = sin(pi s)`, solved by `sin(pi t) / (1 + pi^2)`.
    Sine,
}

impl Profile {
    pub fn eval(self, s: f64) -> f64 {
        match self {
            Profile::One => 1.0,
            Profile::Sine => (std::f64::consts::PI * s).sin(),
        }
    }

    pub fn exact_solution(self, t: f64) -> f64 {
        use std::f64::consts::{E, PI};
        match self {
            Profile::One => 1.0 - (t.exp() + (1.0 - t).exp()) / (1.0 + E),
            Profile::Sine => (PI * t).sin() / (1.0 + PI * PI),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::One => "y = 1",
            Profile::Sine => "y = sin(pi s)",
        }
    }
}

/// `||FD solve - closed form||_inf` on one grid.
pub fn resolvent_error(grid: &Grid, profile: Profile) -> Result<f64> {
    let y = GridFunction::sample(grid, |s| profile.eval(s))?;
    let fd = fd_resolvent(grid, &y)?;
    let cf = resolvent_closed_form(grid, &y)?;
    Ok(fd.values.max_abs_diff(&cf.values))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub sup_error: f64,
    /// Error of the previous row divided by this one.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub profile: Profile,
    pub rows: Vec<ConvergenceRow>,
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.profile.name())?;
        writeln!(f, "{:>6}  {:>12}  {:>12}  {:>8}", "N", "h", "sup-error", "ratio")?;
        for r in &self.rows {
            let ratio = r.ratio.map_or("-".to_string(), |q| format!("{q:.4}"));
            writeln!(f, "{:>6}  {:>12.6e}  {:>12.6e}  {:>8}", r.n, r.h, r.sup_error, ratio)?;
        }
        Ok(())
    }
}

/// FD-versus-closed-form errors over grid sizes, in the given order.
pub fn convergence_study(ns: &[usize], profile: Profile) -> Result<ConvergenceTable> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let grid = Grid::new(n)?;
        let e = resolvent_error(&grid, profile)?;
        let ratio = rows.last().map(|prev| prev.sup_error / e);
        rows.push(ConvergenceRow { n, h: grid.h(), sup_error: e, ratio });
    }
    Ok(ConvergenceTable { profile, rows })
}

/// Test vectors: one hat per node, then seeded samples in `[-1, 1]^N`.
fn probe_points(n: usize, n_samples: usize, seed: u64) -> Vec<Vector> {
    let mut rng = sampling::rng(seed);
    let mut points: Vec<Vector> = (0..n).map(|j| Vector::basis(n, j)).collect();
    points.extend((0..n_samples).map(|_| sampling::uniform_box(&mut rng, n, 1.0)));
    points
}

fn first_argmax(x: &[f64]) -> usize {
    let mut j = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[j] {
            j = i;
        }
    }
    j
}

/// `(A x)_j <= 0` wherever `x` has a nonnegative maximum at `j`.
fn max_principle_part(a: &LinOp, points: &[Vector]) -> Result<Report> {
    let mut r = Report::new(
        "maximum principle: (Ax)_j <= 0 at a nonnegative maximum x_j",
        Verdict::Inconclusive,
        MAX_PRINCIPLE_TOL,
    );
    let mut worst = f64::NEG_INFINITY;
    for x in points {
        let j = first_argmax(x);
        if x[j] < 0.0 {
            continue;
        }
        r.samples_used += 1;
        let m = dot_row(a.matrix(), j, x);
        worst = worst.max(m);
        if m > MAX_PRINCIPLE_TOL {
            r.witnesses.push(Witness::new(x.clone(), None, m));
        }
    }
    r.worst_margin = (r.samples_used > 0).then_some(worst);
    if r.witnesses.is_empty() {
        r.notes.push("sampled; not a proof".into());
    } else {
        r.verdict = Verdict::Fails;
    }
    Ok(r)
}

fn dot_row(m: &Matrix, i: usize, x: &[f64]) -> f64 {
    m.row(i).iter().zip(x).map(|(a, b)| a * b).sum()
}

fn positive_sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m: f64, &v| m.max(v))
}

fn resolvent_part(grid: &Grid) -> Result<Report> {
    let h2 = grid.h() * grid.h();
    let mut r = Report::new(
        "resolvent cross-check: ||FD - closed form||_inf - h^2 <= 0",
        Verdict::Holds,
        h2,
    );
    let mut worst = f64::NEG_INFINITY;
    for profile in [Profile::One, Profile::Sine] {
        let e = resolvent_error(grid, profile)?;
        r.notes.push(format!("{}: sup-error {}", profile.name(), fmt_real(e)));
        worst = worst.max(e - h2);
    }
    r.samples_used = 2;
    r.worst_margin = Some(worst);
    if worst > 0.0 {
        r.verdict = Verdict::Fails;
    }
    Ok(r)
}

fn methods(cfg: &SemigroupConfig) -> Vec<(Method, &'static str)> {
    match cfg.method {
        Method::Expm => vec![(Method::Expm, "expm")],
        Method::Euler => vec![(Method::Euler, "euler")],
        Method::Both => vec![(Method::Expm, "expm"), (Method::Euler, "euler")],
    }
}

fn contraction_part(label: String, t: &Matrix, points: &[Vector]) -> Result<Report> {
    let mut r = Report::new(label, Verdict::Inconclusive, POSITIVE_PART_TOL);
    let mut worst = f64::NEG_INFINITY;
    for x in points {
        let m = positive_sup(&t.mul_vec(x)?) - positive_sup(x);
        worst = worst.max(m);
        if m > POSITIVE_PART_TOL {
            r.witnesses.push(Witness::new(x.clone(), None, m));
        }
    }
    r.samples_used = points.len();
    r.worst_margin = Some(worst);
    if !r.witnesses.is_empty() {
        r.verdict = Verdict::Fails;
    }
    Ok(r)
}

fn combine(label: &str, parts: Vec<Report>) -> Report {
    let verdict = if parts.iter().any(|p| p.verdict.is_failure()) {
        Verdict::Fails
    } else if parts.iter().all(|p| p.verdict == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    let mut r = Report::new(label, verdict, 0.0);
    r.samples_used = parts.iter().map(|p| p.samples_used).sum();
    r.parts = parts;
    r
}

/// Runs the example's checks on one grid: POD, the maximum principle,
/// the resolvent cross-check, positivity of `T(t)` and sup-norm
/// contractivity of the positive part.
pub fn verify_example(
    grid: &Grid,
    cfg: &SemigroupConfig,
    n_samples: usize,
    seed: u64,
) -> Result<Report> {
    let n = grid.n_interior();
    let a = build_laplacian(grid);
    let cone = PolyCone::orthant(n)?;
    let points = probe_points(n, n_samples, seed);

    let mut parts = vec![has_pod(&a, &cone)?, max_principle_part(&a, &points)?, resolvent_part(grid)?];

    let mut positivity = Vec::new();
    let mut contraction = Vec::new();
    for &t in &cfg.t_grid {
        for (method, name) in methods(cfg) {
            let tm = semigroup_matrix(&a, t, method, cfg.euler_steps)?;
            let mut p = is_positive_operator(&tm, &cone)?;
            p.label = format!("t = {} ({name}): {}", fmt_real(t), p.label);
            positivity.push(p);
            contraction.push(contraction_part(
                format!("t = {} ({name}): ||(Tx)+||_inf - ||x+||_inf <= 0", fmt_real(t)),
                &tm,
                &points,
            )?);
        }
    }
    parts.push(combine("positivity of T(t)", positivity));
    parts.push(combine("positive-part contractivity of T(t)", contraction));
    let mut report = combine(&format!("Dirichlet example, N = {n}"), parts);
    if report.verdict == Verdict::Inconclusive {
        report.notes.push("includes sampled checks; not a proof".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipativity::pod_matrix_characterization;

    #[test]
    fn grid_basics() {
        let g = Grid::new(3).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.nodes(), vec![0.25, 0.5, 0.75]);
        assert!(Grid::new(1).is_err());
    }

    #[test]
    fn laplacian_stencil() {
        let a = build_laplacian(&Grid::new(3).unwrap());
        let expect = Matrix::from_rows(&[
            vec![-32.0, 16.0, 0.0],
            vec![16.0, -32.0, 16.0],
            vec![0.0, 16.0, -32.0],
        ])
        .unwrap();
        assert_eq!(a.matrix(), &expect);
        assert!(pod_matrix_characterization(a.matrix()).unwrap());

        let g = Grid::new(6).unwrap();
        let a = build_laplacian(&g);
        let sums: Vec<f64> = (0..6).map(|i| a.matrix().row(i).iter().sum()).collect();
        let s = 1.0 / (g.h() * g.h());
        assert!((sums[0] + s).abs() < 1e-9 && (sums[5] + s).abs() < 1e-9);
        assert!(sums[1..5].iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn closed_form_examples() {
        let g = Grid::new(63).unwrap();
        let mid = 31;
        for (profile, value) in [(Profile::One, 0.11318), (Profile::Sine, 0.09199)] {
            let y = GridFunction::sample(&g, |s| profile.eval(s)).unwrap();
            let x = resolvent_closed_form(&g, &y).unwrap();
            assert_eq!(g.nodes()[mid], 0.5);
            assert!((x.values[mid] - value).abs() < 1e-4, "{}", x.values[mid]);
            assert!((x.values[mid] - profile.exact_solution(0.5)).abs() < 1e-4);
        }
        let zero = GridFunction::new(&g, Vector::zeros(63)).unwrap();
        assert!(resolvent_closed_form(&g, &zero).unwrap().values.norm_inf() == 0.0);
    }

    #[test]
    fn second_order_agreement() {
        for profile in [Profile::One, Profile::Sine] {
            let t = convergence_study(&[15, 31, 63], profile).unwrap();
            for r in &t.rows[1..] {
                let q = r.ratio.unwrap();
                assert!((3.5..=4.5).contains(&q), "{profile:?}: ratio {q}");
            }
        }
        assert!(resolvent_error(&Grid::new(31).unwrap(), Profile::One).unwrap() <= 5e-4);
        let t = convergence_study(&[2], Profile::One).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].ratio.is_none());
        assert!(t.to_string().contains("sup-error"));
    }

    #[test]
    fn hat_function_has_negative_margin() {
        let g = Grid::new(5).unwrap();
        let a = build_laplacian(&g);
        let r = max_principle_part(&a, &[Vector::basis(5, 2)]).unwrap();
        assert!(r.worst_margin.unwrap() < 0.0);
    }

    #[test]
    fn verify_small_grids() {
        let cfg = SemigroupConfig::new(vec![0.1, 1.0], 32, Method::Both).unwrap();
        for n in [2, 15] {
            let r = verify_example(&Grid::new(n).unwrap(), &cfg, 50, 3).unwrap();
            assert_eq!(r.verdict, Verdict::Inconclusive, "{r}");
            assert_eq!(r.find_part("POD").unwrap().verdict, Verdict::Holds);
            let pos = r.find_part("positivity of T").unwrap();
            assert!(pos.parts.iter().all(|p| p.worst_margin.unwrap() >= -1e-12));
        }
    }
}
