mod common;

use common::{dissipative_instance, rng, stable_matrix};
use conesemi::cone::{DualVector, PolyCone};
use conesemi::dissipativity::LinOp;
use conesemi::halfnorm::HalfNormSpec;
use conesemi::numerics::{matrix_exp, Matrix};
use conesemi::report::Verdict;
use conesemi::sampling;
use conesemi::semigroup::{
    euler_power, is_p_contractive, is_positive_operator, resolvent_matrix, check_theorem_contra,
};
use rand::RngExt;

#[test]
fn resolvent_identity() {
    // With R(l) = (I - l A)^{-1}: R(l) - R(m) = (l - m) R(l) A R(m).
    let mut r = rng(51);
    for _ in 0..20 {
        let n = r.random_range(2..5);
        let a = LinOp::full(stable_matrix(&mut r, n)).unwrap();
        let (l, mu) = (r.random_range(0.01..1.0), r.random_range(0.01..1.0));
        let (rl, rm) = (resolvent_matrix(&a, l).unwrap(), resolvent_matrix(&a, mu).unwrap());
        let rhs = rl.matmul(a.matrix()).unwrap().matmul(&rm).unwrap().scale(l - mu);
        assert!(rl.sub(&rm).unwrap().sub(&rhs).unwrap().norm_inf() <= 1e-8);
    }
}

#[test]
fn euler_converges_at_first_order() {
    let mut r = rng(52);
    for _ in 0..10 {
        let n = r.random_range(2..5);
        let a = LinOp::full(stable_matrix(&mut r, n)).unwrap();
        let x = sampling::uniform_box(&mut r, n, 1.0);
        let exact = matrix_exp(a.matrix(), 1.0).unwrap().mul_vec(&x).unwrap();
        let err = |k| euler_power(&a, 1.0, k, &x).unwrap().max_abs_diff(&exact);
        let ratio = err(16) / err(32);
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn dissipative_instances_have_contractive_resolvents_and_semigroups() {
    let mut r = rng(53);
    for case in 0..50 {
        let n = 2 + case % 3;
        let (a, phi) = dissipative_instance(&mut r, n);
        let cone = PolyCone::orthant(n).unwrap();
        let phi = DualVector::certified(&cone, phi).unwrap();
        let op = LinOp::full(a.clone()).unwrap();
        for lambda in [0.1, 0.5, 1.0] {
            let rep = check_theorem_contra(&op, &cone, &phi, lambda, 100, case as u64).unwrap();
            assert!(rep.find_part("hypothesis").unwrap().verdict.passed());
            assert_eq!(rep.verdict, Verdict::Inconclusive, "{rep}");
        }
        let p = HalfNormSpec::phi(&cone, &phi.coords).unwrap();
        for t in [0.5, 1.0] {
            for _ in 0..20 {
                let x = sampling::uniform_box(&mut r, n, 1.0);
                let tx = euler_power(&op, t, 32, &x).unwrap();
                assert!(p.eval(&tx).unwrap() <= p.eval(&x).unwrap() + 1e-6);
            }
        }
        for t in [0.1, 1.0, 5.0] {
            let e = matrix_exp(&a, t).unwrap();
            assert!(is_positive_operator(&e, &cone).unwrap().worst_margin.unwrap() >= -1e-9);
        }
    }
}

#[test]
fn positivity_failures_name_a_generator_and_facet() {
    let mut r = rng(54);
    let cone = PolyCone::orthant(3).unwrap();
    for _ in 0..50 {
        let t = Matrix::new(3, 3, (0..9).map(|_| r.random_range(-0.2..1.0)).collect()).unwrap();
        let rep = is_positive_operator(&t, &cone).unwrap();
        assert_eq!(rep.verdict == Verdict::Holds, t.min_entry() >= -1e-10);
        for w in &rep.witnesses {
            assert!(cone.generators().contains(&w.point));
            let f = &w.functional.as_ref().unwrap().coords;
            assert!(cone.facets().contains(f));
            assert!((t.mul_vec(&w.point).unwrap().dot(f) - w.margin).abs() < 1e-15);
        }
    }
}

#[test]
fn contractivity_detects_expansion() {
    let cone = PolyCone::orthant(2).unwrap();
    let p = HalfNormSpec::phi(&cone, &[1.0, 1.0]).unwrap();
    let rep = is_p_contractive(&Matrix::identity(2).scale(1.5), &p, 20, 0).unwrap();
    assert_eq!(rep.verdict, Verdict::Fails);
    assert!(rep.witnesses.iter().all(|w| w.margin > 1e-8));
}
