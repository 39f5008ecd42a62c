mod common;

use common::{all_cones, m, rng, sampled_pod_margin};
use conesemi::cone::PolyCone;
use conesemi::dissipativity::{
    certify_dissipative, has_pod, is_dissipative_at, pod_matrix_characterization, Domain, LinOp,
};
use conesemi::halfnorm::{HalfNormSpec, HalfNormVariant, NormSpec};
use conesemi::numerics::{LinearConstraints, Matrix};
use conesemi::report::Verdict;
use rand::RngExt;

fn random_matrix(r: &mut conesemi::sampling::SampleRng, n: usize, neg_prob: f64) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mag = r.random_range(0.0..1.0);
            let neg = i == j || r.random::<f64>() < neg_prob;
            a[(i, j)] = if neg && r.random::<bool>() { -mag } else { mag };
        }
    }
    a
}

#[test]
fn extreme_pair_reduction_matches_sampled_faces() {
    let mut r = rng(41);
    let (mut holds, mut fails) = (0, 0);
    for (name, cone) in all_cones() {
        for _ in 0..40 {
            let a = random_matrix(&mut r, cone.dim(), 0.5);
            let exact = has_pod(&LinOp::full(a.clone()).unwrap(), &cone).unwrap();
            let sampled = sampled_pod_margin(&a, &cone, &mut r, 200);
            match exact.verdict {
                Verdict::Holds => {
                    holds += 1;
                    assert!(sampled >= -1e-9, "{name}: sampled face margin {sampled}");
                }
                Verdict::Fails => {
                    fails += 1;
                    assert!(sampled < 0.0, "{name}: oracle missed the violation");
                }
                v => panic!("unexpected verdict {v:?}"),
            }
        }
    }
    assert!(holds > 10 && fails > 10);
}

#[test]
fn pod_on_orthant_is_the_metzler_test() {
    let mut r = rng(42);
    for case in 0..200 {
        let n = 2 + case % 4;
        let a = random_matrix(&mut r, n, 0.15);
        let pod = has_pod(&LinOp::full(a.clone()).unwrap(), &PolyCone::orthant(n).unwrap()).unwrap();
        assert_eq!(pod.verdict == Verdict::Holds, pod_matrix_characterization(&a).unwrap());
    }
}

#[test]
fn pod_ignores_diagonal_shifts() {
    let mut r = rng(43);
    for (_, cone) in all_cones() {
        for _ in 0..30 {
            let a = random_matrix(&mut r, cone.dim(), 0.5);
            let c = r.random_range(-10.0..10.0);
            let shifted = a.add(&Matrix::identity(cone.dim()).scale(c)).unwrap();
            let v1 = has_pod(&LinOp::full(a).unwrap(), &cone).unwrap().verdict;
            let v2 = has_pod(&LinOp::full(shifted).unwrap(), &cone).unwrap().verdict;
            assert_eq!(v1, v2);
        }
    }
}

#[test]
fn pod_and_dissipativity_are_independent() {
    let k = PolyCone::orthant(2).unwrap();
    let euclid = HalfNormSpec::new(HalfNormVariant::Euclidean, k.clone()).unwrap();

    let a1 = LinOp::full(m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
    assert_eq!(has_pod(&a1, &k).unwrap().verdict, Verdict::Holds);
    assert_eq!(certify_dissipative(&a1, &euclid, 100, 1).unwrap().verdict, Verdict::Fails);

    let ineq = LinearConstraints::new(m(&[&[1.0, 0.0]]), vec![0.0]).unwrap();
    let eq = LinearConstraints::new(m(&[&[0.0, 1.0]]), vec![0.0]).unwrap();
    let a2 = LinOp::new(m(&[&[-1.0, -1.0], &[1.0, 1.0]]), Some(Domain::new(ineq, eq).unwrap()))
        .unwrap();
    assert_eq!(has_pod(&a2, &k).unwrap().verdict, Verdict::Fails);
    assert_eq!(certify_dissipative(&a2, &euclid, 100, 1).unwrap().verdict, Verdict::Inconclusive);
}

#[test]
fn certification_is_seed_deterministic() {
    let k = PolyCone::orthant(3).unwrap();
    let p = HalfNormSpec::new(HalfNormVariant::NPlus { norm: NormSpec::linf(3) }, k).unwrap();
    let a = LinOp::full(m(&[&[-2.0, 1.0, 0.0], &[1.0, -2.0, 1.0], &[0.0, 1.0, -2.0]])).unwrap();
    let r1 = certify_dissipative(&a, &p, 60, 99).unwrap();
    let r2 = certify_dissipative(&a, &p, 60, 99).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(r1.verdict, Verdict::Inconclusive);
}

#[test]
fn strict_implies_plain_dissipativity() {
    let mut r = rng(44);
    for (_, cone) in all_cones() {
        let p = HalfNormSpec::new(
            HalfNormVariant::Canonical { norm: NormSpec::linf(cone.dim()) },
            cone.clone(),
        )
        .unwrap();
        let a = LinOp::full(random_matrix(&mut r, cone.dim(), 0.5)).unwrap();
        for _ in 0..20 {
            let x = conesemi::sampling::uniform_box(&mut r, cone.dim(), 1.0);
            let (weak, lo) = is_dissipative_at(&a, &p, &x).unwrap();
            let (strict, hi) = conesemi::dissipativity::is_strictly_dissipative_at(&a, &p, &x).unwrap();
            assert!(lo <= hi + 1e-12);
            assert!(!strict || weak);
        }
    }
}
