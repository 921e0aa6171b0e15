use num_complex::Complex64;

use pontryagin::colligation::Colligation;
use pontryagin::error::Error;
use pontryagin::example::{counterexample, shift};
use pontryagin::indefinite::Tolerances;
use pontryagin::matrix::{cx, real_matrix};
use pontryagin::products::{cascade, kl_factorize_system, FactorMode};
use pontryagin::random::{random_inverse_blaschke, random_passive_system, rng};
use pontryagin::schur::{
    blaschke_potapov_factor, boundary_behavior, canonical_coisometric_realization, defect,
    kl_factorize_function, TransferFunction,
};

const PROBES: [(f64, f64); 5] = [
    (0.1, 0.2),
    (-0.3, 0.05),
    (0.0, -0.6),
    (0.45, 0.4),
    (-0.2, -0.2),
];

fn b_half(z: Complex64) -> Complex64 {
    (z - 0.5) / (cx(1.0, 0.0) - 0.5 * z)
}

#[test]
fn counterexample_left_factors_are_determined_up_to_a_unimodular_constant() {
    let tol = Tolerances::default();
    let c = counterexample(cx(0.5, 0.0), &shift(), &tol).unwrap();
    let f = kl_factorize_function(&c.function, &tol).unwrap();
    assert_eq!(f.degree, 1);
    assert!(f.left.coprime && f.right.coprime);
    let h = 0.5_f64.sqrt();
    let mut constant: Option<Complex64> = None;
    for (re, im) in PROBES {
        let z = cx(re, im);
        let bl = f.b_l.evaluate(z, &tol).unwrap()[(0, 0)];
        let ratio = bl / b_half(z);
        let sl = f.s_l.evaluate(z, &tol).unwrap();
        let expected = [z * b_half(z) * h, Complex64::from(h)];
        for k in 0..2 {
            assert!(
                (sl[(0, k)] - ratio * expected[k]).norm() < 1e-8,
                "S_l mismatch at {z}"
            );
        }
        let c0 = *constant.get_or_insert(ratio);
        assert!((ratio - c0).norm() < 1e-8);
    }
    assert!((constant.unwrap().norm() - 1.0).abs() < 1e-8);
}

#[test]
fn counterexample_realization_admits_only_the_right_product() {
    let tol = Tolerances::default();
    let c = counterexample(cx(0.5, 0.0), &shift(), &tol).unwrap();
    let canonical = canonical_coisometric_realization(&c.function, &tol).unwrap();
    let sys = &canonical.system;
    assert_eq!(sys.kappa(), 1);
    let right = kl_factorize_system(sys, FactorMode::Right, &tol).unwrap();
    assert_eq!(right.degree(), 1);
    assert!(matches!(
        kl_factorize_system(sys, FactorMode::Left, &tol),
        Err(Error::Precondition(_))
    ));
    // The left product of co-isometric observable factors loses observability.
    assert!(c.observable.dimension >= 1);
}

#[test]
fn counterexample_is_co_inner_but_not_inner() {
    let tol = Tolerances::default();
    let c = counterexample(cx(0.5, 0.0), &shift(), &tol).unwrap();
    let report = boundary_behavior(&c.function, &tol).unwrap();
    assert!(report.co_inner);
    assert!(!report.inner);
    let d = defect(&c.function, &tol).unwrap();
    assert!(!d.phi_zero);
    assert!(d.psi_zero);
}

#[test]
fn monomial_inner_factor_also_breaks_observability() {
    let tol = Tolerances::default();
    let a = pontryagin::example::monomial(2).unwrap();
    let c = counterexample(cx(-0.3, 0.2), &a, &tol).unwrap();
    assert!(c.observable.dimension >= 1);
    assert!(c.controllable.dimension >= 1);
}

/// |φ| is determined on the disc by 1 − |S|² on the circle, which Blaschke
/// factors do not change.
#[test]
fn scalar_defect_is_invariant_under_blaschke_factors() {
    let tol = Tolerances::default();
    for seed in 0..4 {
        let mut r = rng(100 + seed);
        let s = random_passive_system(2, 0, 1, 1, 0.8, &mut r).unwrap();
        let zero = pontryagin::random::separated_zeros(1, 0.1, &mut r);
        let inv = random_inverse_blaschke(&zero, 1, &mut r, &tol).unwrap();
        let full = TransferFunction::from_colligation(cascade(&s, &inv).unwrap());
        let f = kl_factorize_function(&full, &tol).unwrap();
        assert_eq!(f.degree, 1);
        let d_full = defect(&full, &tol).unwrap();
        let d_r = defect(&f.s_r, &tol).unwrap();
        let d_l = defect(&f.s_l, &tol).unwrap();
        let (phi, phi_r) = (d_full.phi.unwrap(), d_r.phi.unwrap());
        let (psi, psi_l) = (d_full.psi.unwrap(), d_l.psi.unwrap());
        for (re, im) in PROBES {
            let z = cx(re, im);
            assert!(
                (phi.evaluate(z).norm() - phi_r.evaluate(z).norm()).abs() < 1e-7,
                "seed {seed}"
            );
            assert!(
                (psi.evaluate(z).norm() - psi_l.evaluate(z).norm()).abs() < 1e-7,
                "seed {seed}"
            );
        }
    }
}

#[test]
fn system_and_function_routes_agree_on_a_conservative_cascade() {
    let tol = Tolerances::default();
    let one = real_matrix(1, 1, &[1.0]);
    let b = blaschke_potapov_factor(cx(0.3, 0.4), cx(1.0, 0.0), &one, &tol).unwrap();
    let inv = random_inverse_blaschke(&[cx(-0.5, 0.1)], 1, &mut rng(9), &tol).unwrap();
    let sys: Colligation = cascade(&b, &inv).unwrap();
    let f = kl_factorize_function(&TransferFunction::from_colligation(sys.clone()), &tol).unwrap();
    let split = kl_factorize_system(&sys, FactorMode::Right, &tol).unwrap();
    let outer = &split.outer;
    for (re, im) in PROBES {
        let z = cx(re, im);
        let a = f.s_r.evaluate(z, &tol).unwrap()[(0, 0)];
        let o = outer.transfer_eval(z, &tol).unwrap()[(0, 0)];
        assert!((a.norm() - o.norm()).abs() < 1e-8);
    }
}
