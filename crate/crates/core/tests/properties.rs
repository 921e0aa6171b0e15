use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use pontryagin::colligation::{Colligation, SystemMetric};
use pontryagin::indefinite::{SignatureSpace, Tolerances};
use pontryagin::io::SystemFile;
use pontryagin::julia::{julia_embedding, julia_operator};
use pontryagin::matrix::identity;
use pontryagin::products::cascade;
use pontryagin::random::{
    random_blaschke_product, random_conservative_system, random_inverse_blaschke,
    random_j_contraction, random_passive_system, rng, separated_zeros,
};
use pontryagin::schur::{kernel_block, negative_squares_estimate, TransferFunction};

fn norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn disc_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.9f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// θ(z) = D + zC(I − zA)⁻¹B by LU, or None when I − zA is badly conditioned.
fn transfer(sys: &Colligation, z: Complex64) -> Option<DMatrix<Complex64>> {
    let n = sys.state_dim();
    let m = identity(n) - sys.a() * z;
    let lu = m.clone().lu();
    let x = lu.solve(sys.b())?;
    if norm(&x) > 1e6 * (1.0 + norm(sys.b())) {
        return None;
    }
    Some(sys.d() + sys.c() * x * z)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_of_conservative_system_factors_through_the_state(
        seed in any::<u64>(),
        pos in 0usize..3,
        neg in 0usize..3,
        w in disc_point(),
        z in disc_point(),
    ) {
        let tol = Tolerances::default();
        let sys = random_conservative_system(pos, neg, 2, &mut rng(seed)).unwrap();
        let n = sys.state_dim();
        let j = sys.state().metric();
        let rz = (identity(n) - sys.a() * z).lu();
        let rw = (identity(n) - sys.a() * w).lu();
        let (Some(left), Some(rw_inv)) = (rz.solve(&j), rw.solve(&identity(n))) else {
            return Err(TestCaseError::reject("pole"));
        };
        prop_assume!(norm(&left) < 1e6 && norm(&rw_inv) < 1e6);
        // C(I − zA)⁻¹ J (I − w̄Aᴴ)⁻¹ Cᴴ.
        let rw_adj = rw_inv.adjoint();
        let expected = sys.c() * left * rw_adj * sys.c().adjoint();
        let s = TransferFunction::from_colligation(sys);
        let got = match kernel_block(&s, w, z, &tol) {
            Ok(k) => k,
            Err(_) => return Err(TestCaseError::reject("pole")),
        };
        prop_assert!(norm(&(got - &expected)) <= 1e-8 * (1.0 + norm(&expected)));
    }

    #[test]
    fn system_files_round_trip(seed in any::<u64>(), pos in 0usize..4, neg in 0usize..3) {
        let sys = random_passive_system(pos, neg, 2, 1, 0.9, &mut rng(seed)).unwrap();
        let file = SystemFile::from_colligation(&sys, Some("random"));
        let text = file.to_json();
        let back = SystemFile::from_json(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.to_colligation().unwrap(), sys);
    }

    #[test]
    fn cascade_multiplies_transfer_functions_and_dualizes(
        seed in any::<u64>(),
        z in disc_point(),
    ) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let first = random_passive_system(1, 1, 2, 3, 0.9, &mut r).unwrap();
        let second = random_passive_system(2, 1, 3, 2, 0.9, &mut r).unwrap();
        let prod = cascade(&first, &second).unwrap();
        prop_assert!(prod.classify(&tol).unwrap().metric.is_passive());
        let (Some(t1), Some(t2), Some(t)) = (transfer(&first, z), transfer(&second, z), transfer(&prod, z)) else {
            return Err(TestCaseError::reject("pole"));
        };
        prop_assert!(norm(&(&t - t2 * t1)) <= 1e-8 * (1.0 + norm(&t)));

        let dual = cascade(&second.adjoint_system(), &first.adjoint_system()).unwrap();
        let (Some(a), Some(b)) = (transfer(&prod.adjoint_system(), z), transfer(&dual, z)) else {
            return Err(TestCaseError::reject("pole"));
        };
        prop_assert!(norm(&(&a - &b)) <= 1e-8 * (1.0 + norm(&a)));
        let Some(conj) = transfer(&prod, z.conj()) else {
            return Err(TestCaseError::reject("pole"));
        };
        prop_assert!(norm(&(a - conj.adjoint())) <= 1e-8 * (1.0 + norm(&conj)));
    }

    #[test]
    fn julia_operator_is_j_unitary_with_the_contraction_in_its_corner(
        seed in any::<u64>(),
        pos in 0usize..3,
        neg in 0usize..3,
        extra in 0usize..3,
    ) {
        let tol = Tolerances::default();
        let dom = SignatureSpace::new(pos + 1, neg);
        let cod = SignatureSpace::new(pos + extra, neg);
        let t = random_j_contraction(&dom, &cod, 0.9, 0.4, &mut rng(seed)).unwrap();
        let parts = julia_operator(&t, &dom, &cod, &tol).unwrap();
        let (jd, jc) = (parts.u_dom.metric(), parts.u_cod.metric());
        let u = &parts.u;
        let scale = 1.0 + norm(u).powi(2);
        prop_assert!(norm(&(u.adjoint() * &jc * u - &jd)) <= 1e-9 * scale);
        prop_assert!(norm(&(u * &jd * u.adjoint() - &jc)) <= 1e-9 * scale);
        let corner = u.view((0, 0), (cod.dim(), dom.dim())).into_owned();
        prop_assert!(norm(&(corner - &t)) <= 1e-12 * scale);
        // Hilbert defect spaces.
        prop_assert_eq!(parts.u_dom.neg(), dom.neg());
        prop_assert_eq!(parts.u_cod.neg(), cod.neg());
    }

    #[test]
    fn julia_embedding_is_conservative(seed in any::<u64>(), pos in 0usize..3, neg in 0usize..2) {
        let tol = Tolerances::default();
        let sys = random_passive_system(pos, neg, 1, 2, 0.9, &mut rng(seed)).unwrap();
        let emb = julia_embedding(&sys, &tol).unwrap();
        prop_assert_eq!(emb.classify(&tol).unwrap().metric, SystemMetric::Conservative);
        prop_assert_eq!(emb.a(), sys.a());
        prop_assert_eq!(emb.state(), sys.state());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn negative_squares_match_pole_count(seed in any::<u64>(), kappa in 0usize..3, extra in 0usize..3) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let zeros = separated_zeros(kappa + extra, 0.15, &mut r);
        let inv = random_inverse_blaschke(&zeros[..kappa], 2, &mut r, &tol).unwrap();
        let b = random_blaschke_product(&zeros[kappa..], 2, &mut r, &tol).unwrap();
        let s = TransferFunction::from_colligation(cascade(&b, &inv).unwrap());
        let est = negative_squares_estimate(&s, &tol).unwrap();
        prop_assert_eq!(est.pole_multiplicity, kappa);
        prop_assert_eq!(est.kernel_estimate, Some(kappa));
        prop_assert!(est.agreement);
    }
}
