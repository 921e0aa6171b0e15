//! Acceptance suite: each criterion runs on seeded random families at its
//! stated tolerance and prints one PASS/FAIL line.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use pontryagin::colligation::{krylov_report, weak_similarity, Colligation};
use pontryagin::example::{counterexample, shift};
use pontryagin::indefinite::{SignatureSpace, Tolerances};
use pontryagin::julia::julia_operator;
use pontryagin::matrix::{
    identity, orth, singular_values, spectral_norm, subspace_distance, ComplexMatrix,
};
use pontryagin::products::{
    cascade, invariant_fundamental_decompositions, obstruction_observable, stability_classify,
    StabilityLabel,
};
use pontryagin::random::{
    random_blaschke_product, random_conservative_system, random_inverse_blaschke,
    random_j_contraction, random_matrix, random_passive_system, rng, separated_zeros,
};
use pontryagin::sampling::{boundary_points, disc_points};
use pontryagin::schur::{
    boundary_behavior, defect, kl_factorize_function, negative_squares_estimate, TransferFunction,
};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// D + zC(I − zA)⁻¹B evaluated with a dense LU solve.
fn eval(sys: &Colligation, z: Complex64) -> ComplexMatrix {
    let n = sys.state_dim();
    if n == 0 {
        return sys.d().clone();
    }
    let m = identity(n) - sys.a() * z;
    let x = m
        .lu()
        .solve(sys.b())
        .expect("resolvent exists at sample points");
    sys.d() + sys.c() * x * z
}

fn j_adjoint(u: &ComplexMatrix, dom: &SignatureSpace, cod: &SignatureSpace) -> ComplexMatrix {
    dom.metric() * u.adjoint() * cod.metric()
}

fn criterion_1() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut kernel_failures = 0;
    for _ in 0..200 {
        let kappa = r.random_range(0..=2);
        let (p1, p2) = (r.random_range(0..=8 - kappa), r.random_range(0..=8 - kappa));
        if p1 + kappa == 0 || p2 + kappa == 0 {
            continue;
        }
        let (dom, cod) = (
            SignatureSpace::new(p1, kappa),
            SignatureSpace::new(p2, kappa),
        );
        let t =
            random_j_contraction(&dom, &cod, 0.95, 0.7, &mut r).expect("equal negative indices");
        let parts = match julia_operator(&t, &dom, &cod, &tol) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("julia_operator failed: {e}")),
        };
        let adj = j_adjoint(&parts.u, &parts.u_dom, &parts.u_cod);
        worst = worst
            .max(spectral_norm(
                &(&adj * &parts.u - identity(parts.u_dom.dim())),
            ))
            .max(spectral_norm(
                &(&parts.u * &adj - identity(parts.u_cod.dim())),
            ));
        for d in [&parts.d_t, &parts.d_t_star] {
            let s = singular_values(d);
            let top = s.first().copied().unwrap_or(0.0).max(1.0);
            if s.len() < d.ncols() || s.iter().any(|&x| x <= tol.rank_tol * top) {
                kernel_failures += 1;
            }
        }
    }
    outcome(
        worst <= 1e-8 && kernel_failures == 0,
        format!("max J-unitarity residual {worst:.2e}, defect kernels {kernel_failures}"),
    )
}

fn criterion_2() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(202);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (m, k, p) = (
            r.random_range(1..=3),
            r.random_range(1..=3),
            r.random_range(1..=3),
        );
        let s1 = random_passive_system(
            r.random_range(0..=4),
            r.random_range(0..=2),
            m,
            k,
            0.9,
            &mut r,
        )
        .unwrap();
        let s2 = random_passive_system(
            r.random_range(0..=4),
            r.random_range(0..=2),
            k,
            p,
            0.9,
            &mut r,
        )
        .unwrap();
        let prod = cascade(&s1, &s2).unwrap();
        for z in disc_points(50, 5) {
            let expected = eval(&s2, z) * eval(&s1, z);
            let got = prod.transfer_eval(z, &tol).unwrap();
            worst =
                worst.max(spectral_norm(&(got - &expected)) / spectral_norm(&expected).max(1.0));
        }
    }
    outcome(worst <= 1e-9, format!("max relative error {worst:.2e}"))
}

/// (inner Blaschke product of degree ≤ 3)·(inverse Blaschke of degree κ),
/// realized as the cascade with the inverse factor first.
fn kl_family(count: usize, kappas: &[usize], seed: u64) -> Vec<(Colligation, usize)> {
    let tol = Tolerances::default();
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let kappa = kappas[i % kappas.len()];
            let degree = r.random_range(0..=3);
            let dim = r.random_range(1..=2);
            let zeros = separated_zeros(kappa + degree, 0.15, &mut r);
            let inv = random_inverse_blaschke(&zeros[..kappa], dim, &mut r, &tol).unwrap();
            let inner = random_blaschke_product(&zeros[kappa..], dim, &mut r, &tol).unwrap();
            (cascade(&inv, &inner).unwrap(), kappa)
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let tol = Tolerances::default();
    let mut worst_reconstruction: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, (sys, kappa)) in kl_family(50, &[1, 2, 3], 303).into_iter().enumerate() {
        // Alternate between system-backed and metric-free inputs so both
        // factorization routes are exercised.
        let s = if i % 2 == 0 {
            TransferFunction::from_colligation(sys.clone())
        } else {
            TransferFunction::from_bare(sys.bare().clone())
        };
        let f = match kl_factorize_function(&s, &tol) {
            Ok(f) => f,
            Err(e) => {
                failures.push(format!("case {i}: {e}"));
                continue;
            }
        };
        if f.degree != kappa || f.right.degree != kappa || f.left.degree != kappa {
            failures.push(format!("case {i}: degree {} for κ = {kappa}", f.degree));
        }
        for side in [&f.right, &f.left] {
            if side.negative_squares != Some(0) {
                failures.push(format!(
                    "case {i}: Schur factor negative squares {:?}",
                    side.negative_squares
                ));
            }
        }
        for g in [&f.s_r, &f.s_l] {
            for (_, z) in boundary_points(256, 9) {
                worst_sigma = worst_sigma.max(singular_values(&g.evaluate(z, &tol).unwrap())[0]);
            }
        }
        for z in disc_points(64, 11) {
            let sz = eval(&sys, z);
            let right = f.s_r.evaluate(z, &tol).unwrap()
                * f.b_r.evaluate(z, &tol).unwrap().try_inverse().unwrap();
            let left = f.b_l.evaluate(z, &tol).unwrap().try_inverse().unwrap()
                * f.s_l.evaluate(z, &tol).unwrap();
            worst_reconstruction = worst_reconstruction
                .max(spectral_norm(&(&sz - right)))
                .max(spectral_norm(&(&sz - left)));
        }
    }
    let pass = failures.is_empty() && worst_reconstruction <= 1e-7 && worst_sigma <= 1.0 + 1e-8;
    outcome(
        pass,
        format!(
            "max reconstruction {worst_reconstruction:.2e}, max boundary sigma {worst_sigma:.12}, failures {failures:?}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for (i, (sys, _)) in kl_family(50, &[1, 2, 3], 303)
        .into_iter()
        .chain(kl_family(10, &[0], 404))
        .enumerate()
    {
        cases += 1;
        let poles = pontryagin::eigen::eig_general(sys.a())
            .unwrap()
            .iter()
            .filter(|l| l.norm() > 1.0)
            .count();
        let est =
            negative_squares_estimate(&TransferFunction::from_colligation(sys), &tol).unwrap();
        if est.kernel_estimate != Some(poles) {
            mismatches.push(format!(
                "case {i}: κ̂ {:?} vs {poles} poles",
                est.kernel_estimate
            ));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{cases} functions, mismatches {mismatches:?}"),
    )
}

fn criterion_5() -> Outcome {
    let tol = Tolerances::default();
    let c = match counterexample(Complex64::new(0.5, 0.0), &shift(), &tol) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let agree = |r: &pontryagin::products::ObstructionReport| {
        r.krylov_dimension == r.taylor_dimension && r.agreement_residual <= 1e-8
    };
    let pass = c.observable.dimension >= 1
        && c.controllable.dimension >= 1
        && agree(&c.observable)
        && agree(&c.controllable);
    outcome(
        pass,
        format!(
            "observability obstruction dim {} (angle {:.1e}), controllability obstruction dim {} (angle {:.1e}); factor dims {} and {}",
            c.observable.dimension,
            c.observable.agreement_residual,
            c.controllable.dimension,
            c.controllable.agreement_residual,
            c.left_system.state_dim(),
            c.blaschke_inverse.state_dim()
        ),
    )
}

fn criterion_6() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(606);
    let mut bad = Vec::new();
    let mut accepted = 0;
    let mut rejected = 0;
    while accepted < 50 {
        let (m, p) = (r.random_range(1..=2), r.random_range(1..=2));
        let theta = random_passive_system(r.random_range(1..=3), 0, m, p, 0.9, &mut r).unwrap();
        if !krylov_report(&theta, &tol).unwrap().is_observable() {
            rejected += 1;
            continue;
        }
        let kappa = r.random_range(1..=3);
        let zeros = separated_zeros(kappa, 0.15, &mut r);
        let b = random_blaschke_product(&zeros, m, &mut r, &tol).unwrap();
        let binv = pontryagin::schur::invert_system(&b, &tol)
            .unwrap()
            .colligation
            .unwrap();
        // No common zeros: [B_r(α); θ_r(α)] has full column rank at every zero.
        let coprime = zeros.iter().all(|&a| {
            let stacked = pontryagin::matrix::vstack(m, &[&eval(&b, a), &eval(&theta, a)]);
            singular_values(&stacked)[m - 1] > 1e-6
        });
        if !coprime {
            rejected += 1;
            continue;
        }
        accepted += 1;
        let report = obstruction_observable(&binv, &theta, &tol).unwrap();
        if report.dimension != 0 {
            bad.push(format!(
                "pair {accepted}: obstruction dim {}",
                report.dimension
            ));
        }
    }
    outcome(
        bad.is_empty(),
        format!("50 pairs ({rejected} resampled), failures {bad:?}"),
    )
}

/// Projection onto the spectral subspace of A outside the closed disc, by
/// the trapezoid rule for the Riesz integral over the unit circle.
fn outside_projection(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let nodes = 1024;
    let mut inside = ComplexMatrix::zeros(n, n);
    for k in 0..nodes {
        let lambda = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / nodes as f64);
        let res = (identity(n) * lambda - a).try_inverse().unwrap();
        inside += res * (lambda / nodes as f64);
    }
    identity(n) - inside
}

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let mut failures = Vec::new();
    let mut worst_invariance: f64 = 0.0;
    let mut worst_angle: f64 = 0.0;
    for (i, (sys, kappa)) in kl_family(50, &[1, 2, 3], 303).into_iter().enumerate() {
        let (split1, split2) = match invariant_fundamental_decompositions(&sys, &tol) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("case {i}: {e}"));
                continue;
            }
        };
        let j = sys.state().metric();
        for (op, inv) in [
            (sys.a().clone(), split1.plus.basis()),
            (sys.a().clone(), split2.minus.basis()),
        ] {
            if inv.ncols() == 0 {
                continue;
            }
            let q = orth(inv, tol.rank_tol);
            let leak = (identity(q.nrows()) - &q * q.adjoint()) * &op * &q;
            worst_invariance =
                worst_invariance.max(spectral_norm(&leak) / spectral_norm(&op).max(1.0));
        }
        for split in [&split1, &split2] {
            if split.minus.dim() != kappa {
                failures.push(format!(
                    "case {i}: minus dimension {} for κ = {kappa}",
                    split.minus.dim()
                ));
                continue;
            }
            let q = orth(split.minus.basis(), tol.rank_tol);
            let g = q.adjoint() * &j * &q;
            let top = pontryagin::eigen::eig_hermitian(&g)
                .unwrap()
                .values
                .last()
                .copied()
                .unwrap_or(-1.0);
            if top >= -tol.psd_tol {
                failures.push(format!("case {i}: minus Gram eigenvalue {top:.2e}"));
            }
        }
        let reference = orth(&outside_projection(sys.a()), 1e-8);
        worst_angle = worst_angle.max(subspace_distance(
            split2.minus.basis(),
            &reference,
            tol.rank_tol,
        ));
    }
    let pass = failures.is_empty() && worst_invariance <= 1e-9 && worst_angle <= 1e-8;
    outcome(
        pass,
        format!("max invariance residual {worst_invariance:.2e}, max angle to spectral subspace {worst_angle:.2e}, failures {failures:?}"),
    )
}

/// Simple conservative systems mixing inner factors, inverse Blaschke
/// factors and generic conservative systems.
fn conservative_family(count: usize, seed: u64) -> Vec<Colligation> {
    let tol = Tolerances::default();
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let dim = r.random_range(1..=2);
        let pieces = r.random_range(1..=3);
        let mut sys: Option<Colligation> = None;
        for _ in 0..pieces {
            let piece = match r.random_range(0..3) {
                0 => {
                    let zeros = separated_zeros(r.random_range(1..=2), 0.15, &mut r);
                    random_blaschke_product(&zeros, dim, &mut r, &tol).unwrap()
                }
                1 => {
                    let zeros = separated_zeros(r.random_range(1..=2), 0.15, &mut r);
                    random_inverse_blaschke(&zeros, dim, &mut r, &tol).unwrap()
                }
                _ => random_conservative_system(
                    r.random_range(0..=2),
                    r.random_range(0..=1),
                    dim,
                    &mut r,
                )
                .unwrap(),
            };
            sys = Some(match sys {
                None => piece,
                Some(s) => cascade(&s, &piece).unwrap(),
            });
        }
        let sys = sys.unwrap();
        if sys.state_dim() > 0
            && sys.state_dim() <= 12
            && krylov_report(&sys, &tol).unwrap().is_simple()
        {
            out.push(sys);
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let tol = Tolerances::default();
    let mut disagreements = Vec::new();
    let mut skipped = Vec::new();
    let mut counted = 0;
    let mut bi_inner = 0;
    for (i, sys) in conservative_family(30, 808).into_iter().enumerate() {
        let class = match stability_classify(&sys, &tol) {
            Ok(c) => c,
            Err(e) => {
                skipped.push(format!("case {i}: {e}"));
                continue;
            }
        };
        let b = boundary_behavior(&TransferFunction::from_colligation(sys), &tol).unwrap();
        counted += 1;
        bi_inner += usize::from(b.bi_inner);
        let has = |l| class.classes.contains(&l);
        if has(StabilityLabel::C0Dot) != b.inner
            || has(StabilityLabel::CDot0) != b.co_inner
            || has(StabilityLabel::C00) != b.bi_inner
        {
            disagreements.push(format!(
                "case {i}: classes {:?}, inner {} co-inner {}",
                class.classes, b.inner, b.co_inner
            ));
        }
    }
    outcome(
        disagreements.is_empty() && skipped.is_empty(),
        format!(
            "{counted} systems ({bi_inner} bi-inner), disagreements {disagreements:?}, not classified {skipped:?}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let tol = Tolerances::default();
    let mut disagreements = Vec::new();
    let mut minimal = 0;
    for (i, sys) in conservative_family(30, 909).into_iter().enumerate() {
        let k = krylov_report(&sys, &tol).unwrap();
        minimal += usize::from(k.is_minimal());
        let d = defect(&TransferFunction::from_colligation(sys), &tol).unwrap();
        if k.is_controllable() != d.psi_zero || k.is_observable() != d.phi_zero {
            disagreements.push(format!(
                "case {i}: controllable {} ψ≡0 {}, observable {} φ≡0 {}",
                k.is_controllable(),
                d.psi_zero,
                k.is_observable(),
                d.phi_zero
            ));
        }
    }
    // Scalar spectral factorization on passive scalar systems with a margin.
    let mut r = rng(919);
    let mut worst_residual: f64 = 0.0;
    let mut min_root = f64::INFINITY;
    for _ in 0..30 {
        let sys = random_passive_system(r.random_range(1..=3), 0, 1, 1, 0.9, &mut r).unwrap();
        let d = defect(&TransferFunction::from_colligation(sys.clone()), &tol).unwrap();
        let phi = d
            .phi
            .clone()
            .expect("strictly passive scalar systems have a nonzero defect");
        for (_, z) in boundary_points(256, 21) {
            let s = eval(&sys, z)[(0, 0)];
            worst_residual =
                worst_residual.max((phi.evaluate(z).norm_sqr() - (1.0 - s.norm_sqr())).abs());
        }
        min_root = min_root.min(d.min_root_modulus);
    }
    let pass = disagreements.is_empty() && worst_residual <= 1e-8 && min_root >= 1.0 - 1e-6;
    outcome(
        pass,
        format!(
            "{minimal} of 30 minimal, disagreements {disagreements:?}; Fejér–Riesz max boundary residual {worst_residual:.2e}, min root modulus {min_root:.6}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(1010);
    let mut worst: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut done = 0;
    let mut failures = Vec::new();
    while done < 20 {
        let (m, p) = (r.random_range(1..=2), r.random_range(1..=2));
        let s1 = random_passive_system(
            r.random_range(1..=3),
            r.random_range(0..=1),
            m,
            p,
            0.8,
            &mut r,
        )
        .unwrap();
        if !krylov_report(&s1, &tol).unwrap().is_minimal() {
            continue;
        }
        let n = s1.state_dim();
        let z = identity(n) + random_matrix(n, n, &mut r) * Complex64::from(0.02);
        let z_inv = z.clone().try_inverse().unwrap();
        let s2 = s1.transform(s1.state().clone(), &z, &z_inv).unwrap();
        if !s2.classify(&tol).unwrap().metric.is_passive() {
            continue;
        }
        done += 1;
        match weak_similarity(&s1, &s2, &tol) {
            Ok(res) => {
                worst = worst.max(res.max_residual());
                worst_z = worst_z.max(spectral_norm(&(&res.z - &z)) / spectral_norm(&z));
                if !res.condition.is_finite() {
                    failures.push(format!("pair {done}: singular Z"));
                }
            }
            Err(e) => failures.push(format!("pair {done}: {e}")),
        }
    }
    outcome(
        failures.is_empty() && worst <= 1e-8,
        format!("max intertwining residual {worst:.2e}, max distance to the applied change {worst_z:.2e}, failures {failures:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 Julia unitarity", criterion_1),
        ("2 transfer multiplicativity", criterion_2),
        ("3 Krein-Langer round trip", criterion_3),
        ("4 negative squares = pole multiplicity", criterion_4),
        ("5 counterexample reproduction", criterion_5),
        ("6 product observability", criterion_6),
        ("7 invariant fundamental decompositions", criterion_7),
        ("8 stability/boundary equivalence", criterion_8),
        ("9 zero-defect equivalences", criterion_9),
        ("10 weak similarity", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.2}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!(
        "acceptance: {} of 10 passed in {:.1}s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
