use serde::Serialize;

use super::{krylov_report, Colligation};
use crate::error::{Error, Result};
use crate::indefinite::{
    invariance_residual, j_adjoint, j_orthonormal_basis, subspace_classify, IndefiniteSubspace,
    Tolerances,
};
use crate::matrix::{hstack, intersection, orth, spectral_norm};
use crate::sampling::{disc_points, exclude_near};

/// Compression of a colligation to a regular state subspace X:
/// (P_X A↾X, P_X B, C↾X, D) in a J-orthonormal basis of X.
pub fn restriction(
    big: &Colligation,
    x: &IndefiniteSubspace,
    tol: &Tolerances,
) -> Result<Colligation> {
    if x.ambient() != big.state() {
        return Err(Error::InvalidParameter(
            "subspace is not in the state space".into(),
        ));
    }
    let (w, sig) = j_orthonormal_basis(x, tol)?;
    let j = big.state();
    // Coordinates of the J-orthogonal projection: ξ = J_X Wᴴ J x.
    let coord = sig.apply_left(&j.apply_right(&w.adjoint()));
    Colligation::new(
        sig,
        &coord * big.a() * &w,
        &coord * big.b(),
        big.c() * &w,
        big.d().clone(),
    )
}

/// The two outer subspaces of a dilation: 𝒟 (main-operator invariant, killed
/// by C) and 𝒟_* (invariant for the adjoint, orthogonal to the range of B).
#[derive(Debug, Clone)]
pub struct DilationSplit {
    pub inner: IndefiniteSubspace,
    pub outer: IndefiniteSubspace,
}

#[derive(Debug, Clone, Serialize)]
pub struct DilationReport {
    pub is_dilation: bool,
    /// Named defect norms of the structural conditions.
    pub defects: Vec<(String, f64)>,
    /// Largest relative transfer-function discrepancy on the disc samples.
    pub transfer_error: f64,
    pub failures: Vec<String>,
}

fn default_split(big: &Colligation, tol: &Tolerances) -> Result<DilationSplit> {
    let k = krylov_report(big, tol)?;
    let inner = k.observable_perp.clone();
    let inner_perp = inner.orthogonal_complement(tol);
    let outer_basis = intersection(
        k.controllable_perp.basis(),
        inner_perp.basis(),
        tol.rank_tol,
    );
    let outer = IndefiniteSubspace::span(big.state().clone(), &outer_basis, tol)?;
    Ok(DilationSplit { inner, outer })
}

/// Checks that `big` is a dilation of `small`: the state of `big` splits as
/// 𝒟 ⊕ 𝒳 ⊕ 𝒟_* with the invariance and annihilation conditions of a
/// dilation, and the compression to 𝒳 has the transfer function of `small`.
///
/// Without an explicit split, 𝒟 is taken as the unobservable subspace and
/// 𝒟_* as the uncontrollable vectors J-orthogonal to 𝒟.
pub fn is_dilation_of(
    big: &Colligation,
    small: &Colligation,
    split: Option<&DilationSplit>,
    tol: &Tolerances,
) -> Result<DilationReport> {
    let split = match split {
        Some(s) => s.clone(),
        None => default_split(big, tol)?,
    };
    let j = big.state();
    let n = j.dim();
    let mut defects = Vec::new();
    let mut failures = Vec::new();
    let limit = |scale: f64| tol.metric_tol * scale.max(1.0);
    let a_norm = spectral_norm(big.a());

    for (name, s) in [("inner", &split.inner), ("outer", &split.outer)] {
        if !subspace_classify(s, tol)?.is_regular() {
            failures.push(format!("{name} subspace is degenerate"));
        }
    }
    let vd = orth(split.inner.basis(), tol.rank_tol);
    let vs = orth(split.outer.basis(), tol.rank_tol);

    let cross = spectral_norm(&(vd.adjoint() * j.apply_left(&vs)));
    defects.push(("inner_outer_orthogonality".to_string(), cross));
    let a_inner = invariance_residual(big.a(), &split.inner, tol);
    defects.push(("main_invariance_inner".to_string(), a_inner));
    let a_adj = j_adjoint(big.a(), j, j)?;
    let a_outer = invariance_residual(&a_adj, &split.outer, tol);
    defects.push(("adjoint_invariance_outer".to_string(), a_outer));
    let c_inner = spectral_norm(&(big.c() * &vd));
    defects.push(("observation_on_inner".to_string(), c_inner));
    let b_outer = spectral_norm(&(big.b().adjoint() * j.apply_left(&vs)));
    defects.push(("control_adjoint_on_outer".to_string(), b_outer));

    let checks = [
        ("inner and outer subspaces are not J-orthogonal", cross, 1.0),
        ("inner subspace is not invariant under A", a_inner, a_norm),
        (
            "outer subspace is not invariant under the adjoint of A",
            a_outer,
            a_norm,
        ),
        (
            "C does not vanish on the inner subspace",
            c_inner,
            spectral_norm(big.c()),
        ),
        (
            "adjoint of B does not vanish on the outer subspace",
            b_outer,
            spectral_norm(big.b()),
        ),
    ];
    for (msg, value, scale) in checks {
        if value > limit(scale) {
            failures.push(msg.to_string());
        }
    }

    let outer_span = hstack(n, &[&vd, &vs]);
    let both = IndefiniteSubspace::span(j.clone(), &outer_span, tol)?;
    let middle = both.orthogonal_complement(tol);
    let mut transfer_error = f64::INFINITY;
    match restriction(big, &middle, tol) {
        Ok(res) => {
            if res.state() != small.state()
                || res.input_dim() != small.input_dim()
                || res.output_dim() != small.output_dim()
            {
                failures.push(format!(
                    "compressed state has signature ({}, {}) but the target has ({}, {})",
                    res.state().pos(),
                    res.state().neg(),
                    small.state().pos(),
                    small.state().neg()
                ));
            }
            if res.input_dim() == small.input_dim() && res.output_dim() == small.output_dim() {
                transfer_error = transfer_distance(&res, small, tol)?;
                if transfer_error > tol.metric_tol {
                    failures.push("transfer functions differ".to_string());
                }
            }
        }
        Err(_) => failures.push("middle subspace is degenerate".to_string()),
    }
    Ok(DilationReport {
        is_dilation: failures.is_empty(),
        defects,
        transfer_error,
        failures,
    })
}

/// Largest relative distance between two transfer functions on the disc
/// sample plan, skipping points near poles of either.
pub(crate) fn transfer_distance(
    s1: &Colligation,
    s2: &Colligation,
    tol: &Tolerances,
) -> Result<f64> {
    let mut poles = s1.bare().disc_poles()?;
    poles.extend(s2.bare().disc_poles()?);
    let pts = exclude_near(
        disc_points(tol.disc_samples, tol.seed),
        &poles,
        10.0 * tol.rank_tol,
    );
    let mut worst: f64 = 0.0;
    for z in pts {
        let (t1, t2) = (s1.transfer_eval(z, tol)?, s2.transfer_eval(z, tol)?);
        worst = worst.max(spectral_norm(&(&t1 - &t2)) / spectral_norm(&t2).max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indefinite::SignatureSpace;
    use crate::matrix::{real_matrix, vstack, zeros, ComplexMatrix};

    fn base() -> Colligation {
        Colligation::new(
            SignatureSpace::new(1, 1),
            real_matrix(2, 2, &[0.3, 0.2, -0.1, 1.4]),
            real_matrix(2, 1, &[0.5, 0.7]),
            real_matrix(1, 2, &[0.6, -0.2]),
            real_matrix(1, 1, &[0.1]),
        )
        .unwrap()
    }

    /// Block-triangular system on 𝒟 ⊕ 𝒳 ⊕ 𝒟_* with Hilbert outer blocks.
    fn dilated(break_c: bool) -> (Colligation, DilationSplit) {
        let s = base();
        let a11 = real_matrix(1, 1, &[0.2]);
        let a33 = real_matrix(1, 1, &[-0.3]);
        let x = s.a();
        // Block layout in (𝒟, 𝒳, 𝒟_*) order, later permuted.
        let mut raw = zeros(4, 4);
        raw.view_mut((0, 0), (1, 1)).copy_from(&a11);
        raw.view_mut((1, 1), (2, 2)).copy_from(x);
        raw.view_mut((3, 3), (1, 1)).copy_from(&a33);
        raw[(0, 1)] = 0.4.into();
        raw[(0, 2)] = (-0.2).into();
        raw[(0, 3)] = 0.3.into();
        raw[(1, 3)] = 0.25.into();
        raw[(2, 3)] = (-0.15).into();
        let b_raw = vstack(1, &[&real_matrix(1, 1, &[0.9]), s.b(), &zeros(1, 1)]);
        let c_raw = ComplexMatrix::from_row_slice(
            1,
            4,
            &[
                if break_c { 0.5.into() } else { 0.0.into() },
                s.c()[(0, 0)],
                s.c()[(0, 1)],
                0.8.into(),
            ],
        );
        // raw order: 𝒟(+), 𝒳₊(+), 𝒳₋(−), 𝒟_*(+) → canonical: 0, 1, 3, 2.
        let perm = [0usize, 1, 3, 2];
        let p = crate::matrix::permutation_matrix(&perm);
        let a = &p * raw * p.transpose();
        let b = &p * b_raw;
        let c = c_raw * p.transpose();
        let big = Colligation::new(SignatureSpace::new(3, 1), a, b, c, s.d().clone()).unwrap();
        let e = |i: usize| {
            let mut v = zeros(4, 1);
            v[(i, 0)] = 1.0.into();
            v
        };
        let tol = Tolerances::default();
        let split = DilationSplit {
            inner: IndefiniteSubspace::new(big.state().clone(), e(0), &tol).unwrap(),
            outer: IndefiniteSubspace::new(big.state().clone(), e(2), &tol).unwrap(),
        };
        (big, split)
    }

    #[test]
    fn whole_space_restriction_is_identity() {
        let s = base();
        let tol = Tolerances::default();
        let r = restriction(&s, &IndefiniteSubspace::whole(s.state().clone()), &tol).unwrap();
        assert!((r.a() - s.a()).norm() < 1e-12);
        assert!((r.b() - s.b()).norm() < 1e-12);
        assert!((r.c() - s.c()).norm() < 1e-12);
    }

    #[test]
    fn constructed_dilation_is_recognized() {
        let (big, split) = dilated(false);
        let tol = Tolerances::default();
        let rep = is_dilation_of(&big, &base(), Some(&split), &tol).unwrap();
        assert!(rep.is_dilation, "{:?}", rep.failures);
        assert!(rep.transfer_error < 1e-10);
    }

    #[test]
    fn broken_observation_condition_is_named() {
        let (big, split) = dilated(true);
        let rep = is_dilation_of(&big, &base(), Some(&split), &Tolerances::default()).unwrap();
        assert!(!rep.is_dilation);
        assert!(rep.failures.iter().any(|f| f.contains("C does not vanish")));
    }
}
