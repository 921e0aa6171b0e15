//! Cascade products of colligations, obstructions to observability and
//! controllability of products, invariant fundamental decompositions,
//! system-level Kreĭn–Langer factorization and stability classes.

mod factorize;
mod fundamental;
mod obstruction;
mod stability;

pub use factorize::{kl_factorize_system, FactorMode, SystemFactorization};
pub use fundamental::{invariant_fundamental_decompositions, FundamentalSplit, SplitKind};
pub use obstruction::{
    obstruction_controllable, obstruction_observable, obstruction_simple, ObstructionKind,
    ObstructionReport,
};
pub use stability::{stability_classify, StabilityClass, StabilityLabel};

use crate::colligation::{BareRealization, Colligation};
use crate::error::{Error, Result};
use crate::matrix::{permutation_matrix, ComplexMatrix};

/// Position of the two factor state spaces inside a cascade state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeLayout {
    pub first_dim: usize,
    pub second_dim: usize,
    /// Canonical coordinate i holds raw coordinate `perm[i]`, where the raw
    /// state is (first, second).
    pub perm: Vec<usize>,
}

impl CascadeLayout {
    /// P with canonical = P · raw.
    pub fn to_canonical(&self) -> ComplexMatrix {
        permutation_matrix(&self.perm)
    }
}

/// Cascade Σ₂ ∘ Σ₁: the output of `first` drives `second`, and the transfer
/// function is θ₂θ₁. The state is 𝒳₁ ⊕ 𝒳₂ reordered so that positive
/// directions come first.
pub fn cascade(first: &Colligation, second: &Colligation) -> Result<Colligation> {
    Ok(cascade_with_layout(first, second)?.0)
}

pub fn cascade_with_layout(
    first: &Colligation,
    second: &Colligation,
) -> Result<(Colligation, CascadeLayout)> {
    if first.output_dim() != second.input_dim() {
        return Err(Error::dims(
            "cascade",
            first.output_dim(),
            second.input_dim(),
        ));
    }
    let raw = BareRealization::cascade(first.bare(), second.bare())?;
    let signs = first.state().direct_sum(second.state());
    let perm = signs.canonical_order();
    let layout = CascadeLayout {
        first_dim: first.state_dim(),
        second_dim: second.state_dim(),
        perm,
    };
    let p = layout.to_canonical();
    let pt = p.transpose();
    let sys = Colligation::from_bare(signs.canonical(), raw.transform(&p, &pt))?;
    Ok((sys, layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::SystemMetric;
    use crate::indefinite::{SignatureSpace, Tolerances};
    use crate::matrix::{cx, identity, real_matrix, spectral_norm};
    use crate::schur::{blaschke_potapov_factor, invert_system};

    fn b(alpha: f64) -> Colligation {
        blaschke_potapov_factor(
            cx(alpha, 0.0),
            cx(1.0, 0.0),
            &real_matrix(1, 1, &[1.0]),
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn product_of_two_factors_at_origin() {
        let c = cascade(&b(0.5), &b(1.0 / 3.0)).unwrap();
        let v = c
            .transfer_eval(cx(0.0, 0.0), &Tolerances::default())
            .unwrap();
        assert!((v[(0, 0)] - cx(1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert_eq!(
            c.classify(&Tolerances::default()).unwrap().metric,
            SystemMetric::Conservative
        );
    }

    #[test]
    fn identity_feedthrough_keeps_system() {
        let s = b(0.4);
        let c = cascade(&s, &Colligation::static_gain(identity(1))).unwrap();
        assert_eq!(c, s);
    }

    #[test]
    fn mixed_signature_layout_is_canonical() {
        let tol = Tolerances::default();
        let inv = invert_system(&b(0.5), &tol).unwrap().colligation.unwrap();
        let (c, layout) = cascade_with_layout(&inv, &b(0.25)).unwrap();
        assert_eq!(c.state(), &SignatureSpace::new(1, 1));
        assert_eq!(layout.perm, vec![1, 0]);
        assert_eq!(c.classify(&tol).unwrap().metric, SystemMetric::Conservative);
        for z in crate::sampling::disc_points(10, 3) {
            let direct =
                inv.transfer_eval(z, &tol).unwrap() * b(0.25).transfer_eval(z, &tol).unwrap();
            assert!(spectral_norm(&(c.transfer_eval(z, &tol).unwrap() - direct)) < 1e-10);
        }
    }

    #[test]
    fn dual_of_cascade_reverses_order() {
        let tol = Tolerances::default();
        let inv = invert_system(&b(0.5), &tol).unwrap().colligation.unwrap();
        let s2 = b(0.3);
        let lhs = cascade(&inv, &s2).unwrap().adjoint_system();
        let rhs = cascade(&s2.adjoint_system(), &inv.adjoint_system()).unwrap();
        // Both state spaces list the Hilbert factor first.
        assert_eq!(lhs.state(), rhs.state());
        assert!((lhs.a() - rhs.a()).norm() < 1e-14);
        assert!((lhs.b() - rhs.b()).norm() < 1e-14);
        assert!((lhs.c() - rhs.c()).norm() < 1e-14);
        assert!((lhs.d() - rhs.d()).norm() < 1e-14);
    }
}
