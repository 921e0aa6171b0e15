//! A function with a left Kreĭn–Langer factorization S = b⁻¹S_l whose
//! factors have co-isometric observable realizations, yet the cascade of
//! those realizations is not observable.

use num_complex::Complex64;

use crate::colligation::{BareRealization, Colligation};
use crate::error::{Error, Result};
use crate::indefinite::{SignatureSpace, Tolerances};
use crate::matrix::{hstack, ComplexMatrix};
use crate::products::{
    cascade, obstruction_controllable, obstruction_observable, ObstructionReport,
};
use crate::schur::{
    blaschke_potapov_factor, canonical_coisometric_realization, invert_system, TransferFunction,
};

/// The shift z ↦ z as a conservative one-dimensional system.
pub fn shift() -> Colligation {
    let one = ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    let zero = ComplexMatrix::zeros(1, 1);
    Colligation::new(
        SignatureSpace::hilbert(1),
        zero.clone(),
        one.clone(),
        one,
        zero,
    )
    .expect("shift realization is well formed")
}

/// z^k as a cascade of shifts; k = 0 gives the constant 1.
pub fn monomial(k: usize) -> Result<Colligation> {
    let mut out =
        Colligation::static_gain(ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)));
    for _ in 0..k {
        out = cascade(&out, &shift())?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    /// S = (a, 1/b)/√2.
    pub function: TransferFunction,
    /// S_l = (a·b/√2, 1/√2).
    pub left_factor: TransferFunction,
    pub blaschke: Colligation,
    /// Canonical co-isometric observable realization of S_l.
    pub left_system: Colligation,
    /// Conservative realization of b⁻¹.
    pub blaschke_inverse: Colligation,
    /// Σ_{b⁻¹} ∘ Σ_{S_l}.
    pub cascade: Colligation,
    /// Unobservable states of the cascade.
    pub observable: ObstructionReport,
    /// States J-orthogonal to the controllable subspace of the adjoint
    /// cascade Σ_{S_l}* ∘ Σ_{b⁻¹}*.
    pub controllable: ObstructionReport,
}

/// Builds S = (a, 1/b)/√2 for a scalar inner `a` and the Blaschke factor b
/// with zero α, and runs both obstruction tests on the cascade of the
/// co-isometric observable factor realizations.
pub fn counterexample(
    alpha: Complex64,
    a: &Colligation,
    tol: &Tolerances,
) -> Result<Counterexample> {
    if a.input_dim() != 1 || a.output_dim() != 1 {
        return Err(Error::InvalidParameter(
            "the inner function a must be scalar".into(),
        ));
    }
    let one = ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    let b = blaschke_potapov_factor(alpha, Complex64::new(1.0, 0.0), &one, tol)?;
    let ab = cascade(a, &b)?;
    let h = Complex64::from(0.5_f64.sqrt());
    let n = ab.state_dim();
    let s_l = BareRealization::new(
        ab.a().clone(),
        hstack(n, &[ab.b(), &ComplexMatrix::zeros(n, 1)]),
        ab.c() * h,
        hstack(1, &[&(ab.d() * h), &(&one * h)]),
    )?;
    let b_inv = invert_system(&b, tol)?;
    let blaschke_inverse = b_inv
        .colligation
        .clone()
        .ok_or_else(|| Error::Certification {
            what: "inverse Blaschke factor is not conservative".into(),
            residual: 0.0,
        })?;
    let function = TransferFunction::from_bare(BareRealization::cascade(&s_l, &b_inv.realization)?);
    let left_factor = TransferFunction::from_bare(s_l);
    let left_system = canonical_coisometric_realization(&left_factor, tol)?.system;
    let product = cascade(&left_system, &blaschke_inverse)?;
    let observable = obstruction_observable(&left_system, &blaschke_inverse, tol)?;
    let controllable = obstruction_controllable(
        &blaschke_inverse.adjoint_system(),
        &left_system.adjoint_system(),
        tol,
    )?;
    Ok(Counterexample {
        function,
        left_factor,
        blaschke: b,
        left_system,
        blaschke_inverse,
        cascade: product,
        observable,
        controllable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{cx, spectral_norm};

    #[test]
    fn monomials_evaluate() {
        let tol = Tolerances::default();
        let z = cx(0.3, -0.4);
        let v = monomial(3).unwrap().transfer_eval(z, &tol).unwrap()[(0, 0)];
        assert!((v - z * z * z).norm() < 1e-15);
    }

    #[test]
    fn counterexample_is_not_observable() {
        let tol = Tolerances::default();
        let c = counterexample(cx(0.5, 0.0), &shift(), &tol).unwrap();
        assert_eq!(c.left_system.state_dim(), 2);
        assert_eq!(c.blaschke_inverse.kappa(), 1);
        assert_eq!(c.cascade.state_dim(), 3);
        assert!(c.observable.dimension >= 1);
        assert!(c.controllable.dimension >= 1);
        // S = b⁻¹ S_l at an interior point.
        let z = cx(0.2, 0.1);
        let s = c.function.evaluate(z, &tol).unwrap();
        let h = 0.5_f64.sqrt();
        let bz = (z - 0.5) / (cx(1.0, 0.0) - 0.5 * z);
        let expected = ComplexMatrix::from_row_slice(1, 2, &[z * h, h / bz]);
        assert!(spectral_norm(&(s - expected)) < 1e-14);
    }
}
