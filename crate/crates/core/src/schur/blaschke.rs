use num_complex::Complex64;

use crate::colligation::{BareRealization, Colligation, SystemMetric};
use crate::error::{Error, Result};
use crate::indefinite::{SignatureSpace, Tolerances};
use crate::matrix::{identity, inverse_with_condition, permutation_matrix, ComplexMatrix};
use crate::products::cascade;

/// Conservative one-dimensional realization of the Blaschke–Potapov factor
/// I − P + ρ·(z − α)/(1 − ᾱz)·P with P = uuᴴ.
pub fn blaschke_potapov_factor(
    alpha: Complex64,
    rho: Complex64,
    u: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Colligation> {
    if !(alpha.norm() > 0.0 && alpha.norm() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "zero {alpha} must satisfy 0 < |α| < 1"
        )));
    }
    if (rho.norm() - 1.0).abs() > tol.metric_tol {
        return Err(Error::InvalidParameter(format!(
            "rotation {rho} is not unimodular"
        )));
    }
    if u.ncols() != 1 || u.nrows() == 0 {
        return Err(Error::InvalidParameter(
            "direction must be a nonzero column vector".into(),
        ));
    }
    if (u.norm() - 1.0).abs() > tol.metric_tol {
        return Err(Error::InvalidParameter(
            "direction must have unit norm".into(),
        ));
    }
    let m = u.nrows();
    let s = Complex64::from((1.0 - alpha.norm_sqr()).sqrt());
    let p = u * u.adjoint();
    let a = ComplexMatrix::from_element(1, 1, alpha.conj());
    let b = u.adjoint() * s;
    let c = u * (rho * s);
    let d = identity(m) - &p + p * (-rho * alpha);
    Colligation::new(SignatureSpace::hilbert(1), a, b, c, d)
}

/// Cascade of Blaschke–Potapov factors in the given order; the transfer
/// function is the product with the first factor on the right.
pub fn blaschke_product(factors: &[Colligation]) -> Result<Colligation> {
    let (head, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty factor list".into()))?;
    rest.iter()
        .try_fold(head.clone(), |acc, f| cascade(&acc, f))
}

/// Realization of θ⁻¹, with a conservative colligation when one exists.
#[derive(Debug, Clone)]
pub struct InvertedSystem {
    pub realization: BareRealization,
    /// Present when a state metric making the inverse conservative was found
    /// and verified.
    pub colligation: Option<Colligation>,
    pub condition: f64,
}

/// State-space inverse (A − BD⁻¹C, BD⁻¹, −D⁻¹C, D⁻¹).
///
/// For a conservative input the negated state metric makes the inverse
/// conservative; that candidate (reordered so positive directions come
/// first) is verified before it is returned.
pub fn invert_system(sys: &Colligation, tol: &Tolerances) -> Result<InvertedSystem> {
    let d = sys.d();
    if d.nrows() != d.ncols() {
        return Err(Error::Singular("feedthrough is not square".into()));
    }
    let (d_inv, condition) = inverse_with_condition(d)?;
    if condition > 1.0 / tol.rank_tol {
        return Err(Error::Singular(format!(
            "feedthrough condition number {condition:.2e}"
        )));
    }
    let a = sys.a() - sys.b() * &d_inv * sys.c();
    let b = sys.b() * &d_inv;
    let c = -(&d_inv * sys.c());
    let realization = BareRealization::new(a, b, c, d_inv)?;

    let mut colligation = None;
    if sys.classify(tol)?.metric == SystemMetric::Conservative {
        for candidate in [sys.state().negated(), sys.state().clone()] {
            let perm = candidate.canonical_order();
            let p = permutation_matrix(&perm);
            let moved = realization.transform(&p, &p.transpose());
            let c = Colligation::from_bare(candidate.canonical(), moved)?;
            if c.classify(tol)?.metric == SystemMetric::Conservative {
                colligation = Some(c);
                break;
            }
        }
    }
    Ok(InvertedSystem {
        realization,
        colligation,
        condition,
    })
}
