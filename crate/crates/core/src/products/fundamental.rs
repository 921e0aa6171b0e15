use serde::Serialize;

use crate::colligation::{complements_hilbert, Colligation};
use crate::eigen::{eig_hermitian, invariant_subspace};
use crate::error::{Error, Result};
use crate::indefinite::{
    invariance_residual, j_adjoint, subspace_classify, IndefiniteSubspace, SubspaceClass,
    Tolerances,
};
use crate::matrix::{orth, spectral_norm, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// A maps the positive part into itself.
    PlusInvariant,
    /// A maps the negative part into itself.
    MinusInvariant,
}

/// A fundamental decomposition 𝒳 = 𝒳⁺ ⊕ 𝒳⁻ adapted to the main operator.
#[derive(Debug, Clone)]
pub struct FundamentalSplit {
    pub which: SplitKind,
    pub plus: IndefiniteSubspace,
    pub minus: IndefiniteSubspace,
    /// Invariance residual of the invariant part under A.
    pub invariance_residual: f64,
    /// Largest eigenvalue of the Gram matrix of an orthonormal basis of 𝒳⁻.
    pub minus_gram_max: f64,
    /// Smallest eigenvalue of the Gram matrix of an orthonormal basis of 𝒳⁺.
    pub plus_gram_min: f64,
}

impl FundamentalSplit {
    pub fn invariant_part(&self) -> &IndefiniteSubspace {
        match self.which {
            SplitKind::PlusInvariant => &self.plus,
            SplitKind::MinusInvariant => &self.minus,
        }
    }
}

fn gram_extremes(s: &IndefiniteSubspace, tol: &Tolerances) -> Result<(f64, f64)> {
    if s.dim() == 0 {
        return Ok((f64::INFINITY, f64::NEG_INFINITY));
    }
    let e = eig_hermitian(&s.orthonormalized(tol).gram())?;
    Ok((e.values[0], e.values[e.values.len() - 1]))
}

/// Invariant subspace of `a` for the eigenvalues outside the closed disc.
/// Eigenvalues within `metric_tol` of the circle are accepted only when
/// their spectral subspace is positive.
fn outside_subspace(
    a: &ComplexMatrix,
    sys: &Colligation,
    tol: &Tolerances,
) -> Result<IndefiniteSubspace> {
    let band = tol.metric_tol;
    let near = |z: num_complex::Complex64| (z.norm() - 1.0).abs() <= band;
    let (near_basis, near_values) = invariant_subspace(a, near)?;
    if !near_values.is_empty() {
        let s = IndefiniteSubspace::span(sys.state().clone(), &near_basis, tol)?;
        if subspace_classify(&s, tol)? != SubspaceClass::Hilbert {
            return Err(Error::SpectralAmbiguity {
                eigenvalue: near_values[0],
            });
        }
    }
    let (basis, _) = invariant_subspace(a, |z| z.norm() > 1.0 + band)?;
    IndefiniteSubspace::span(sys.state().clone(), &basis, tol)
}

fn certify(
    which: SplitKind,
    plus: IndefiniteSubspace,
    minus: IndefiniteSubspace,
    sys: &Colligation,
    tol: &Tolerances,
) -> Result<FundamentalSplit> {
    let kappa = sys.kappa();
    if minus.dim() != kappa || plus.dim() + minus.dim() != sys.state_dim() {
        return Err(Error::Precondition(format!(
            "negative spectral part has dimension {} but the state has {kappa} negative directions",
            minus.dim()
        )));
    }
    let (_, minus_gram_max) = gram_extremes(&minus, tol)?;
    let (plus_gram_min, _) = gram_extremes(&plus, tol)?;
    if kappa > 0 && minus_gram_max >= -tol.psd_tol {
        return Err(Error::Precondition(
            "negative spectral part is not anti-Hilbert".into(),
        ));
    }
    if plus.dim() > 0 && plus_gram_min <= tol.psd_tol {
        return Err(Error::Precondition(
            "complementary part is not Hilbert".into(),
        ));
    }
    let invariant = match which {
        SplitKind::PlusInvariant => &plus,
        SplitKind::MinusInvariant => &minus,
    };
    let residual = invariance_residual(sys.a(), invariant, tol);
    let cross = if plus.dim() > 0 && minus.dim() > 0 {
        let (p, m) = (
            orth(plus.basis(), tol.rank_tol),
            orth(minus.basis(), tol.rank_tol),
        );
        spectral_norm(&(p.adjoint() * sys.state().apply_left(&m)))
    } else {
        0.0
    };
    let scale = spectral_norm(sys.a()).max(1.0);
    if residual > tol.metric_tol * scale || cross > tol.metric_tol {
        return Err(Error::Certification {
            what: "fundamental decomposition".into(),
            residual: residual.max(cross),
        });
    }
    Ok(FundamentalSplit {
        which,
        plus,
        minus,
        invariance_residual: residual,
        minus_gram_max,
        plus_gram_min,
    })
}

/// The two fundamental decompositions of the state space of a passive,
/// index-preserving system that are adapted to the main operator A:
/// 𝒳 = 𝒳₁⁺ ⊕ 𝒳₁⁻ with A𝒳₁⁺ ⊆ 𝒳₁⁺, and 𝒳 = 𝒳₂⁺ ⊕ 𝒳₂⁻ with A𝒳₂⁻ ⊆ 𝒳₂⁻.
///
/// 𝒳₂⁻ is the spectral subspace of A for the eigenvalues outside the closed
/// disc; 𝒳₁⁻ is the same subspace for A^[*], and the positive parts are the
/// J-orthogonal complements.
pub fn invariant_fundamental_decompositions(
    sys: &Colligation,
    tol: &Tolerances,
) -> Result<(FundamentalSplit, FundamentalSplit)> {
    if !sys.classify(tol)?.metric.is_passive() {
        return Err(Error::Precondition("system is not passive".into()));
    }
    if !complements_hilbert(sys, tol)? {
        return Err(Error::Precondition(
            "transfer function index differs from the negative index of the state space".into(),
        ));
    }
    let x = sys.state();
    let minus2 = outside_subspace(sys.a(), sys, tol)?;
    let plus2 = minus2.orthogonal_complement(tol);
    let a_adj = j_adjoint(sys.a(), x, x)?;
    let minus1 = outside_subspace(&a_adj, sys, tol)?;
    let plus1 = minus1.orthogonal_complement(tol);
    let split1 = certify(SplitKind::PlusInvariant, plus1, minus1, sys, tol)?;
    let split2 = certify(SplitKind::MinusInvariant, plus2, minus2, sys, tol)?;
    Ok((split1, split2))
}
