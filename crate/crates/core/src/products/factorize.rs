use serde::Serialize;

use super::cascade_with_layout;
use super::fundamental::{invariant_fundamental_decompositions, FundamentalSplit};
use crate::colligation::{
    verify_similarity, Colligation, SimilarityKind, SimilarityResult, SystemMetric,
};
use crate::eigen::eig_hermitian;
use crate::error::{Error, Result};
use crate::indefinite::{j_orthonormal_basis, SignatureSpace, Tolerances};
use crate::matrix::{hstack, identity, null_space, ComplexMatrix};

/// Which side carries the inverse Blaschke factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMode {
    /// Σ ≅ Σ_θr ∘ Σ_{B_r⁻¹}: the inverse Blaschke system acts first.
    Right,
    /// Σ ≅ Σ_{B_l⁻¹} ∘ Σ_θl: the Schur-class system acts first.
    Left,
}

/// A system written as a cascade of a Hilbert-state system and a conservative
/// anti-Hilbert-state system.
#[derive(Debug, Clone)]
pub struct SystemFactorization {
    pub mode: FactorMode,
    /// Hilbert-state factor realizing the Schur-class function.
    pub outer: Colligation,
    /// Conservative anti-Hilbert-state factor realizing B⁻¹.
    pub blaschke_inverse: Colligation,
    /// Certificate that the cascade of the factors is unitarily similar to
    /// the input system.
    pub similarity: SimilarityResult,
}

impl SystemFactorization {
    pub fn degree(&self) -> usize {
        self.blaschke_inverse.state_dim()
    }

    /// The factors in cascade order (first, second).
    pub fn factors(&self) -> (&Colligation, &Colligation) {
        match self.mode {
            FactorMode::Right => (&self.blaschke_inverse, &self.outer),
            FactorMode::Left => (&self.outer, &self.blaschke_inverse),
        }
    }
}

/// G^{-1/2} for a positive definite G.
fn inv_sqrt(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = (g + g.adjoint()) * num_complex::Complex64::from(0.5);
    let e = eig_hermitian(&h)?;
    let scale = e.values.last().copied().unwrap_or(1.0).max(1.0);
    if e.values.first().is_some_and(|&v| v <= 1e-12 * scale) {
        return Err(Error::Certification {
            what: "completion Gram matrix is not positive definite".into(),
            residual: e.values[0],
        });
    }
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        e.values.len(),
        e.values
            .iter()
            .map(|v| num_complex::Complex64::from(1.0 / v.sqrt())),
    ));
    Ok(&e.vectors * d * e.vectors.adjoint())
}

fn check_mode(sys: &Colligation, mode: FactorMode, tol: &Tolerances) -> Result<()> {
    let class = sys.classify(tol)?;
    let ok = match mode {
        FactorMode::Right => {
            class.metric == SystemMetric::Conservative
                || (class.metric == SystemMetric::Coisometric && class.observable == Some(true))
        }
        FactorMode::Left => {
            class.metric == SystemMetric::Conservative
                || (class.metric == SystemMetric::Isometric && class.controllable == Some(true))
        }
    };
    if !ok {
        let need = match mode {
            FactorMode::Right => "conservative, or co-isometric and observable",
            FactorMode::Left => "conservative, or isometric and controllable",
        };
        return Err(Error::Precondition(format!(
            "{mode:?} factorization needs a system that is {need}; got {:?}",
            class.metric
        )));
    }
    Ok(())
}

/// J-orthonormal basis of a split part, or an empty block.
fn part_basis(
    s: &crate::indefinite::IndefiniteSubspace,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    if s.dim() == 0 {
        return Ok(ComplexMatrix::zeros(s.ambient().dim(), 0));
    }
    Ok(j_orthonormal_basis(s, tol)?.0)
}

/// Blocks of the system in the coordinates of the basis `w` whose metric is
/// `sig`: (coord·A·W, coord·B, C·W) with coord = J_w Wᴴ J.
fn adapted(
    sys: &Colligation,
    w: &ComplexMatrix,
    sig: &SignatureSpace,
) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let coord = sig.apply_left(&sys.state().apply_right(&w.adjoint()));
    (&coord * sys.a() * w, &coord * sys.b(), sys.c() * w)
}

/// Splits a system according to the adapted fundamental decomposition into a
/// Hilbert-state factor and a conservative factor on the κ negative
/// directions whose transfer function is an inverse Blaschke product.
///
/// Right mode uses the decomposition whose positive part is A-invariant,
/// left mode the one whose negative part is A-invariant. The result is
/// certified by a unitary similarity between the cascade of the factors and
/// the input.
pub fn kl_factorize_system(
    sys: &Colligation,
    mode: FactorMode,
    tol: &Tolerances,
) -> Result<SystemFactorization> {
    check_mode(sys, mode, tol)?;
    let (split1, split2) = invariant_fundamental_decompositions(sys, tol)?;
    let kappa = sys.kappa();
    let (m, p) = (sys.input_dim(), sys.output_dim());
    let (blaschke_inverse, outer) = if kappa == 0 {
        let unit = match mode {
            FactorMode::Right => identity(m),
            FactorMode::Left => identity(p),
        };
        (Colligation::static_gain(unit), sys.clone())
    } else {
        match mode {
            FactorMode::Right => right_factors(sys, &split1, tol)?,
            FactorMode::Left => left_factors(sys, &split2, tol)?,
        }
    };
    let (first, second) = match mode {
        FactorMode::Right => (&blaschke_inverse, &outer),
        FactorMode::Left => (&outer, &blaschke_inverse),
    };
    let (prod, layout) = cascade_with_layout(first, second)?;
    let n = sys.state_dim();
    let z = if kappa == 0 {
        identity(n)
    } else {
        let split = match mode {
            FactorMode::Right => &split1,
            FactorMode::Left => &split2,
        };
        // Raw cascade coordinates are (first, second) in the adapted basis.
        let (w_first, w_second) = match mode {
            FactorMode::Right => (
                part_basis(&split.minus, tol)?,
                part_basis(&split.plus, tol)?,
            ),
            FactorMode::Left => (
                part_basis(&split.plus, tol)?,
                part_basis(&split.minus, tol)?,
            ),
        };
        let w = hstack(n, &[&w_first, &w_second]);
        let raw_sig = first.state().direct_sum(second.state());
        layout.to_canonical() * raw_sig.apply_left(&sys.state().apply_right(&w.adjoint()))
    };
    let similarity = verify_similarity(sys, &prod, &z, SimilarityKind::Unitary)?;
    if similarity.max_residual() > tol.metric_tol {
        return Err(Error::Certification {
            what: "cascade of the factors is not unitarily similar to the system".into(),
            residual: similarity.max_residual(),
        });
    }
    Ok(SystemFactorization {
        mode,
        outer,
        blaschke_inverse,
        similarity,
    })
}

fn right_factors(
    sys: &Colligation,
    split: &FundamentalSplit,
    tol: &Tolerances,
) -> Result<(Colligation, Colligation)> {
    let kappa = sys.kappa();
    let n = sys.state_dim();
    let (m, p) = (sys.input_dim(), sys.output_dim());
    let w_minus = part_basis(&split.minus, tol)?;
    let w_plus = part_basis(&split.plus, tol)?;
    let w = hstack(n, &[&w_minus, &w_plus]);
    let sig = SignatureSpace::new(0, kappa).direct_sum(&SignatureSpace::hilbert(n - kappa));
    let (a, b, c) = adapted(sys, &w, &sig);
    let np = n - kappa;
    let a1 = a.view((0, 0), (kappa, kappa)).into_owned();
    let b1 = b.rows(0, kappa).into_owned();
    // Rows [C₁ D₁] complete [A₁ B₁] to a J-unitary operator.
    let j_in = SignatureSpace::new(0, kappa).direct_sum(&SignatureSpace::hilbert(m));
    let r1 = hstack(kappa, &[&a1, &b1]);
    let nsp = null_space(&j_in.apply_right(&r1), tol.rank_tol);
    if nsp.ncols() != m {
        return Err(Error::Certification {
            what: format!(
                "row completion has dimension {} instead of {m}",
                nsp.ncols()
            ),
            residual: f64::INFINITY,
        });
    }
    let g = nsp.adjoint() * j_in.apply_left(&nsp);
    let rows = inv_sqrt(&g)? * nsp.adjoint();
    let c1 = rows.columns(0, kappa).into_owned();
    let d1 = rows.columns(kappa, m).into_owned();
    // M = rows (𝒳⁺, 𝒴) × columns (𝒳⁻, 𝒰) equals [B₂; D₂]·[C₁ D₁].
    let mut mm = ComplexMatrix::zeros(np + p, kappa + m);
    mm.view_mut((0, 0), (np, kappa))
        .copy_from(&a.view((kappa, 0), (np, kappa)));
    mm.view_mut((0, kappa), (np, m))
        .copy_from(&b.rows(kappa, np));
    mm.view_mut((np, 0), (p, kappa))
        .copy_from(&c.columns(0, kappa));
    mm.view_mut((np, kappa), (p, m)).copy_from(sys.d());
    let bd2 = &mm * j_in.apply_left(&rows.adjoint());
    let b2 = bd2.rows(0, np).into_owned();
    let d2 = bd2.rows(np, p).into_owned();
    let a2 = a.view((kappa, kappa), (np, np)).into_owned();
    let c2 = c.columns(kappa, np).into_owned();
    let inverse_factor = Colligation::new(SignatureSpace::new(0, kappa), a1, b1, c1, d1)?;
    let outer = Colligation::new(SignatureSpace::hilbert(np), a2, b2, c2, d2)?;
    Ok((inverse_factor, outer))
}

fn left_factors(
    sys: &Colligation,
    split: &FundamentalSplit,
    tol: &Tolerances,
) -> Result<(Colligation, Colligation)> {
    let kappa = sys.kappa();
    let n = sys.state_dim();
    let (m, p) = (sys.input_dim(), sys.output_dim());
    let np = n - kappa;
    let w_plus = part_basis(&split.plus, tol)?;
    let w_minus = part_basis(&split.minus, tol)?;
    let w = hstack(n, &[&w_plus, &w_minus]);
    let sig = SignatureSpace::new(np, kappa);
    let (a, b, c) = adapted(sys, &w, &sig);
    let a2 = a.view((np, np), (kappa, kappa)).into_owned();
    let c2 = c.columns(np, kappa).into_owned();
    // Columns [B₂; D₂] complete [A₂; C₂] to a J-unitary operator.
    let j_out = SignatureSpace::new(0, kappa).direct_sum(&SignatureSpace::hilbert(p));
    let k2 = crate::matrix::vstack(kappa, &[&a2, &c2]);
    let nsp = null_space(&(k2.adjoint() * j_out.metric()), tol.rank_tol);
    if nsp.ncols() != p {
        return Err(Error::Certification {
            what: format!(
                "column completion has dimension {} instead of {p}",
                nsp.ncols()
            ),
            residual: f64::INFINITY,
        });
    }
    let g = nsp.adjoint() * j_out.apply_left(&nsp);
    let cols = &nsp * inv_sqrt(&g)?;
    let b2 = cols.rows(0, kappa).into_owned();
    let d2 = cols.rows(kappa, p).into_owned();
    // M = rows (𝒳⁻, 𝒴) × columns (𝒳⁺, 𝒰) equals [B₂; D₂]·[C₁ D₁].
    let mut mm = ComplexMatrix::zeros(kappa + p, np + m);
    mm.view_mut((0, 0), (kappa, np))
        .copy_from(&a.view((np, 0), (kappa, np)));
    mm.view_mut((0, np), (kappa, m))
        .copy_from(&b.rows(np, kappa));
    mm.view_mut((kappa, 0), (p, np))
        .copy_from(&c.columns(0, np));
    mm.view_mut((kappa, np), (p, m)).copy_from(sys.d());
    let cd1 = cols.adjoint() * j_out.apply_left(&mm);
    let c1 = cd1.columns(0, np).into_owned();
    let d1 = cd1.columns(np, m).into_owned();
    let a1 = a.view((0, 0), (np, np)).into_owned();
    let b1 = b.rows(0, np).into_owned();
    let outer = Colligation::new(SignatureSpace::hilbert(np), a1, b1, c1, d1)?;
    let inverse_factor = Colligation::new(SignatureSpace::new(0, kappa), a2, b2, c2, d2)?;
    Ok((inverse_factor, outer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::SystemMetric;
    use crate::matrix::{cx, real_matrix, spectral_norm};
    use crate::products::cascade;
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

    fn round_trip(sys: &Colligation, mode: FactorMode) {
        let tol = Tolerances::default();
        let f = kl_factorize_system(sys, mode, &tol).unwrap();
        assert_eq!(f.degree(), sys.kappa());
        assert!(f.outer.state().is_hilbert());
        assert_eq!(
            f.blaschke_inverse.classify(&tol).unwrap().metric,
            SystemMetric::Conservative
        );
        let (first, second) = f.factors();
        let prod = cascade(first, second).unwrap();
        for z in crate::sampling::disc_points(30, 11) {
            let (Ok(x), Ok(y)) = (prod.transfer_eval(z, &tol), sys.transfer_eval(z, &tol)) else {
                continue;
            };
            assert!(spectral_norm(&(x - y)) < 1e-7);
        }
    }

    #[test]
    fn cascade_round_trips_in_both_modes() {
        let tol = Tolerances::default();
        let inv = invert_system(&b(0.5), &tol).unwrap().colligation.unwrap();
        let sys = cascade(&inv, &b(-0.4)).unwrap();
        round_trip(&sys, FactorMode::Right);
        round_trip(&sys, FactorMode::Left);
        let sys = cascade(&b(0.3), &inv).unwrap();
        round_trip(&sys, FactorMode::Right);
        round_trip(&sys, FactorMode::Left);
    }

    #[test]
    fn hilbert_state_has_trivial_blaschke_factor() {
        let f = kl_factorize_system(&b(0.2), FactorMode::Right, &Tolerances::default()).unwrap();
        assert_eq!(f.degree(), 0);
        assert_eq!(f.blaschke_inverse.d(), &identity(1));
    }

    #[test]
    fn passive_system_is_rejected() {
        let s = Colligation::static_gain(real_matrix(1, 1, &[0.5]));
        assert!(matches!(
            kl_factorize_system(&s, FactorMode::Right, &Tolerances::default()),
            Err(Error::Precondition(_))
        ));
    }
}
