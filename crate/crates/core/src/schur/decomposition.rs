use serde::Serialize;

use super::canonical::KernelModel;
use super::{canonical_coisometric_realization, TransferFunction};
use crate::error::{Error, Result};
use crate::indefinite::Tolerances;
use crate::matrix::{identity, spectral_norm, ComplexMatrix};
use crate::products::{obstruction_controllable, obstruction_observable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionVariant {
    /// ℋ(S₂S₁) = S₂ℋ(S₁) ⊕ ℋ(S₂), tied to observability of the product.
    Observable,
    /// The same statement for the sharp transforms, tied to controllability.
    Controllable,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelDecompositionReport {
    pub variant: DecompositionVariant,
    pub rank_first: usize,
    pub rank_second: usize,
    pub rank_product: usize,
    /// ‖Gram of S₂·(basis of ℋ(S₁)) in ℋ(S₂S₁) − J₁‖.
    pub isometry_residual: f64,
    /// ‖Gram of the basis of ℋ(S₂) in ℋ(S₂S₁) − J₂‖.
    pub inclusion_residual: f64,
    /// ‖cross Gram between the two families in ℋ(S₂S₁)‖.
    pub cross_residual: f64,
    /// How far the sampled families are from the span of the product model.
    pub membership_residual: f64,
    /// Multiplication by S₂ is isometric from ℋ(S₁) into ℋ(S₂S₁).
    pub multiplication_isometric: bool,
    /// ℋ(S₂S₁) is the orthogonal sum of S₂ℋ(S₁) and ℋ(S₂).
    pub orthogonal_sum: bool,
    pub holds: bool,
    /// Dimension of the obstruction space of the cascade of canonical
    /// realizations of the factors.
    pub obstruction_dimension: usize,
}

struct KernelVerdict {
    rank_first: usize,
    rank_second: usize,
    rank_product: usize,
    isometry_residual: f64,
    inclusion_residual: f64,
    cross_residual: f64,
    membership_residual: f64,
    multiplication_isometric: bool,
    orthogonal_sum: bool,
}

fn gram_residual(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    model: &KernelModel,
    target: &ComplexMatrix,
) -> f64 {
    let g = y.adjoint() * model.signs.apply_left(x);
    if g.is_empty() {
        return 0.0;
    }
    spectral_norm(&(g - target))
}

/// Decides the decomposition from sampled kernel sections, with S₁ acting
/// first.
fn kernel_verdict(
    s1: &TransferFunction,
    s2: &TransferFunction,
    tol: &Tolerances,
) -> Result<KernelVerdict> {
    if s2.input_dim() != s1.output_dim() {
        return Err(Error::dims(
            "kernel decomposition",
            s1.output_dim(),
            s2.input_dim(),
        ));
    }
    let m1 = KernelModel::build(s1, tol)?;
    let m2 = KernelModel::build(s2, tol)?;
    for (name, m) in [("first", &m1), ("second", &m2)] {
        if m.signs.neg() > 0 {
            return Err(Error::Precondition(format!(
                "{name} factor is not in the Schur class ({} negative squares)",
                m.signs.neg()
            )));
        }
    }
    let s = s2.compose_after(s1)?;
    let m = KernelModel::build(&s, tol)?;

    let g1 = m.stack(|w, _| Ok(s2.evaluate(w, tol)? * m1.basis_values(w, tol)?))?;
    let g2 = m.stack(|w, _| m2.basis_values(w, tol))?;
    let x1 = m.coords(&g1);
    let x2 = m.coords(&g2);
    let at_points = m.basis_at_points(tol)?;
    let membership = |g: &ComplexMatrix, x: &ComplexMatrix| -> f64 {
        if g.is_empty() {
            return 0.0;
        }
        spectral_norm(&(&at_points * x - g)) / spectral_norm(g).max(1.0)
    };
    let membership_residual = membership(&g1, &x1).max(membership(&g2, &x2));

    let isometry_residual = gram_residual(&x1, &x1, &m, &m1.signs.metric());
    let inclusion_residual = gram_residual(&x2, &x2, &m, &m2.signs.metric());
    let cross_residual = gram_residual(&x1, &x2, &m, &ComplexMatrix::zeros(x2.ncols(), x1.ncols()));
    let limit = tol.metric_tol.sqrt();
    let rank_first = m1.rank();
    let rank_second = m2.rank();
    let rank_product = m.rank();
    let multiplication_isometric = isometry_residual <= limit;
    let orthogonal_sum = inclusion_residual <= limit
        && cross_residual <= limit
        && rank_product == rank_first + rank_second;
    Ok(KernelVerdict {
        rank_first,
        rank_second,
        rank_product,
        isometry_residual,
        inclusion_residual,
        cross_residual,
        membership_residual,
        multiplication_isometric,
        orthogonal_sum,
    })
}

fn report(
    variant: DecompositionVariant,
    v: KernelVerdict,
    obstruction_dimension: usize,
) -> Result<KernelDecompositionReport> {
    let holds = v.multiplication_isometric && v.orthogonal_sum;
    if holds != (obstruction_dimension == 0) {
        return Err(Error::Inconsistency(format!(
            "kernel decomposition verdict {holds} disagrees with obstruction dimension {obstruction_dimension}"
        )));
    }
    Ok(KernelDecompositionReport {
        variant,
        rank_first: v.rank_first,
        rank_second: v.rank_second,
        rank_product: v.rank_product,
        isometry_residual: v.isometry_residual,
        inclusion_residual: v.inclusion_residual,
        cross_residual: v.cross_residual,
        membership_residual: v.membership_residual,
        multiplication_isometric: v.multiplication_isometric,
        orthogonal_sum: v.orthogonal_sum,
        holds,
        obstruction_dimension,
    })
}

/// Tests whether ℋ(S₂S₁) = S₂ℋ(S₁) ⊕ ℋ(S₂) with multiplication by S₂
/// isometric on ℋ(S₁), and cross-checks the verdict against observability of
/// the cascade of canonical co-isometric realizations of S₁ and S₂.
pub fn check_kernel_decomposition(
    s1: &TransferFunction,
    s2: &TransferFunction,
    tol: &Tolerances,
) -> Result<KernelDecompositionReport> {
    let v = kernel_verdict(s1, s2, tol)?;
    let c1 = canonical_coisometric_realization(s1, tol)?.system;
    let c2 = canonical_coisometric_realization(s2, tol)?.system;
    let obstruction = obstruction_observable(&c1, &c2, tol)?;
    report(DecompositionVariant::Observable, v, obstruction.dimension)
}

/// Dual test on the sharp transforms, ℋ(S₁^#S₂^#) = S₁^#ℋ(S₂^#) ⊕ ℋ(S₁^#),
/// cross-checked against controllability of the cascade of isometric
/// controllable realizations of S₁ and S₂.
pub fn check_kernel_decomposition_controllable(
    s1: &TransferFunction,
    s2: &TransferFunction,
    tol: &Tolerances,
) -> Result<KernelDecompositionReport> {
    let (s1_sharp, s2_sharp) = (s1.sharp(), s2.sharp());
    let v = kernel_verdict(&s2_sharp, &s1_sharp, tol)?;
    let i1 = canonical_coisometric_realization(&s1_sharp, tol)?
        .system
        .adjoint_system();
    let i2 = canonical_coisometric_realization(&s2_sharp, tol)?
        .system
        .adjoint_system();
    let obstruction = obstruction_controllable(&i1, &i2, tol)?;
    report(DecompositionVariant::Controllable, v, obstruction.dimension)
}

/// K_S(w, z) = (I − S(z)S(w)ᴴ)/(1 − z w̄).
pub fn kernel_block(
    s: &TransferFunction,
    w: num_complex::Complex64,
    z: num_complex::Complex64,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let (sz, sw) = (s.evaluate(z, tol)?, s.evaluate(w, tol)?);
    Ok((identity(s.output_dim()) - sz * sw.adjoint())
        / (num_complex::Complex64::from(1.0) - z * w.conj()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::Colligation;
    use crate::matrix::{cx, real_matrix};
    use crate::schur::blaschke_potapov_factor;

    fn b(alpha: f64) -> TransferFunction {
        TransferFunction::from_colligation(
            blaschke_potapov_factor(
                cx(alpha, 0.0),
                cx(1.0, 0.0),
                &real_matrix(1, 1, &[1.0]),
                &Tolerances::default(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn distinct_blaschke_factors_decompose() {
        let tol = Tolerances::default();
        let r = check_kernel_decomposition(&b(0.5), &b(-0.3), &tol).unwrap();
        assert!(r.holds);
        assert_eq!((r.rank_first, r.rank_second, r.rank_product), (1, 1, 2));
        assert!(r.membership_residual < 1e-8);
        let r = check_kernel_decomposition_controllable(&b(0.5), &b(-0.3), &tol).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn identity_second_factor_is_trivial() {
        let tol = Tolerances::default();
        let r = check_kernel_decomposition(&b(0.5), &TransferFunction::constant(identity(1)), &tol)
            .unwrap();
        assert!(r.holds && r.rank_second == 0);
    }

    #[test]
    fn projection_after_inner_fails() {
        let tol = Tolerances::default();
        // S₁ = diag(1, b), S₂ = (1, 0): the product is constant and loses ℋ(S₁).
        let base =
            blaschke_potapov_factor(cx(0.5, 0.0), cx(1.0, 0.0), &real_matrix(1, 1, &[1.0]), &tol)
                .unwrap();
        let s1 = Colligation::new(
            base.state().clone(),
            base.a().clone(),
            ComplexMatrix::from_row_slice(1, 2, &[cx(0.0, 0.0), base.b()[(0, 0)]]),
            ComplexMatrix::from_column_slice(2, 1, &[cx(0.0, 0.0), base.c()[(0, 0)]]),
            ComplexMatrix::from_row_slice(
                2,
                2,
                &[cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), base.d()[(0, 0)]],
            ),
        )
        .unwrap();
        let s2 = TransferFunction::constant(real_matrix(1, 2, &[1.0, 0.0]));
        let r =
            check_kernel_decomposition(&TransferFunction::from_colligation(s1), &s2, &tol).unwrap();
        assert!(!r.holds && !r.multiplication_isometric);
        assert_eq!(r.obstruction_dimension, 1);
    }

    #[test]
    fn kernel_block_identity() {
        let tol = Tolerances::default();
        let (s1, s2) = (b(0.5), b(-0.2));
        let s = s2.compose_after(&s1).unwrap();
        for (w, z) in [(cx(0.1, 0.3), cx(-0.4, 0.2)), (cx(0.6, -0.1), cx(0.0, 0.7))] {
            let lhs = kernel_block(&s, w, z, &tol).unwrap();
            let rhs = kernel_block(&s2, w, z, &tol).unwrap()
                + s2.evaluate(z, &tol).unwrap()
                    * kernel_block(&s1, w, z, &tol).unwrap()
                    * s2.evaluate(w, &tol).unwrap().adjoint();
            assert!(spectral_norm(&(lhs - rhs)) < 1e-12);
        }
    }
}
