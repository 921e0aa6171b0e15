use serde::Serialize;

use super::fundamental::invariant_fundamental_decompositions;
use crate::colligation::{Colligation, SystemMetric};
use crate::eigen::spectral_radius;
use crate::error::Result;
use crate::indefinite::{j_adjoint, j_orthonormal_basis, IndefiniteSubspace, Tolerances};
use crate::matrix::{spectral_norm, ComplexMatrix};

/// Stability classes of passive systems with a Pontryagin state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityLabel {
    #[serde(rename = "P0.")]
    P0Dot,
    #[serde(rename = "P.0")]
    PDot0,
    #[serde(rename = "P00")]
    P00,
    #[serde(rename = "C0.")]
    C0Dot,
    #[serde(rename = "C.0")]
    CDot0,
    #[serde(rename = "C00")]
    C00,
    #[serde(rename = "I0.")]
    I0Dot,
    #[serde(rename = "I*.0")]
    IStarDot0,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityClass {
    pub kappa: usize,
    /// A restricted to the A-invariant positive part lies in C₀·.
    pub c0_dot: bool,
    /// A^[*] restricted to the A^[*]-invariant positive part lies in C₀·.
    pub c_dot0: bool,
    /// A restricted to the A-invariant positive part lies in C₀₀.
    pub c00: bool,
    pub plus_restriction_radius: f64,
    pub plus_restriction_norm: f64,
    pub dual_restriction_radius: f64,
    pub dual_restriction_norm: f64,
    /// Every class the system belongs to.
    pub classes: Vec<StabilityLabel>,
    /// The most specific class, if any.
    pub class: Option<StabilityLabel>,
    pub note: String,
}

/// Matrix of the compression of `op` to an `op`-invariant Hilbert subspace in
/// a J-orthonormal (hence orthonormal for the restricted metric) basis.
fn restricted(
    op: &ComplexMatrix,
    s: &IndefiniteSubspace,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    if s.dim() == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let (w, sig) = j_orthonormal_basis(s, tol)?;
    let coord = sig.apply_left(&s.ambient().apply_right(&w.adjoint()));
    Ok(coord * op * w)
}

fn radius(m: &ComplexMatrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    spectral_radius(m)
}

/// Stability class of a passive, index-preserving system. In finite
/// dimensions a Hilbert-space contraction is in C₀· (and in C·₀) exactly
/// when its spectral radius is below one.
pub fn stability_classify(sys: &Colligation, tol: &Tolerances) -> Result<StabilityClass> {
    let (split1, split2) = invariant_fundamental_decompositions(sys, tol)?;
    let class = sys.classify(tol)?;
    let x = sys.state();
    let a_plus = restricted(sys.a(), &split1.plus, tol)?;
    let a_adj = j_adjoint(sys.a(), x, x)?;
    let dual_plus = restricted(&a_adj, &split2.plus, tol)?;
    let plus_restriction_radius = radius(&a_plus)?;
    let dual_restriction_radius = radius(&dual_plus)?;
    let stable = |r: f64| r < 1.0 - tol.metric_tol;
    let c0_dot = stable(plus_restriction_radius);
    let c_dot0 = stable(dual_restriction_radius);
    // The Hilbert adjoint of A↾𝒳₁⁺ has the conjugate spectrum.
    let c00 = c0_dot && stable(radius(&a_plus.adjoint())?);

    let simple_conservative =
        class.metric == SystemMetric::Conservative && class.simple == Some(true);
    let controllable_isometric = class.metric.is_isometric() && class.controllable == Some(true);
    let observable_coisometric = class.metric.is_coisometric() && class.observable == Some(true);
    let mut classes = Vec::new();
    let mut push = |cond: bool, label| {
        if cond {
            classes.push(label)
        }
    };
    push(c0_dot, StabilityLabel::P0Dot);
    push(c_dot0, StabilityLabel::PDot0);
    push(c00, StabilityLabel::P00);
    push(simple_conservative && c0_dot, StabilityLabel::C0Dot);
    push(simple_conservative && c_dot0, StabilityLabel::CDot0);
    push(simple_conservative && c00, StabilityLabel::C00);
    push(controllable_isometric && c0_dot, StabilityLabel::I0Dot);
    push(observable_coisometric && c_dot0, StabilityLabel::IStarDot0);
    let priority = [
        StabilityLabel::C00,
        StabilityLabel::C0Dot,
        StabilityLabel::CDot0,
        StabilityLabel::I0Dot,
        StabilityLabel::IStarDot0,
        StabilityLabel::P00,
        StabilityLabel::P0Dot,
        StabilityLabel::PDot0,
    ];
    let best = priority.iter().copied().find(|l| classes.contains(l));
    Ok(StabilityClass {
        kappa: sys.kappa(),
        c0_dot,
        c_dot0,
        c00,
        plus_restriction_radius,
        plus_restriction_norm: spectral_norm(&a_plus),
        dual_restriction_radius,
        dual_restriction_norm: spectral_norm(&dual_plus),
        classes,
        class: best,
        note: "finite-dimensional state: strong convergence of powers is decided by the spectral radius".into(),
    })
}
