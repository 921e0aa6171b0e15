use serde::Serialize;

use super::Colligation;
use crate::error::Result;
use crate::indefinite::{
    j_adjoint, subspace_classify, IndefiniteSubspace, SignatureSpace, SubspaceClass, Tolerances,
};
use crate::matrix::{hstack, orth, svd, ComplexMatrix};
use crate::schur::{negative_squares_estimate, NegativeSquares, TransferFunction};

/// Orthonormal basis of span{AᵏB : k ≥ 0}, built by block orthogonal
/// iteration so that no explicit matrix powers are formed.
pub fn krylov_span(a: &ComplexMatrix, b: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let n = a.nrows();
    let mut q = orth(b, rank_tol);
    let mut frontier = q.clone();
    let cut = rank_tol * crate::matrix::spectral_norm(a).max(1.0);
    while q.ncols() < n && frontier.ncols() > 0 {
        let mut w = a * &frontier;
        for _ in 0..2 {
            w -= &q * (q.adjoint() * &w);
        }
        let d = svd(&w);
        let r = d.s.iter().filter(|&&s| s > cut).count().min(n - q.ncols());
        if r == 0 {
            break;
        }
        frontier = d.u.columns(0, r).into_owned();
        // Re-orthogonalize the new directions against the accepted basis.
        frontier -= &q * (q.adjoint() * &frontier);
        frontier = orth(&frontier, rank_tol);
        q = hstack(n, &[&q, &frontier]);
    }
    q
}

/// Controllable, observable and simple subspaces with their J-orthogonal
/// complements.
#[derive(Debug, Clone)]
pub struct KrylovReport {
    pub controllable: IndefiniteSubspace,
    pub observable: IndefiniteSubspace,
    pub simple: IndefiniteSubspace,
    pub controllable_perp: IndefiniteSubspace,
    pub observable_perp: IndefiniteSubspace,
    pub simple_perp: IndefiniteSubspace,
    pub controllable_perp_class: SubspaceClass,
    pub observable_perp_class: SubspaceClass,
    pub simple_perp_class: SubspaceClass,
}

impl KrylovReport {
    pub fn is_controllable(&self) -> bool {
        self.controllable.dim() == self.controllable.ambient().dim()
    }
    pub fn is_observable(&self) -> bool {
        self.observable.dim() == self.observable.ambient().dim()
    }
    pub fn is_simple(&self) -> bool {
        self.simple.dim() == self.simple.ambient().dim()
    }
    pub fn is_minimal(&self) -> bool {
        self.is_controllable() && self.is_observable()
    }
}

pub fn krylov_report(sys: &Colligation, tol: &Tolerances) -> Result<KrylovReport> {
    let x = sys.state().clone();
    let y = SignatureSpace::hilbert(sys.output_dim());
    let a_adj = j_adjoint(sys.a(), &x, &x)?;
    let c_adj = j_adjoint(sys.c(), &x, &y)?;
    let n = x.dim();
    let xc = krylov_span(sys.a(), sys.b(), tol.rank_tol);
    let xo = krylov_span(&a_adj, &c_adj, tol.rank_tol);
    let xs = orth(&hstack(n, &[&xc, &xo]), tol.rank_tol);
    let controllable = IndefiniteSubspace::span(x.clone(), &xc, tol)?;
    let observable = IndefiniteSubspace::span(x.clone(), &xo, tol)?;
    let simple = IndefiniteSubspace::span(x, &xs, tol)?;
    let controllable_perp = controllable.orthogonal_complement(tol);
    let observable_perp = observable.orthogonal_complement(tol);
    let simple_perp = simple.orthogonal_complement(tol);
    Ok(KrylovReport {
        controllable_perp_class: subspace_classify(&controllable_perp, tol)?,
        observable_perp_class: subspace_classify(&observable_perp, tol)?,
        simple_perp_class: subspace_classify(&simple_perp, tol)?,
        controllable,
        observable,
        simple,
        controllable_perp,
        observable_perp,
        simple_perp,
    })
}

/// Outcome of the index-preservation test for a passive system.
#[derive(Debug, Clone, Serialize)]
pub struct IndexPreservationReport {
    pub controllable_perp: SubspaceClass,
    pub observable_perp: SubspaceClass,
    pub simple_perp: SubspaceClass,
    /// All three complements are Hilbert subspaces.
    pub index_preserving: bool,
    pub kappa: usize,
    pub estimate: NegativeSquares,
    /// The verdict agrees with whether the kernel estimate equals κ.
    pub cross_validated: bool,
}

/// Decides whether the transfer function of a passive system has as many
/// negative squares as the state space has negative directions, by
/// classifying the Krylov complements, and cross-checks the verdict against
/// a kernel-based negative-squares estimate.
pub fn index_preservation_check(
    sys: &Colligation,
    tol: &Tolerances,
) -> Result<IndexPreservationReport> {
    let k = krylov_report(sys, tol)?;
    let hilbert = |c: SubspaceClass| c == SubspaceClass::Hilbert;
    let index_preserving = hilbert(k.controllable_perp_class)
        && hilbert(k.observable_perp_class)
        && hilbert(k.simple_perp_class);
    let f = TransferFunction::from_colligation(sys.clone());
    let estimate = negative_squares_estimate(&f, tol)?;
    let matches_kappa = estimate.kernel_estimate == Some(sys.kappa());
    Ok(IndexPreservationReport {
        controllable_perp: k.controllable_perp_class,
        observable_perp: k.observable_perp_class,
        simple_perp: k.simple_perp_class,
        index_preserving,
        kappa: sys.kappa(),
        cross_validated: matches_kappa == index_preserving,
        estimate,
    })
}

/// Classification of the Krylov complements alone (no kernel estimate).
pub(crate) fn complements_hilbert(sys: &Colligation, tol: &Tolerances) -> Result<bool> {
    let k = krylov_report(sys, tol)?;
    Ok([
        k.controllable_perp_class,
        k.observable_perp_class,
        k.simple_perp_class,
    ]
    .iter()
    .all(|&c| c == SubspaceClass::Hilbert))
}
