//! Generalized Schur functions represented by realizations: kernel Grams and
//! negative squares, Blaschke–Potapov constructors, system inversion,
//! Kreĭn–Langer factorization, boundary behavior, defect functions,
//! canonical co-isometric realizations and kernel decompositions.

mod blaschke;
mod boundary;
mod canonical;
mod decomposition;
mod defect;
mod factorize;
mod kernel;

pub use blaschke::{blaschke_potapov_factor, blaschke_product, invert_system, InvertedSystem};
pub use boundary::{boundary_behavior, BoundaryReport, BoundarySample};
pub use canonical::{canonical_coisometric_realization, CanonicalRealization};
pub use decomposition::{
    check_kernel_decomposition, check_kernel_decomposition_controllable, kernel_block,
    DecompositionVariant, KernelDecompositionReport,
};
pub use defect::{defect, DefectResult, ScalarRational};
pub use factorize::{
    kl_factorize_function, left_factorization_via_kernel, FactorizationResult, FactorizationRoute,
    FactorizationSide, SideReport,
};
pub use kernel::{kernel_gram, negative_squares_estimate, KernelGram, NegativeSquares};

use num_complex::Complex64;

use crate::colligation::{BareRealization, Colligation};
use crate::error::Result;
use crate::indefinite::Tolerances;
use crate::matrix::ComplexMatrix;
use crate::sampling::{disc_points, exclude_near};

/// Backing realization of a transfer function.
#[derive(Debug, Clone, PartialEq)]
pub enum Backing {
    System(Colligation),
    Bare(BareRealization),
}

/// A rational matrix function given by a realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    backing: Backing,
}

impl TransferFunction {
    pub fn from_colligation(sys: Colligation) -> Self {
        TransferFunction {
            backing: Backing::System(sys),
        }
    }

    pub fn from_bare(r: BareRealization) -> Self {
        TransferFunction {
            backing: Backing::Bare(r),
        }
    }

    pub fn constant(d: ComplexMatrix) -> Self {
        Self::from_colligation(Colligation::static_gain(d))
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn colligation(&self) -> Option<&Colligation> {
        match &self.backing {
            Backing::System(s) => Some(s),
            Backing::Bare(_) => None,
        }
    }

    pub fn realization(&self) -> &BareRealization {
        match &self.backing {
            Backing::System(s) => s.bare(),
            Backing::Bare(r) => r,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.realization().input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.realization().output_dim()
    }

    pub fn evaluate(&self, z: Complex64, tol: &Tolerances) -> Result<ComplexMatrix> {
        self.realization().transfer_eval(z, tol)
    }

    /// S^#(z) = S(z̄)ᴴ, realized by the adjoint system.
    pub fn sharp(&self) -> TransferFunction {
        match &self.backing {
            Backing::System(s) => Self::from_colligation(s.adjoint_system()),
            Backing::Bare(r) => Self::from_bare(r.sharp()),
        }
    }

    /// Poles in the open disc of the backing realization (1/λ for the
    /// eigenvalues |λ| > 1 of A), possibly including cancelled ones.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.realization().disc_poles()
    }

    /// Number of disc poles counted with multiplicity, from a minimal
    /// realization.
    pub fn pole_multiplicity(&self, tol: &Tolerances) -> Result<usize> {
        self.realization().pole_multiplicity_in_disc(tol)
    }

    /// `count` interior sample points away from the poles.
    pub fn sample_points(
        &self,
        count: usize,
        seed: u64,
        tol: &Tolerances,
    ) -> Result<Vec<Complex64>> {
        Ok(exclude_near(
            disc_points(count, seed),
            &self.poles()?,
            10.0 * tol.rank_tol,
        ))
    }

    /// Pointwise product self(z)·first(z).
    pub fn compose_after(&self, first: &TransferFunction) -> Result<TransferFunction> {
        match (first.colligation(), self.colligation()) {
            (Some(f), Some(s)) => Ok(Self::from_colligation(crate::products::cascade(f, s)?)),
            _ => Ok(Self::from_bare(BareRealization::cascade(
                first.realization(),
                self.realization(),
            )?)),
        }
    }
}
