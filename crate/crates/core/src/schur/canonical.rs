use num_complex::Complex64;

use super::kernel::gram_from_values;
use super::TransferFunction;
use crate::colligation::{krylov_report, Colligation, SystemMetric};
use crate::eigen::eig_hermitian;
use crate::error::{Error, Result};
use crate::indefinite::{SignatureSpace, Tolerances};
use crate::matrix::{identity, solve, spectral_norm, vstack, ComplexMatrix};
use crate::sampling::{disc_points, exclude_near, nested_disc_levels};

const LEVELS: usize = 6;
const STABLE_RUN: usize = 4;

/// Finite-dimensional model of the reproducing kernel space ℋ(S) spanned by
/// kernel sections K(w_j, ·)e at sample points.
#[derive(Debug, Clone)]
pub(crate) struct KernelModel {
    pub func: TransferFunction,
    pub points: Vec<Complex64>,
    pub values: Vec<ComplexMatrix>,
    /// Coefficients of a J-orthonormal basis in terms of the sections.
    pub basis: ComplexMatrix,
    pub signs: SignatureSpace,
    pub rank_history: Vec<usize>,
}

impl KernelModel {
    /// Grows the sample set until the kernel Gram rank is unchanged over
    /// three successive enlargements.
    pub fn build(s: &TransferFunction, tol: &Tolerances) -> Result<KernelModel> {
        let poles = s.poles()?;
        let mut history = Vec::new();
        for level in nested_disc_levels(1, LEVELS, tol.seed) {
            let pts = exclude_near(level, &poles, 10.0 * tol.rank_tol);
            let values = pts
                .iter()
                .map(|&w| s.evaluate(w, tol))
                .collect::<Result<Vec<_>>>()?;
            let gram = gram_from_values(&pts, &values);
            let e = eig_hermitian(&gram)?;
            let scale = e.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
            let cut = tol.rank_tol * scale;
            let pos: Vec<usize> = (0..e.values.len())
                .rev()
                .filter(|&i| e.values[i] > cut)
                .collect();
            let neg: Vec<usize> = (0..e.values.len())
                .filter(|&i| e.values[i] < -cut)
                .collect();
            history.push(pos.len() + neg.len());
            let n = history.len();
            if n >= STABLE_RUN
                && history[n - STABLE_RUN..]
                    .iter()
                    .all(|&r| r == history[n - 1])
            {
                let order: Vec<usize> = pos.iter().chain(neg.iter()).copied().collect();
                let mut basis = ComplexMatrix::zeros(gram.nrows(), order.len());
                for (dst, &src) in order.iter().enumerate() {
                    let w = Complex64::from(1.0 / e.values[src].abs().sqrt());
                    basis.set_column(dst, &(e.vectors.column(src) * w));
                }
                return Ok(KernelModel {
                    func: s.clone(),
                    points: pts,
                    values,
                    basis,
                    signs: SignatureSpace::new(pos.len(), neg.len()),
                    rank_history: history,
                });
            }
        }
        Err(Error::Unsupported(format!(
            "kernel rank did not saturate: ranks {history:?} on growing sample sets"
        )))
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    fn out_dim(&self) -> usize {
        self.func.output_dim()
    }

    /// Values at z of all sections, p × (N·p).
    pub fn section_values(&self, z: Complex64, tol: &Tolerances) -> Result<ComplexMatrix> {
        let p = self.out_dim();
        let sz = self.func.evaluate(z, tol)?;
        let mut out = ComplexMatrix::zeros(p, self.points.len() * p);
        for (j, (w, sw)) in self.points.iter().zip(&self.values).enumerate() {
            let block = (identity(p) - &sz * sw.adjoint()) / (Complex64::from(1.0) - z * w.conj());
            out.view_mut((0, j * p), (p, p)).copy_from(&block);
        }
        Ok(out)
    }

    /// Values at z of the basis functions, p × r.
    pub fn basis_values(&self, z: Complex64, tol: &Tolerances) -> Result<ComplexMatrix> {
        Ok(self.section_values(z, tol)? * &self.basis)
    }

    /// Stacked values of k functions at the model points, from a map giving
    /// their p × k values at a point.
    pub fn stack(
        &self,
        g: impl Fn(Complex64, usize) -> Result<ComplexMatrix>,
    ) -> Result<ComplexMatrix> {
        let blocks = self
            .points
            .iter()
            .enumerate()
            .map(|(i, &w)| g(w, i))
            .collect::<Result<Vec<_>>>()?;
        let k = blocks.first().map(|b| b.ncols()).unwrap_or(0);
        let refs: Vec<&ComplexMatrix> = blocks.iter().collect();
        Ok(vstack(k, &refs))
    }

    /// Coordinates in the J-orthonormal basis of functions of ℋ(S) given by
    /// their stacked values: ξ = J Fᴴ g, since ⟨g, K(w,·)e⟩ = eᴴg(w).
    pub fn coords(&self, stacked: &ComplexMatrix) -> ComplexMatrix {
        self.signs.apply_left(&(self.basis.adjoint() * stacked))
    }

    /// Values of the basis functions at the model points, (N·p) × r.
    pub fn basis_at_points(&self, tol: &Tolerances) -> Result<ComplexMatrix> {
        self.stack(|w, _| self.basis_values(w, tol))
    }
}

#[derive(Debug, Clone)]
pub struct CanonicalRealization {
    pub system: Colligation,
    pub rank_history: Vec<usize>,
    /// Largest discrepancy of C(I − zA)⁻¹h against h(z) at held-out points.
    pub reproducing_residual: f64,
    /// Largest relative transfer-function discrepancy at held-out points.
    pub transfer_residual: f64,
}

/// Co-isometric observable realization on a model of ℋ(S): A is the
/// backward shift h ↦ (h(z) − h(0))/z, B u = (S(z) − S(0))u/z, C h = h(0)
/// and D = S(0), each represented in a J-orthonormal basis of kernel
/// sections.
pub fn canonical_coisometric_realization(
    s: &TransferFunction,
    tol: &Tolerances,
) -> Result<CanonicalRealization> {
    let model = KernelModel::build(s, tol)?;
    let zero = Complex64::from(0.0);
    let d = s.evaluate(zero, tol)?;
    let r = model.rank();
    let f0 = model.basis_values(zero, tol)?;
    let shifted = model.stack(|w, _| Ok((model.basis_values(w, tol)? - &f0) / w))?;
    let a = model.coords(&shifted);
    let b_vals = model.stack(|w, i| Ok((&model.values[i] - &d) / w))?;
    let b = model.coords(&b_vals);
    let system = Colligation::new(model.signs.clone(), a, b, f0, d)?;

    let held_out = exclude_near(disc_points(16, tol.seed.wrapping_add(1)), &s.poles()?, 1e-3);
    let mut reproducing_residual: f64 = 0.0;
    let mut transfer_residual: f64 = 0.0;
    for &z in &held_out {
        let resolvent = solve(&(identity(r) - system.a() * z), &identity(r))?;
        let model_vals = system.c() * resolvent;
        let direct = model.basis_values(z, tol)?;
        reproducing_residual = reproducing_residual
            .max(spectral_norm(&(model_vals - &direct)) / spectral_norm(&direct).max(1.0));
        let sz = s.evaluate(z, tol)?;
        let tz = system.transfer_eval(z, tol)?;
        transfer_residual =
            transfer_residual.max(spectral_norm(&(tz - &sz)) / spectral_norm(&sz).max(1.0));
    }
    let class = system.classify(tol)?;
    let coisometric = matches!(
        class.metric,
        SystemMetric::Coisometric | SystemMetric::Conservative
    );
    let observable = krylov_report(&system, tol)?.is_observable();
    let limit = tol.metric_tol.sqrt();
    if !coisometric || !observable || reproducing_residual > limit || transfer_residual > limit {
        return Err(Error::Certification {
            what: format!(
                "canonical realization (co-isometric: {coisometric}, observable: {observable})"
            ),
            residual: reproducing_residual.max(transfer_residual),
        });
    }
    Ok(CanonicalRealization {
        system,
        rank_history: model.rank_history,
        reproducing_residual,
        transfer_residual,
    })
}
