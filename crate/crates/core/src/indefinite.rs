//! Signature-metric linear algebra: indefinite inner products, J-adjoints,
//! inertia, metric classification of operators and subspaces, J-orthogonal
//! projections, and spectral subspaces.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{eig_hermitian, invariant_subspace};
use crate::error::{Error, Result};
use crate::matrix::{
    check_finite, hermitian_defect, hermitian_part, null_space, numerical_rank, orth,
    spectral_norm, ComplexMatrix, ComplexVector,
};

/// Numerical thresholds threaded through every rank, sign and metric decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub psd_tol: f64,
    pub metric_tol: f64,
    pub boundary_samples: usize,
    pub disc_samples: usize,
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-10,
            psd_tol: 1e-9,
            metric_tol: 1e-8,
            boundary_samples: 256,
            disc_samples: 64,
            seed: 7,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rank_tol > 0.0
            && self.psd_tol > 0.0
            && self.metric_tol > 0.0
            && self.boundary_samples > 0
            && self.disc_samples > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ))
        }
    }
}

/// A finite-dimensional space with a diagonal ±1 metric.
///
/// Canonical spaces list the positive directions first; direct sums of
/// canonical spaces may interleave signs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignatureSpace {
    signs: Vec<i8>,
}

impl SignatureSpace {
    /// Canonical space with metric diag(I_pos, −I_neg).
    pub fn new(pos: usize, neg: usize) -> Self {
        let mut signs = vec![1; pos];
        signs.extend(std::iter::repeat_n(-1, neg));
        SignatureSpace { signs }
    }

    pub fn hilbert(dim: usize) -> Self {
        Self::new(dim, 0)
    }

    pub fn anti_hilbert(dim: usize) -> Self {
        Self::new(0, dim)
    }

    /// Space with an arbitrary sequence of signs (each ±1).
    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("metric signs must be ±1".into()));
        }
        Ok(SignatureSpace { signs })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn pos(&self) -> usize {
        self.signs.iter().filter(|&&s| s > 0).count()
    }

    /// Negative index of the space.
    pub fn neg(&self) -> usize {
        self.signs.iter().filter(|&&s| s < 0).count()
    }

    pub fn is_canonical(&self) -> bool {
        self.signs.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn is_hilbert(&self) -> bool {
        self.neg() == 0
    }

    /// Space with every sign flipped.
    pub fn negated(&self) -> Self {
        SignatureSpace {
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    pub fn direct_sum(&self, other: &SignatureSpace) -> Self {
        let mut signs = self.signs.clone();
        signs.extend_from_slice(&other.signs);
        SignatureSpace { signs }
    }

    /// The canonical space with the same inertia.
    pub fn canonical(&self) -> Self {
        Self::new(self.pos(), self.neg())
    }

    /// Permutation `perm` with canonical coordinate i taken from coordinate
    /// `perm[i]` of this space (stable within each sign).
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.dim()).filter(|&i| self.signs[i] > 0).collect();
        perm.extend((0..self.dim()).filter(|&i| self.signs[i] < 0));
        perm
    }

    pub fn sign(&self, i: usize) -> f64 {
        self.signs[i] as f64
    }

    pub fn metric(&self) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.signs.iter().map(|&s| Complex64::from(s as f64)),
        ))
    }

    /// J·M (scales rows).
    pub fn apply_left(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = m.clone();
        for (i, &s) in self.signs.iter().enumerate() {
            if s < 0 {
                out.row_mut(i).neg_mut();
            }
        }
        out
    }

    /// M·J (scales columns).
    pub fn apply_right(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = m.clone();
        for (j, &s) in self.signs.iter().enumerate() {
            if s < 0 {
                out.column_mut(j).neg_mut();
            }
        }
        out
    }
}

/// Indefinite inner product ⟨x, y⟩ = yᴴ J x.
pub fn j_inner(x: &ComplexVector, y: &ComplexVector, sp: &SignatureSpace) -> Result<Complex64> {
    if x.len() != sp.dim() || y.len() != sp.dim() {
        return Err(Error::dims(
            "j_inner",
            sp.dim(),
            format!("{} and {}", x.len(), y.len()),
        ));
    }
    Ok((0..sp.dim()).map(|i| y[i].conj() * x[i] * sp.sign(i)).sum())
}

/// Adjoint with respect to the metrics of `dom` and `cod`: J_dom Mᴴ J_cod.
pub fn j_adjoint(
    m: &ComplexMatrix,
    dom: &SignatureSpace,
    cod: &SignatureSpace,
) -> Result<ComplexMatrix> {
    if m.nrows() != cod.dim() || m.ncols() != dom.dim() {
        return Err(Error::dims(
            "j_adjoint",
            format!("{}x{}", cod.dim(), dom.dim()),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(dom.apply_left(&cod.apply_right(&m.adjoint())))
}

/// Eigenvalue sign counts of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub plus: usize,
    pub zero: usize,
    pub minus: usize,
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::dims(
            "Hermitian matrix",
            "square",
            format!("{}x{}", h.nrows(), h.ncols()),
        ));
    }
    check_finite(h, "Hermitian matrix")?;
    let d = hermitian_defect(h);
    if d > 1e-12 {
        return Err(Error::NotHermitian { residual: d });
    }
    Ok(())
}

/// Inertia with eigenvalue threshold psd_tol·max(1, ‖H‖).
pub fn inertia(h: &ComplexMatrix, tol: &Tolerances) -> Result<Inertia> {
    inertia_with(h, tol.psd_tol)
}

pub(crate) fn inertia_with(h: &ComplexMatrix, threshold: f64) -> Result<Inertia> {
    check_hermitian(h)?;
    let e = eig_hermitian(h)?;
    let scale = e.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let cut = threshold * scale;
    Ok(Inertia {
        plus: e.values.iter().filter(|&&v| v > cut).count(),
        minus: e.values.iter().filter(|&&v| v < -cut).count(),
        zero: e.values.iter().filter(|&&v| v.abs() <= cut).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricClass {
    Unitary,
    Isometry,
    Coisometry,
    Contraction,
    None,
}

/// Detailed outcome of [`metric_classify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub class: MetricClass,
    pub contraction: bool,
    pub isometry: bool,
    pub coisometry: bool,
    /// Smallest eigenvalue of J_dom − Mᴴ J_cod M.
    pub min_defect_eigenvalue: f64,
    /// ‖J_dom − Mᴴ J_cod M‖.
    pub defect_norm: f64,
    /// ‖J_cod − M J_dom Mᴴ‖.
    pub dual_defect_norm: f64,
}

/// J_dom − Mᴴ J_cod M.
pub fn metric_defect(
    m: &ComplexMatrix,
    dom: &SignatureSpace,
    cod: &SignatureSpace,
) -> ComplexMatrix {
    hermitian_part(&(dom.metric() - m.adjoint() * cod.apply_left(m)))
}

/// J_cod − M J_dom Mᴴ.
pub fn dual_metric_defect(
    m: &ComplexMatrix,
    dom: &SignatureSpace,
    cod: &SignatureSpace,
) -> ComplexMatrix {
    hermitian_part(&(cod.metric() - m * dom.apply_left(&m.adjoint())))
}

pub fn metric_classify(
    m: &ComplexMatrix,
    dom: &SignatureSpace,
    cod: &SignatureSpace,
    tol: &Tolerances,
) -> Result<MetricReport> {
    if m.nrows() != cod.dim() || m.ncols() != dom.dim() {
        return Err(Error::dims(
            "metric_classify",
            format!("{}x{}", cod.dim(), dom.dim()),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    check_finite(m, "operator")?;
    let scale = spectral_norm(m).powi(2).max(1.0);
    let defect = metric_defect(m, dom, cod);
    let dual = dual_metric_defect(m, dom, cod);
    let min_defect_eigenvalue = eig_hermitian(&defect)?
        .values
        .first()
        .copied()
        .unwrap_or(0.0);
    let defect_norm = spectral_norm(&defect);
    let dual_defect_norm = spectral_norm(&dual);
    let contraction = min_defect_eigenvalue >= -tol.psd_tol * scale;
    let isometry = defect_norm <= tol.metric_tol * scale;
    let coisometry = dual_defect_norm <= tol.metric_tol * scale;
    let class = if isometry && coisometry {
        MetricClass::Unitary
    } else if isometry {
        MetricClass::Isometry
    } else if coisometry {
        MetricClass::Coisometry
    } else if contraction {
        MetricClass::Contraction
    } else {
        MetricClass::None
    };
    Ok(MetricReport {
        class,
        contraction,
        isometry,
        coisometry,
        min_defect_eigenvalue,
        defect_norm,
        dual_defect_norm,
    })
}

/// A subspace of a signature space given by a full-column-rank basis.
#[derive(Debug, Clone, PartialEq)]
pub struct IndefiniteSubspace {
    ambient: SignatureSpace,
    basis: ComplexMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceClass {
    Hilbert,
    AntiHilbert,
    Regular,
    Degenerate,
}

impl SubspaceClass {
    pub fn is_regular(self) -> bool {
        !matches!(self, SubspaceClass::Degenerate)
    }
}

impl IndefiniteSubspace {
    /// Wraps a basis, rejecting rank-deficient input.
    pub fn new(ambient: SignatureSpace, basis: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if basis.nrows() != ambient.dim() {
            return Err(Error::dims(
                "subspace basis rows",
                ambient.dim(),
                basis.nrows(),
            ));
        }
        check_finite(&basis, "subspace basis")?;
        let r = numerical_rank(&basis, tol.rank_tol);
        if r != basis.ncols() {
            return Err(Error::InvalidParameter(format!(
                "subspace basis has rank {r} but {} columns",
                basis.ncols()
            )));
        }
        Ok(IndefiniteSubspace { ambient, basis })
    }

    /// Span of arbitrary vectors; dependent columns are discarded and the
    /// basis is orthonormalized.
    pub fn span(
        ambient: SignatureSpace,
        vectors: &ComplexMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        if vectors.nrows() != ambient.dim() {
            return Err(Error::dims(
                "subspace vectors rows",
                ambient.dim(),
                vectors.nrows(),
            ));
        }
        check_finite(vectors, "subspace vectors")?;
        Ok(IndefiniteSubspace {
            basis: orth(vectors, tol.rank_tol),
            ambient,
        })
    }

    pub fn zero(ambient: SignatureSpace) -> Self {
        let n = ambient.dim();
        IndefiniteSubspace {
            ambient,
            basis: ComplexMatrix::zeros(n, 0),
        }
    }

    pub fn whole(ambient: SignatureSpace) -> Self {
        let n = ambient.dim();
        IndefiniteSubspace {
            ambient,
            basis: ComplexMatrix::identity(n, n),
        }
    }

    pub fn ambient(&self) -> &SignatureSpace {
        &self.ambient
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Gram matrix Vᴴ J V.
    pub fn gram(&self) -> ComplexMatrix {
        hermitian_part(&(self.basis.adjoint() * self.ambient.apply_left(&self.basis)))
    }

    pub fn inertia(&self, tol: &Tolerances) -> Result<Inertia> {
        inertia(&self.gram(), tol)
    }

    /// J-orthogonal complement, defined for any subspace (degenerate ones
    /// included).
    pub fn orthogonal_complement(&self, tol: &Tolerances) -> IndefiniteSubspace {
        let constraint = self.ambient.apply_right(&self.basis.adjoint());
        IndefiniteSubspace {
            ambient: self.ambient.clone(),
            basis: null_space(&constraint, tol.rank_tol),
        }
    }

    /// Same span with an orthonormal (Euclidean) basis.
    pub fn orthonormalized(&self, tol: &Tolerances) -> IndefiniteSubspace {
        IndefiniteSubspace {
            ambient: self.ambient.clone(),
            basis: orth(&self.basis, tol.rank_tol),
        }
    }

    pub fn contains(&self, vectors: &ComplexMatrix, tol: &Tolerances) -> bool {
        let q = orth(&self.basis, tol.rank_tol);
        let resid = vectors - &q * (q.adjoint() * vectors);
        resid.norm() <= tol.metric_tol * vectors.norm().max(1.0)
    }
}

pub fn subspace_classify(s: &IndefiniteSubspace, tol: &Tolerances) -> Result<SubspaceClass> {
    if s.dim() == 0 {
        return Ok(SubspaceClass::Hilbert);
    }
    let q = s.orthonormalized(tol);
    let i = q.inertia(tol)?;
    Ok(if i.zero > 0 {
        SubspaceClass::Degenerate
    } else if i.minus == 0 {
        SubspaceClass::Hilbert
    } else if i.plus == 0 {
        SubspaceClass::AntiHilbert
    } else {
        SubspaceClass::Regular
    })
}

fn require_regular(s: &IndefiniteSubspace, tol: &Tolerances) -> Result<()> {
    if subspace_classify(s, tol)?.is_regular() {
        Ok(())
    } else {
        Err(Error::DegenerateSubspace)
    }
}

/// J-orthogonal projection V (VᴴJV)⁻¹ VᴴJ onto a regular subspace.
pub fn j_projection(s: &IndefiniteSubspace, tol: &Tolerances) -> Result<ComplexMatrix> {
    require_regular(s, tol)?;
    let q = s.orthonormalized(tol);
    let g = q.gram();
    let g_inv = crate::matrix::inverse(&g)?;
    Ok(&q.basis * g_inv * q.ambient.apply_right(&q.basis.adjoint()))
}

/// J-orthogonal complement of a regular subspace.
pub fn j_complement(s: &IndefiniteSubspace, tol: &Tolerances) -> Result<IndefiniteSubspace> {
    require_regular(s, tol)?;
    Ok(s.orthogonal_complement(tol))
}

/// Basis W of a regular subspace with WᴴJW = diag(I_p, −I_q), together with
/// the canonical signature (p, q) of the subspace.
pub fn j_orthonormal_basis(
    s: &IndefiniteSubspace,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, SignatureSpace)> {
    require_regular(s, tol)?;
    let q = s.orthonormalized(tol);
    let e = eig_hermitian(&q.gram())?;
    let mut order: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > 0.0).collect();
    let pos = order.len();
    order.extend((0..e.values.len()).filter(|&i| e.values[i] <= 0.0));
    let k = q.dim();
    let mut w = ComplexMatrix::zeros(s.ambient.dim(), k);
    for (dst, &src) in order.iter().enumerate() {
        let scale = 1.0 / e.values[src].abs().sqrt();
        let col = &q.basis * e.vectors.column(src) * Complex64::from(scale);
        w.set_column(dst, &col);
    }
    Ok((w, SignatureSpace::new(pos, k - pos)))
}

/// Rank-revealing factor E with E Eᴴ ≈ M for a positive semidefinite M.
pub fn psd_factor(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    check_hermitian(m)?;
    let e = eig_hermitian(m)?;
    let scale = e.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let min = e.values.first().copied().unwrap_or(0.0);
    if min < -tol.psd_tol * scale {
        return Err(Error::Indefinite {
            min_eigenvalue: min,
        });
    }
    let cut = tol.rank_tol * scale;
    let keep: Vec<usize> = (0..e.values.len())
        .rev()
        .filter(|&i| e.values[i] > cut)
        .collect();
    let mut out = ComplexMatrix::zeros(m.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(
            dst,
            &(e.vectors.column(src) * Complex64::from(e.values[src].sqrt())),
        );
    }
    Ok(out)
}

/// Region of the complex plane used to select a spectral subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralRegion {
    InsideOpenDisc,
    OutsideClosedDisc,
    ModulusOneBand,
}

/// Invariant subspace of A for all eigenvalues in `region`.
///
/// Eigenvalues within `metric_tol` of the unit circle make the inside and
/// outside regions ambiguous and are rejected; the band region collects
/// exactly those eigenvalues.
pub fn spectral_subspace(
    a: &ComplexMatrix,
    ambient: &SignatureSpace,
    region: SpectralRegion,
    tol: &Tolerances,
) -> Result<IndefiniteSubspace> {
    if a.nrows() != ambient.dim() || a.ncols() != ambient.dim() {
        return Err(Error::dims(
            "spectral_subspace",
            ambient.dim(),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    let band = tol.metric_tol;
    let near_circle = |z: Complex64| (z.norm() - 1.0).abs() <= band;
    if region != SpectralRegion::ModulusOneBand {
        if let Some(z) = crate::eigen::eig_general(a)?
            .into_iter()
            .find(|&z| near_circle(z))
        {
            return Err(Error::SpectralAmbiguity { eigenvalue: z });
        }
    }
    let (basis, _) = match region {
        SpectralRegion::InsideOpenDisc => invariant_subspace(a, |z| z.norm() < 1.0)?,
        SpectralRegion::OutsideClosedDisc => invariant_subspace(a, |z| z.norm() > 1.0)?,
        SpectralRegion::ModulusOneBand => invariant_subspace(a, near_circle)?,
    };
    Ok(IndefiniteSubspace {
        ambient: ambient.clone(),
        basis,
    })
}

/// Residual ‖(I − P) A V‖ measuring how far span(V) is from A-invariance,
/// with P the Euclidean projection onto span(V).
pub fn invariance_residual(a: &ComplexMatrix, s: &IndefiniteSubspace, tol: &Tolerances) -> f64 {
    let q = orth(s.basis(), tol.rank_tol);
    let av = a * &q;
    spectral_norm(&(&av - &q * (q.adjoint() * &av)))
}
