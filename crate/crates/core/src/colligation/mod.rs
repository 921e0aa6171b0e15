//! Operator colligations: the block system operator over a signature-metric
//! state space, its metric class, transfer function, Krylov subspaces,
//! restrictions, similarities, and realization from Taylor data.

mod dilation;
mod krylov;
mod realize;
mod similarity;

pub use dilation::{is_dilation_of, restriction, DilationReport, DilationSplit};
pub(crate) use krylov::complements_hilbert;
pub use krylov::{
    index_preservation_check, krylov_report, krylov_span, IndexPreservationReport, KrylovReport,
};
pub use realize::realize_from_taylor;
pub use similarity::{
    unitary_similarity, verify_similarity, weak_similarity, Similarity, SimilarityKind,
    SimilarityResult,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::eig_general;
use crate::error::{Error, Result};
use crate::indefinite::{j_adjoint, metric_classify, MetricReport, SignatureSpace, Tolerances};
use crate::matrix::{
    block2, check_finite, check_shape, hstack, identity, inverse_with_condition, vstack, zeros,
    ComplexMatrix,
};

/// A realization (A, B, C, D) without any state metric.
#[derive(Debug, Clone, PartialEq)]
pub struct BareRealization {
    a: ComplexMatrix,
    b: ComplexMatrix,
    c: ComplexMatrix,
    d: ComplexMatrix,
}

impl BareRealization {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        let n = a.nrows();
        let (p, m) = d.shape();
        check_shape(&a, n, n, "A")?;
        check_shape(&b, n, m, "B")?;
        check_shape(&c, p, n, "C")?;
        for (mat, name) in [(&a, "A"), (&b, "B"), (&c, "C"), (&d, "D")] {
            check_finite(mat, name)?;
        }
        Ok(BareRealization { a, b, c, d })
    }

    /// Realization of the constant function `d` (no state).
    pub fn static_gain(d: ComplexMatrix) -> Self {
        let (p, m) = d.shape();
        BareRealization {
            a: zeros(0, 0),
            b: zeros(0, m),
            c: zeros(p, 0),
            d,
        }
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }
    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }
    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }
    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    pub fn input_dim(&self) -> usize {
        self.d.ncols()
    }
    pub fn output_dim(&self) -> usize {
        self.d.nrows()
    }

    /// θ(z) = D + zC(I − zA)⁻¹B.
    pub fn transfer_eval(&self, z: Complex64, tol: &Tolerances) -> Result<ComplexMatrix> {
        if z == Complex64::from(0.0) || self.state_dim() == 0 {
            return Ok(self.d.clone());
        }
        let n = self.state_dim();
        let m = identity(n) - &self.a * z;
        let pole = || -> Error {
            let nearest = eig_general(&self.a)
                .unwrap_or_default()
                .into_iter()
                .filter(|l| l.norm() > 0.0)
                .map(|l| l.inv())
                .min_by(|x, y| (x - z).norm().partial_cmp(&(y - z).norm()).unwrap())
                .unwrap_or(Complex64::from(f64::INFINITY));
            Error::PoleProximity { z, nearest }
        };
        let (inv, cond) = inverse_with_condition(&m).map_err(|_| pole())?;
        if cond > 1.0 / tol.rank_tol {
            return Err(pole());
        }
        Ok(&self.d + &self.c * inv * &self.b * z)
    }

    /// Taylor coefficient at the origin: D for k = 0, C A^{k−1} B otherwise.
    pub fn markov(&self, k: usize) -> ComplexMatrix {
        if k == 0 {
            return self.d.clone();
        }
        let mut x = self.b.clone();
        for _ in 1..k {
            x = &self.a * x;
        }
        &self.c * x
    }

    /// Realization of θ^#(z) = θ(z̄)ᴴ.
    pub fn sharp(&self) -> BareRealization {
        BareRealization {
            a: self.a.adjoint(),
            b: self.c.adjoint(),
            c: self.b.adjoint(),
            d: self.d.adjoint(),
        }
    }

    /// State change x' = Z x, given Z and its inverse.
    pub fn transform(&self, z: &ComplexMatrix, z_inv: &ComplexMatrix) -> BareRealization {
        BareRealization {
            a: z * &self.a * z_inv,
            b: z * &self.b,
            c: &self.c * z_inv,
            d: self.d.clone(),
        }
    }

    /// Compression onto the span of orthonormal columns `q`.
    fn compress(&self, q: &ComplexMatrix) -> BareRealization {
        BareRealization {
            a: q.adjoint() * &self.a * q,
            b: q.adjoint() * &self.b,
            c: &self.c * q,
            d: self.d.clone(),
        }
    }

    /// Minimal realization obtained by restricting to the controllable
    /// subspace and then passing to the quotient by the unobservable one.
    pub fn minimal(&self, tol: &Tolerances) -> BareRealization {
        let qc = krylov_span(&self.a, &self.b, tol.rank_tol);
        let ctrl = self.compress(&qc);
        let qo = krylov_span(&ctrl.a.adjoint(), &ctrl.c.adjoint(), tol.rank_tol);
        ctrl.compress(&qo)
    }

    /// Poles of θ in the open disc: 1/λ for the eigenvalues |λ| > 1 of A.
    pub fn disc_poles(&self) -> Result<Vec<Complex64>> {
        Ok(eig_general(&self.a)?
            .into_iter()
            .filter(|l| l.norm() > 1.0)
            .map(|l| l.inv())
            .collect())
    }

    /// Number of poles in the open disc counted with multiplicity, taken from
    /// a minimal realization.
    pub fn pole_multiplicity_in_disc(&self, tol: &Tolerances) -> Result<usize> {
        let min = self.minimal(tol);
        let eig = eig_general(&min.a)?;
        if let Some(&l) = eig
            .iter()
            .find(|l| (l.norm() - 1.0).abs() <= tol.metric_tol)
        {
            return Err(Error::SpectralAmbiguity { eigenvalue: l });
        }
        Ok(eig.iter().filter(|l| l.norm() > 1.0).count())
    }

    /// Realization of θ₂·θ₁ where θ₁ = `first`, θ₂ = `second`, with state
    /// ordered as (first, second).
    pub fn cascade(first: &BareRealization, second: &BareRealization) -> Result<BareRealization> {
        if first.output_dim() != second.input_dim() {
            return Err(Error::dims(
                "cascade",
                first.output_dim(),
                second.input_dim(),
            ));
        }
        let (n1, n2) = (first.state_dim(), second.state_dim());
        let a = block2(&first.a, &zeros(n1, n2), &(&second.b * &first.c), &second.a);
        let b = vstack(first.input_dim(), &[&first.b, &(&second.b * &first.d)]);
        let c = hstack(second.output_dim(), &[&(&second.d * &first.c), &second.c]);
        let d = &second.d * &first.d;
        BareRealization::new(a, b, c, d)
    }
}

/// Metric class of a system operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemMetric {
    Conservative,
    Isometric,
    Coisometric,
    Passive,
    None,
}

impl SystemMetric {
    pub fn is_passive(self) -> bool {
        !matches!(self, SystemMetric::None)
    }
    pub fn is_isometric(self) -> bool {
        matches!(self, SystemMetric::Conservative | SystemMetric::Isometric)
    }
    pub fn is_coisometric(self) -> bool {
        matches!(self, SystemMetric::Conservative | SystemMetric::Coisometric)
    }
}

/// Metric class of a colligation together with its Krylov properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemClass {
    pub metric: SystemMetric,
    pub operator: MetricReport,
    pub controllable: Option<bool>,
    pub observable: Option<bool>,
    pub simple: Option<bool>,
    pub minimal: Option<bool>,
    /// For passive systems: A, [A; C] and [A B] are all contractions.
    pub bicontraction: Option<bool>,
}

/// A colligation (A, B, C, D) with a signature-metric state space and
/// Hilbert input and output spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Colligation {
    state: SignatureSpace,
    sys: BareRealization,
}

impl Colligation {
    pub fn new(
        state: SignatureSpace,
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        Self::from_bare(state, BareRealization::new(a, b, c, d)?)
    }

    pub fn from_bare(state: SignatureSpace, sys: BareRealization) -> Result<Self> {
        if !state.is_canonical() {
            return Err(Error::InvalidParameter(
                "state metric must list positive directions first".into(),
            ));
        }
        if state.dim() != sys.state_dim() {
            return Err(Error::dims("state dimension", state.dim(), sys.state_dim()));
        }
        Ok(Colligation { state, sys })
    }

    /// Constant colligation with no state.
    pub fn static_gain(d: ComplexMatrix) -> Self {
        Colligation {
            state: SignatureSpace::new(0, 0),
            sys: BareRealization::static_gain(d),
        }
    }

    pub fn state(&self) -> &SignatureSpace {
        &self.state
    }
    pub fn kappa(&self) -> usize {
        self.state.neg()
    }
    pub fn bare(&self) -> &BareRealization {
        &self.sys
    }
    pub fn into_bare(self) -> BareRealization {
        self.sys
    }
    pub fn a(&self) -> &ComplexMatrix {
        &self.sys.a
    }
    pub fn b(&self) -> &ComplexMatrix {
        &self.sys.b
    }
    pub fn c(&self) -> &ComplexMatrix {
        &self.sys.c
    }
    pub fn d(&self) -> &ComplexMatrix {
        &self.sys.d
    }
    pub fn state_dim(&self) -> usize {
        self.state.dim()
    }
    pub fn input_dim(&self) -> usize {
        self.sys.input_dim()
    }
    pub fn output_dim(&self) -> usize {
        self.sys.output_dim()
    }

    /// Domain metric space: state ⊕ input.
    pub fn operator_domain(&self) -> SignatureSpace {
        self.state
            .direct_sum(&SignatureSpace::hilbert(self.input_dim()))
    }

    /// Codomain metric space: state ⊕ output.
    pub fn operator_codomain(&self) -> SignatureSpace {
        self.state
            .direct_sum(&SignatureSpace::hilbert(self.output_dim()))
    }

    /// The system operator T = [[A, B], [C, D]] with its domain and codomain.
    pub fn system_operator(&self) -> (ComplexMatrix, SignatureSpace, SignatureSpace) {
        (
            block2(&self.sys.a, &self.sys.b, &self.sys.c, &self.sys.d),
            self.operator_domain(),
            self.operator_codomain(),
        )
    }

    /// Splits a system operator back into its blocks.
    pub fn from_system_operator(
        t: &ComplexMatrix,
        state: SignatureSpace,
        input_dim: usize,
        output_dim: usize,
    ) -> Result<Self> {
        let n = state.dim();
        check_shape(t, n + output_dim, n + input_dim, "system operator")?;
        Self::new(
            state,
            t.view((0, 0), (n, n)).into_owned(),
            t.view((0, n), (n, input_dim)).into_owned(),
            t.view((n, 0), (output_dim, n)).into_owned(),
            t.view((n, n), (output_dim, input_dim)).into_owned(),
        )
    }

    /// Metric class of T together with Krylov flags.
    pub fn classify(&self, tol: &Tolerances) -> Result<SystemClass> {
        let (t, dom, cod) = self.system_operator();
        let operator = metric_classify(&t, &dom, &cod, tol)?;
        let metric = if operator.isometry && operator.coisometry {
            SystemMetric::Conservative
        } else if operator.isometry {
            SystemMetric::Isometric
        } else if operator.coisometry {
            SystemMetric::Coisometric
        } else if operator.contraction {
            SystemMetric::Passive
        } else {
            SystemMetric::None
        };
        let bicontraction = if metric.is_passive() {
            Some(self.bicontraction_check(tol)?)
        } else {
            None
        };
        let k = krylov_report(self, tol)?;
        Ok(SystemClass {
            metric,
            operator,
            controllable: Some(k.is_controllable()),
            observable: Some(k.is_observable()),
            simple: Some(k.is_simple()),
            minimal: Some(k.is_minimal()),
            bicontraction,
        })
    }

    fn bicontraction_check(&self, tol: &Tolerances) -> Result<bool> {
        let x = &self.state;
        let ac = vstack(self.state_dim(), &[self.a(), self.c()]);
        let ab = hstack(self.state_dim(), &[self.a(), self.b()]);
        let main = metric_classify(self.a(), x, x, tol)?.contraction;
        let col = metric_classify(&ac, x, &self.operator_codomain(), tol)?.contraction;
        let row = metric_classify(&ab, &self.operator_domain(), x, tol)?.contraction;
        Ok(main && col && row)
    }

    /// The dual system (A^[*], C^[*], B^[*], Dᴴ).
    pub fn adjoint_system(&self) -> Colligation {
        let x = &self.state;
        let u = SignatureSpace::hilbert(self.input_dim());
        let y = SignatureSpace::hilbert(self.output_dim());
        let a = j_adjoint(self.a(), x, x).expect("square state operator");
        let b = j_adjoint(self.c(), x, &y).expect("observation operator shape");
        let c = j_adjoint(self.b(), &u, x).expect("control operator shape");
        Colligation {
            state: self.state.clone(),
            sys: BareRealization {
                a,
                b,
                c,
                d: self.d().adjoint(),
            },
        }
    }

    pub fn transfer_eval(&self, z: Complex64, tol: &Tolerances) -> Result<ComplexMatrix> {
        self.sys.transfer_eval(z, tol)
    }

    pub fn markov(&self, k: usize) -> ComplexMatrix {
        self.sys.markov(k)
    }

    /// State change x' = Z x into a new canonical state space.
    pub fn transform(
        &self,
        state: SignatureSpace,
        z: &ComplexMatrix,
        z_inv: &ComplexMatrix,
    ) -> Result<Colligation> {
        Colligation::from_bare(state, self.sys.transform(z, z_inv))
    }
}
