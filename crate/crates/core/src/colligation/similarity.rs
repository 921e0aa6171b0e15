use serde::Serialize;

use super::Colligation;
use crate::error::{Error, Result};
use crate::indefinite::Tolerances;
use crate::matrix::{
    identity, inverse_with_condition, numerical_rank, pinv, spectral_norm, vstack, zeros,
    ComplexMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    Unitary,
    Weak,
}

/// A state-space similarity Z with x₂ = Z x₁ and its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct SimilarityResult {
    pub kind: SimilarityKind,
    #[serde(skip)]
    pub z: ComplexMatrix,
    /// ‖Z A₁ − A₂ Z‖.
    pub main_residual: f64,
    /// ‖Z B₁ − B₂‖.
    pub control_residual: f64,
    /// ‖C₁ − C₂ Z‖.
    pub observation_residual: f64,
    /// ‖Z Z⁻¹ − I‖.
    pub inverse_residual: f64,
    /// ‖Zᴴ J₂ Z − J₁‖ (relevant for unitary similarity).
    pub metric_residual: f64,
    /// 1-norm condition number of Z.
    pub condition: f64,
}

impl SimilarityResult {
    pub fn max_residual(&self) -> f64 {
        self.main_residual
            .max(self.control_residual)
            .max(self.observation_residual)
            .max(self.inverse_residual)
    }
}

#[derive(Debug, Clone)]
pub enum Similarity {
    Found(SimilarityResult),
    NotFound(String),
}

impl Similarity {
    pub fn found(&self) -> Option<&SimilarityResult> {
        match self {
            Similarity::Found(r) => Some(r),
            Similarity::NotFound(_) => None,
        }
    }
}

/// Residuals of a candidate similarity x₂ = Z x₁ between two systems.
pub fn verify_similarity(
    s1: &Colligation,
    s2: &Colligation,
    z: &ComplexMatrix,
    kind: SimilarityKind,
) -> Result<SimilarityResult> {
    let n = s1.state_dim();
    if z.shape() != (s2.state_dim(), n) {
        return Err(Error::dims(
            "similarity",
            format!("{}x{}", s2.state_dim(), n),
            format!("{}x{}", z.nrows(), z.ncols()),
        ));
    }
    let scale = spectral_norm(z).max(1.0);
    let (inverse_residual, condition) = match inverse_with_condition(z) {
        Ok((inv, cond)) => (spectral_norm(&(z * inv - identity(n))), cond),
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    let metric_residual = if s1.state().dim() == s2.state().dim() {
        spectral_norm(&(z.adjoint() * s2.state().apply_left(z) - s1.state().metric()))
    } else {
        f64::INFINITY
    };
    Ok(SimilarityResult {
        kind,
        main_residual: spectral_norm(&(z * s1.a() - s2.a() * z)) / scale,
        control_residual: spectral_norm(&(z * s1.b() - s2.b())) / scale,
        observation_residual: spectral_norm(&(s1.c() - s2.c() * z)) / scale,
        inverse_residual,
        metric_residual,
        condition,
        z: z.clone(),
    })
}

/// Kronecker product.
fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

fn vec_of(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_iterator(m.len(), 1, m.iter().copied())
}

fn same_shape(s1: &Colligation, s2: &Colligation) -> Option<String> {
    if s1.state_dim() != s2.state_dim() {
        return Some(format!(
            "state dimensions differ ({} vs {})",
            s1.state_dim(),
            s2.state_dim()
        ));
    }
    if s1.input_dim() != s2.input_dim() || s1.output_dim() != s2.output_dim() {
        return Some("input/output dimensions differ".into());
    }
    None
}

/// Searches for a J-unitary Z with Z A₁ = A₂ Z, Z B₁ = B₂, C₁ = C₂ Z by
/// solving the linear intertwining equations and certifying the metric.
pub fn unitary_similarity(
    s1: &Colligation,
    s2: &Colligation,
    tol: &Tolerances,
) -> Result<Similarity> {
    if let Some(reason) = same_shape(s1, s2) {
        return Ok(Similarity::NotFound(reason));
    }
    if s1.kappa() != s2.kappa() {
        return Ok(Similarity::NotFound("negative indices differ".into()));
    }
    let dscale = spectral_norm(s1.d()).max(1.0);
    if spectral_norm(&(s1.d() - s2.d())) > tol.metric_tol * dscale {
        return Ok(Similarity::NotFound("feedthrough operators differ".into()));
    }
    let n = s1.state_dim();
    if n == 0 {
        let r = verify_similarity(s1, s2, &zeros(0, 0), SimilarityKind::Unitary)?;
        return Ok(Similarity::Found(r));
    }
    let (m, p) = (s1.input_dim(), s1.output_dim());
    let id = identity(n);
    // Column-major vec: vec(X Z Y) = (Yᵀ ⊗ X) vec(Z).
    let main = kron(&s1.a().transpose(), &id) - kron(&id, s2.a());
    let ctrl = kron(&s1.b().transpose(), &id);
    let obs = kron(&id, s2.c());
    let lhs = vstack(n * n, &[&main, &ctrl, &obs]);
    let rhs = vstack(1, &[&zeros(n * n, 1), &vec_of(s2.b()), &vec_of(s1.c())]);
    debug_assert_eq!(lhs.nrows(), n * n + n * m + p * n);
    let sol = pinv(&lhs, tol.rank_tol) * &rhs;
    let z = ComplexMatrix::from_iterator(n, n, sol.iter().copied());
    let lin_resid = spectral_norm(&(&lhs * &sol - &rhs)) / spectral_norm(&rhs).max(1.0);
    if lin_resid > tol.metric_tol {
        return Ok(Similarity::NotFound(format!(
            "intertwining equations inconsistent (residual {lin_resid:.2e})"
        )));
    }
    let result = verify_similarity(s1, s2, &z, SimilarityKind::Unitary)?;
    let scale = spectral_norm(&z).powi(2).max(1.0);
    if result.metric_residual > tol.metric_tol * scale {
        return Ok(Similarity::NotFound(format!(
            "intertwiner is not J-unitary (residual {:.2e})",
            result.metric_residual
        )));
    }
    Ok(Similarity::Found(result))
}

fn controllability_matrix(s: &Colligation, blocks: usize) -> ComplexMatrix {
    let n = s.state_dim();
    let m = s.input_dim();
    let mut out = zeros(n, m * blocks);
    let mut x = s.b().clone();
    for k in 0..blocks {
        out.view_mut((0, k * m), (n, m)).copy_from(&x);
        x = s.a() * x;
    }
    out
}

/// Similarity between two minimal realizations of the same function, built
/// on the controllability Krylov basis by A₁ᵏB₁u ↦ A₂ᵏB₂u.
pub fn weak_similarity(
    s1: &Colligation,
    s2: &Colligation,
    tol: &Tolerances,
) -> Result<SimilarityResult> {
    if let Some(reason) = same_shape(s1, s2) {
        return Err(Error::Precondition(reason));
    }
    let n = s1.state_dim();
    let terms = 2 * n.max(s2.state_dim()) + 1;
    for k in 0..terms {
        let (h1, h2) = (s1.markov(k), s2.markov(k));
        let scale = spectral_norm(&h1).max(spectral_norm(&h2)).max(1.0);
        let diff = spectral_norm(&(&h1 - &h2));
        if diff > tol.metric_tol * scale {
            return Err(Error::Precondition(format!(
                "Taylor coefficient {k} differs by {diff:.2e}"
            )));
        }
    }
    for s in [s1, s2] {
        let k = super::krylov_report(s, tol)?;
        if !k.is_minimal() {
            return Err(Error::Precondition("realization is not minimal".into()));
        }
    }
    let k1 = controllability_matrix(s1, n.max(1));
    let k2 = controllability_matrix(s2, n.max(1));
    if numerical_rank(&k1, tol.rank_tol) < n {
        return Err(Error::Precondition(
            "controllability matrix is rank deficient".into(),
        ));
    }
    let z = k2 * pinv(&k1, tol.rank_tol);
    let result = verify_similarity(s1, s2, &z, SimilarityKind::Weak)?;
    if result.condition > 1.0 / tol.rank_tol {
        return Err(Error::Certification {
            what: "invertibility of the weak similarity".into(),
            residual: result.condition,
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indefinite::SignatureSpace;
    use crate::matrix::real_matrix;

    fn sample() -> Colligation {
        Colligation::new(
            SignatureSpace::new(1, 1),
            real_matrix(2, 2, &[0.3, 0.1, 0.2, 1.5]),
            real_matrix(2, 1, &[1.0, 0.5]),
            real_matrix(1, 2, &[0.4, 1.0]),
            real_matrix(1, 1, &[0.2]),
        )
        .unwrap()
    }

    #[test]
    fn identity_similarity() {
        let s = sample();
        let tol = Tolerances::default();
        let u = unitary_similarity(&s, &s, &tol).unwrap();
        let r = u.found().expect("found");
        assert!((&r.z - identity(2)).norm() < 1e-9);
        let w = weak_similarity(&s, &s, &tol).unwrap();
        assert!((&w.z - identity(2)).norm() < 1e-9);
    }

    #[test]
    fn feedthrough_mismatch_is_rejected() {
        let s = sample();
        let other = Colligation::new(
            s.state().clone(),
            s.a().clone(),
            s.b().clone(),
            s.c().clone(),
            real_matrix(1, 1, &[0.3]),
        )
        .unwrap();
        assert!(unitary_similarity(&s, &other, &Tolerances::default())
            .unwrap()
            .found()
            .is_none());
    }

    #[test]
    fn kron_layout() {
        let a = real_matrix(1, 2, &[1.0, 2.0]);
        let b = real_matrix(2, 1, &[3.0, 4.0]);
        assert_eq!(kron(&a, &b), real_matrix(2, 2, &[3.0, 6.0, 4.0, 8.0]));
    }
}
