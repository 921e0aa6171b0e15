//! Defect operators, the Julia operator of a J-contraction, and the
//! conservative Julia embedding of a passive system.

use serde::Serialize;

use crate::colligation::Colligation;
use crate::error::{Error, Result};
use crate::indefinite::{
    dual_metric_defect, metric_defect, psd_factor, SignatureSpace, Tolerances,
};
use crate::matrix::{block2, identity, lstsq, pinv, singular_values, spectral_norm, ComplexMatrix};
use crate::sampling::{disc_points, exclude_near};

/// A contraction T together with its Julia operator
/// U = [[T, D_{T*}], [D_T^[*], −Lᴴ]] from dom ⊕ 𝔇_{T*} to cod ⊕ 𝔇_T.
#[derive(Debug, Clone)]
pub struct JuliaParts {
    pub t: ComplexMatrix,
    pub dom: SignatureSpace,
    pub cod: SignatureSpace,
    /// D_T : 𝔇_T → dom with D_T D_T^[*] = I − T^[*]T.
    pub d_t: ComplexMatrix,
    /// D_{T*} : 𝔇_{T*} → cod with D_{T*} D_{T*}^[*] = I − T T^[*].
    pub d_t_star: ComplexMatrix,
    /// L : 𝔇_T → 𝔇_{T*}.
    pub l: ComplexMatrix,
    pub u: ComplexMatrix,
    pub u_dom: SignatureSpace,
    pub u_cod: SignatureSpace,
    pub residuals: JuliaResiduals,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JuliaResiduals {
    /// ‖U^[*]U − I‖.
    pub isometry: f64,
    /// ‖UU^[*] − I‖.
    pub coisometry: f64,
    /// ‖D_T D_T^[*] − (I − T^[*]T)‖.
    pub defect: f64,
    /// ‖D_{T*} D_{T*}^[*] − (I − T T^[*])‖.
    pub defect_star: f64,
}

impl JuliaParts {
    pub fn defect_dim(&self) -> usize {
        self.d_t.ncols()
    }
    pub fn defect_star_dim(&self) -> usize {
        self.d_t_star.ncols()
    }
}

fn check_operator(t: &ComplexMatrix, dom: &SignatureSpace, cod: &SignatureSpace) -> Result<()> {
    if t.nrows() != cod.dim() || t.ncols() != dom.dim() {
        return Err(Error::dims(
            "contraction",
            format!("{}x{}", cod.dim(), dom.dim()),
            format!("{}x{}", t.nrows(), t.ncols()),
        ));
    }
    if dom.neg() != cod.neg() {
        return Err(Error::Precondition(format!(
            "domain and codomain negative indices differ ({} vs {})",
            dom.neg(),
            cod.neg()
        )));
    }
    Ok(())
}

fn factor(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    psd_factor(m, tol).map_err(|e| match e {
        Error::Indefinite { min_eigenvalue } => Error::NotContraction { min_eigenvalue },
        other => other,
    })
}

/// Defect operators (D_T, D_{T*}) of a J-contraction; both have trivial
/// kernels and Hilbert defect spaces.
pub fn defect_operators(
    t: &ComplexMatrix,
    dom: &SignatureSpace,
    cod: &SignatureSpace,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_operator(t, dom, cod)?;
    let e = factor(&metric_defect(t, dom, cod), tol)?;
    let e_star = factor(&dual_metric_defect(t, dom, cod), tol)?;
    Ok((dom.apply_left(&e), e_star))
}

/// Julia operator of a J-contraction built from its canonical defect factors.
pub fn julia_operator(
    t: &ComplexMatrix,
    dom: &SignatureSpace,
    cod: &SignatureSpace,
    tol: &Tolerances,
) -> Result<JuliaParts> {
    let (d_t, d_t_star) = defect_operators(t, dom, cod, tol)?;
    julia_from_defects(t, dom, cod, &d_t, &d_t_star, tol)
}

/// Julia operator assembled from caller-supplied defect operators, which
/// must satisfy the defect identities and have trivial kernels.
pub fn julia_from_defects(
    t: &ComplexMatrix,
    dom: &SignatureSpace,
    cod: &SignatureSpace,
    d_t: &ComplexMatrix,
    d_t_star: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<JuliaParts> {
    check_operator(t, dom, cod)?;
    let scale = spectral_norm(t).powi(2).max(1.0);
    let defect = spectral_norm(
        &(d_t * d_t.adjoint() - dom.apply_left(&dom.apply_right(&metric_defect(t, dom, cod)))),
    );
    let defect_star =
        spectral_norm(&(d_t_star * d_t_star.adjoint() - dual_metric_defect(t, dom, cod)));
    if defect > tol.psd_tol * scale || defect_star > tol.psd_tol * scale {
        return Err(Error::InvalidParameter(
            "defect operators do not factor the metric defects".into(),
        ));
    }
    for (d, name) in [(d_t, "D_T"), (d_t_star, "D_T*")] {
        let s = singular_values(d);
        if s.len() < d.ncols() || s.iter().any(|&x| x <= tol.rank_tol * scale.sqrt()) {
            return Err(Error::InvalidParameter(format!(
                "{name} has a nontrivial kernel"
            )));
        }
    }
    // E with E Eᴴ = J_dom − Tᴴ J_cod T, so that D_T^[*] = Eᴴ.
    let e = dom.apply_left(d_t);
    let e_adj = e.adjoint();
    let rhs = t.adjoint() * cod.apply_left(d_t_star);
    let l_adj = lstsq(&e, &rhs, tol.rank_tol);
    let solve_resid = spectral_norm(&(&e * &l_adj - &rhs));
    if solve_resid > tol.metric_tol * scale {
        return Err(Error::Certification {
            what: "link operator equations".into(),
            residual: solve_resid,
        });
    }
    let (r1, r2) = (d_t.ncols(), d_t_star.ncols());
    let u = block2(t, d_t_star, &e_adj, &(-&l_adj));
    let u_dom = dom.direct_sum(&SignatureSpace::hilbert(r2));
    let u_cod = cod.direct_sum(&SignatureSpace::hilbert(r1));
    let u_adj = u_dom.apply_left(&u_cod.apply_right(&u.adjoint()));
    let isometry = spectral_norm(&(&u_adj * &u - identity(u_dom.dim())));
    let coisometry = spectral_norm(&(&u * &u_adj - identity(u_cod.dim())));
    let bound = tol.metric_tol * scale;
    if isometry > bound || coisometry > bound {
        return Err(Error::Certification {
            what: "J-unitarity of the Julia operator".into(),
            residual: isometry.max(coisometry),
        });
    }
    Ok(JuliaParts {
        t: t.clone(),
        dom: dom.clone(),
        cod: cod.clone(),
        d_t: d_t.clone(),
        d_t_star: d_t_star.clone(),
        l: l_adj.adjoint(),
        u,
        u_dom,
        u_cod,
        residuals: JuliaResiduals {
            isometry,
            coisometry,
            defect,
            defect_star,
        },
    })
}

/// Unitaries relating two Julia operators of the same contraction:
/// U₂ = diag(I, W)ᴴ U₁ diag(I, W_*) with D_T₂ = D_T₁ W and D_{T*}₂ = D_{T*}₁ W_*.
#[derive(Debug, Clone)]
pub struct JuliaEquivalence {
    pub defect_rotation: ComplexMatrix,
    pub defect_star_rotation: ComplexMatrix,
    /// Largest deviation of the rotations from unitarity.
    pub unitarity_residual: f64,
    /// ‖U₂ − diag(I, W)ᴴ U₁ diag(I, W_*)‖.
    pub residual: f64,
}

pub fn julia_equivalence(
    a: &JuliaParts,
    b: &JuliaParts,
    tol: &Tolerances,
) -> Result<JuliaEquivalence> {
    if a.t.shape() != b.t.shape()
        || a.defect_dim() != b.defect_dim()
        || a.defect_star_dim() != b.defect_star_dim()
    {
        return Err(Error::Precondition(
            "Julia operators have different shapes".into(),
        ));
    }
    let w = pinv(&a.d_t, tol.rank_tol) * &b.d_t;
    let w_star = pinv(&a.d_t_star, tol.rank_tol) * &b.d_t_star;
    let unitarity_residual = spectral_norm(&(w.adjoint() * &w - identity(w.ncols()))).max(
        spectral_norm(&(w_star.adjoint() * &w_star - identity(w_star.ncols()))),
    );
    let left = crate::matrix::block_diag(&[&identity(a.cod.dim()), &w.adjoint()]);
    let right = crate::matrix::block_diag(&[&identity(a.dom.dim()), &w_star]);
    let residual = spectral_norm(&(&b.u - left * &a.u * right));
    Ok(JuliaEquivalence {
        defect_rotation: w,
        defect_star_rotation: w_star,
        unitarity_residual,
        residual,
    })
}

/// Conservative embedding of a passive system: same state and main operator,
/// input enlarged by 𝔇_{T*} and output by 𝔇_T, with the Julia operator of
/// the system operator as the new system operator.
pub fn julia_embedding(sys: &Colligation, tol: &Tolerances) -> Result<Colligation> {
    let (t, dom, cod) = sys.system_operator();
    let class = crate::indefinite::metric_classify(&t, &dom, &cod, tol)?;
    if !class.contraction {
        return Err(Error::Precondition(format!(
            "system is not passive (metric defect eigenvalue {:.3e})",
            class.min_defect_eigenvalue
        )));
    }
    let parts = julia_operator(&t, &dom, &cod, tol)?;
    let n = sys.state_dim();
    let (m, p) = (sys.input_dim(), sys.output_dim());
    let (r1, r2) = (parts.defect_dim(), parts.defect_star_dim());
    let u = &parts.u;
    // Rows: state, output, 𝔇_T; columns: state, input, 𝔇_{T*}.
    let a = u.view((0, 0), (n, n)).into_owned();
    let b = u.view((0, n), (n, m + r2)).into_owned();
    let c = u.view((n, 0), (p + r1, n)).into_owned();
    let d = u.view((n, n), (p + r1, m + r2)).into_owned();
    let embedded = Colligation::new(sys.state().clone(), a, b, c, d)?;
    let corner = embedding_corner_error(sys, &embedded, tol)?;
    if corner > tol.metric_tol {
        return Err(Error::Certification {
            what: "transfer-function corner of the embedding".into(),
            residual: corner,
        });
    }
    Ok(embedded)
}

/// Largest relative distance between θ_Σ and the upper-left corner of the
/// embedded transfer function on the disc samples.
pub fn embedding_corner_error(
    sys: &Colligation,
    embedded: &Colligation,
    tol: &Tolerances,
) -> Result<f64> {
    let (m, p) = (sys.input_dim(), sys.output_dim());
    let pts = exclude_near(
        disc_points(tol.disc_samples, tol.seed),
        &sys.bare().disc_poles()?,
        10.0 * tol.rank_tol,
    );
    let mut worst: f64 = 0.0;
    for z in pts {
        let small = sys.transfer_eval(z, tol)?;
        let big = embedded.transfer_eval(z, tol)?;
        let corner = big.view((0, 0), (p, m)).into_owned();
        worst = worst.max(spectral_norm(&(corner - &small)) / spectral_norm(&small).max(1.0));
    }
    Ok(worst)
}
