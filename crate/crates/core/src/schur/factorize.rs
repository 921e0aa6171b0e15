use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::{boundary_behavior, invert_system, negative_squares_estimate, TransferFunction};
use crate::colligation::{BareRealization, Colligation, SystemMetric};
use crate::eigen::{eig_general, eig_hermitian, reorder_schur, schur};
use crate::error::{Error, Result};
use crate::indefinite::{SignatureSpace, Tolerances};
use crate::matrix::{
    hstack, null_space, singular_values, solve, spectral_norm, vstack, ComplexMatrix,
};
use crate::products::{kl_factorize_system, FactorMode};
use crate::sampling::{disc_points, exclude_near};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorizationSide {
    /// S = S_r B_r⁻¹
    Right,
    /// S = B_l⁻¹ S_l
    Left,
}

/// How one side of the factorization was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorizationRoute {
    /// Splitting the backing system along its invariant fundamental
    /// decomposition.
    System,
    /// Building the Blaschke factor from the pole data of a minimal
    /// realization (a Stein equation gives the kernel Gram of the pole part).
    Kernel,
}

#[derive(Debug, Clone, Serialize)]
pub struct SideReport {
    pub side: FactorizationSide,
    pub route: FactorizationRoute,
    pub degree: usize,
    /// Largest ‖S(z) − reconstruction(z)‖ over the interior samples.
    pub reconstruction_error: f64,
    pub negative_squares: Option<usize>,
    /// Largest boundary singular value of the Schur-class factor.
    pub max_boundary_sigma: f64,
    pub blaschke_bi_inner: bool,
    /// Smallest singular value of the stacked factors at the zeros of the
    /// Blaschke factor; positive when the factors have no common zeros.
    pub coprime_min_singular_value: f64,
    pub coprime: bool,
}

#[derive(Debug, Clone)]
pub struct FactorizationResult {
    pub s_r: TransferFunction,
    pub b_r: TransferFunction,
    pub s_l: TransferFunction,
    pub b_l: TransferFunction,
    pub degree: usize,
    pub right: SideReport,
    pub left: SideReport,
}

const RECONSTRUCTION_LIMIT: f64 = 1e-7;
const SAMPLES: usize = 64;

fn hermitian_power(g: &ComplexMatrix, exponent: f64, what: &str) -> Result<ComplexMatrix> {
    let h = (g + g.adjoint()) * Complex64::from(0.5);
    let e = eig_hermitian(&h)?;
    let scale = e.values.last().copied().unwrap_or(1.0).max(1.0);
    if let Some(&v) = e.values.first().filter(|&&v| v <= 1e-12 * scale) {
        return Err(Error::Certification {
            what: format!("{what} is not positive definite"),
            residual: v,
        });
    }
    let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        e.values.len(),
        e.values.iter().map(|v| Complex64::from(v.powf(exponent))),
    ));
    Ok(&e.vectors * d * e.vectors.adjoint())
}

/// Solves AᴴPA − P = Q through its Kronecker form.
fn stein(a: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    let k = a.nrows();
    let op = a.transpose().kronecker(&a.adjoint()) - ComplexMatrix::identity(k * k, k * k);
    let rhs = ComplexMatrix::from_column_slice(k * k, 1, q.as_slice());
    let x = solve(&op, &rhs)?;
    Ok(ComplexMatrix::from_column_slice(k, k, x.as_slice()))
}

/// Conservative anti-Hilbert-state system whose transfer function is an
/// inverse Blaschke product with the left pole data (C₂, A₂₂) of S.
fn inverse_blaschke_from_poles(
    c2: &ComplexMatrix,
    a22: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Colligation> {
    let (k, p) = (a22.nrows(), c2.nrows());
    let gram = stein(a22, &(c2.adjoint() * c2))?;
    let root = hermitian_power(&gram, 0.5, "pole Gram matrix")?;
    let root_inv = hermitian_power(&gram, -0.5, "pole Gram matrix")?;
    let a = &root * a22 * &root_inv;
    let c = c2 * &root_inv;
    let col = vstack(k, &[&a, &c]);
    let signs =
        SignatureSpace::from_signs((0..k + p).map(|i| if i < k { -1 } else { 1 }).collect())?;
    let n = null_space(&signs.apply_right(&col.adjoint()), tol.rank_tol);
    if n.ncols() != p {
        return Err(Error::Certification {
            what: "J-unitary completion has the wrong number of columns".into(),
            residual: (n.ncols() as f64 - p as f64).abs(),
        });
    }
    let g = n.adjoint() * signs.apply_left(&n);
    let rest = &n * hermitian_power(&g, -0.5, "completion Gram matrix")?;
    let b = rest.rows(0, k).into_owned();
    let d = rest.rows(k, p).into_owned();
    let sys = Colligation::new(SignatureSpace::anti_hilbert(k), a, b, c, d)?;
    if sys.classify(tol)?.metric != SystemMetric::Conservative {
        return Err(Error::Certification {
            what: "inverse Blaschke completion is not conservative".into(),
            residual: 0.0,
        });
    }
    Ok(sys)
}

/// Left factorization S = B_l⁻¹ S_l built from the poles of S in the disc.
///
/// The eigenvalues of the main operator of a minimal realization outside the
/// closed disc carry the poles. Their observable pair (C₂, A₂₂), rescaled by
/// the square root of the Stein solution P of A₂₂ᴴPA₂₂ − P = C₂ᴴC₂, is
/// completed to a conservative system with anti-Hilbert state realizing
/// B_l⁻¹; then S_l = B_l S is formed and reduced to a minimal realization,
/// which cancels the poles. Returns (S_l, B_l).
pub fn left_factorization_via_kernel(
    s: &TransferFunction,
    tol: &Tolerances,
) -> Result<(TransferFunction, TransferFunction)> {
    let min = s.realization().minimal(tol);
    let p = min.output_dim();
    let mut form = schur(min.a())?;
    if let Some(l) = form
        .eigenvalues()
        .into_iter()
        .find(|l| (l.norm() - 1.0).abs() <= tol.metric_tol)
    {
        return Err(Error::SpectralAmbiguity { eigenvalue: l });
    }
    let k = reorder_schur(&mut form, |l| l.norm() > 1.0);
    if k == 0 {
        return Ok((
            TransferFunction::from_bare(min),
            TransferFunction::constant(ComplexMatrix::identity(p, p)),
        ));
    }
    let a22 = form.t.view((0, 0), (k, k)).into_owned();
    let c2 = min.c() * form.q.columns(0, k);
    let inverse = inverse_blaschke_from_poles(&c2, &a22, tol)?;
    let b_l = invert_system(&inverse, tol)?
        .colligation
        .ok_or_else(|| Error::Certification {
            what: "inverse of the constructed Blaschke factor is not conservative".into(),
            residual: 0.0,
        })?;
    let s_l = BareRealization::cascade(&min, b_l.bare())?.minimal(tol);
    Ok((
        TransferFunction::from_bare(s_l),
        TransferFunction::from_colligation(b_l),
    ))
}

/// Zeros of a Blaschke factor in the disc: 1/μ for the eigenvalues |μ| > 1 of
/// the main operator of its inverse.
fn blaschke_zeros(b: &TransferFunction, tol: &Tolerances) -> Result<Vec<Complex64>> {
    match b.colligation() {
        Some(sys) if sys.state_dim() > 0 => {
            let inv = invert_system(sys, tol)?;
            Ok(eig_general(inv.realization.a())?
                .into_iter()
                .filter(|m| m.norm() > 1.0)
                .map(|m| m.inv())
                .collect())
        }
        _ => Ok(Vec::new()),
    }
}

fn coprime_margin(
    side: FactorizationSide,
    schur_part: &TransferFunction,
    blaschke: &TransferFunction,
    tol: &Tolerances,
) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for w in blaschke_zeros(blaschke, tol)? {
        let (bw, sw) = (blaschke.evaluate(w, tol)?, schur_part.evaluate(w, tol)?);
        let stacked = match side {
            FactorizationSide::Right => vstack(bw.ncols(), &[&bw, &sw]),
            FactorizationSide::Left => hstack(bw.nrows(), &[&bw, &sw]),
        };
        let sv = singular_values(&stacked);
        let needed = stacked.nrows().min(stacked.ncols());
        worst = worst.min(sv.get(needed - 1).copied().unwrap_or(0.0));
    }
    Ok(worst)
}

fn reconstruction_error(
    side: FactorizationSide,
    s: &TransferFunction,
    schur_part: &TransferFunction,
    blaschke: &TransferFunction,
    tol: &Tolerances,
) -> Result<f64> {
    let mut avoid = s.poles()?;
    avoid.extend(blaschke_zeros(blaschke, tol)?);
    let mut worst: f64 = 0.0;
    for z in exclude_near(disc_points(SAMPLES, tol.seed), &avoid, 1e-3) {
        let (sz, fz, bz) = (
            s.evaluate(z, tol)?,
            schur_part.evaluate(z, tol)?,
            blaschke.evaluate(z, tol)?,
        );
        let rebuilt = match side {
            FactorizationSide::Right => solve(&bz.transpose(), &fz.transpose())?.transpose(),
            FactorizationSide::Left => solve(&bz, &fz)?,
        };
        worst = worst.max(spectral_norm(&(sz - rebuilt)));
    }
    Ok(worst)
}

fn right_side(
    s: &TransferFunction,
    tol: &Tolerances,
) -> Result<(TransferFunction, TransferFunction, FactorizationRoute)> {
    if let Some(sys) = s.colligation() {
        match kl_factorize_system(sys, FactorMode::Right, tol) {
            Ok(f) => {
                let b = invert_system(&f.blaschke_inverse, tol)?
                    .colligation
                    .ok_or_else(|| Error::Certification {
                        what: "right Blaschke factor is not conservative".into(),
                        residual: 0.0,
                    })?;
                return Ok((
                    TransferFunction::from_colligation(f.outer),
                    TransferFunction::from_colligation(b),
                    FactorizationRoute::System,
                ));
            }
            Err(e) if e.is_input_error() => {}
            Err(e) => return Err(e),
        }
    }
    let (s_l, b_l) = left_factorization_via_kernel(&s.sharp(), tol)?;
    Ok((s_l.sharp(), b_l.sharp(), FactorizationRoute::Kernel))
}

fn left_side(
    s: &TransferFunction,
    tol: &Tolerances,
) -> Result<(TransferFunction, TransferFunction, FactorizationRoute)> {
    if let Some(sys) = s.colligation() {
        match kl_factorize_system(sys, FactorMode::Left, tol) {
            Ok(f) => {
                let b = invert_system(&f.blaschke_inverse, tol)?
                    .colligation
                    .ok_or_else(|| Error::Certification {
                        what: "left Blaschke factor is not conservative".into(),
                        residual: 0.0,
                    })?;
                return Ok((
                    TransferFunction::from_colligation(f.outer),
                    TransferFunction::from_colligation(b),
                    FactorizationRoute::System,
                ));
            }
            Err(e) if e.is_input_error() => {}
            Err(e) => return Err(e),
        }
    }
    let (s_l, b_l) = left_factorization_via_kernel(s, tol)?;
    Ok((s_l, b_l, FactorizationRoute::Kernel))
}

fn certify_side(
    side: FactorizationSide,
    route: FactorizationRoute,
    s: &TransferFunction,
    schur_part: &TransferFunction,
    blaschke: &TransferFunction,
    kappa: usize,
    tol: &Tolerances,
) -> Result<SideReport> {
    let degree = blaschke.realization().minimal(tol).state_dim();
    let negative_squares = negative_squares_estimate(schur_part, tol)?.kernel_estimate;
    let boundary = boundary_behavior(schur_part, tol)?;
    let blaschke_bi_inner = boundary_behavior(blaschke, tol)?.bi_inner;
    let reconstruction_error = reconstruction_error(side, s, schur_part, blaschke, tol)?;
    let margin = coprime_margin(side, schur_part, blaschke, tol)?;
    let report = SideReport {
        side,
        route,
        degree,
        reconstruction_error,
        negative_squares,
        max_boundary_sigma: boundary.max_sigma,
        blaschke_bi_inner,
        coprime_min_singular_value: margin,
        coprime: margin > tol.metric_tol,
    };
    let scale = s.realization().d().norm().max(1.0);
    let failures = [
        (
            degree != kappa,
            "Blaschke degree differs from the pole multiplicity",
        ),
        (
            negative_squares != Some(0),
            "factor is not in the Schur class",
        ),
        (
            !boundary.contractive,
            "factor is not contractive on the circle",
        ),
        (!blaschke_bi_inner, "Blaschke factor is not bi-inner"),
        (!report.coprime, "factors have a common zero"),
        (
            reconstruction_error > RECONSTRUCTION_LIMIT * scale,
            "reconstruction error",
        ),
    ];
    if let Some((_, what)) = failures.iter().find(|(bad, _)| *bad) {
        return Err(Error::Certification {
            what: format!("{side:?} factorization: {what}"),
            residual: reconstruction_error,
        });
    }
    Ok(report)
}

/// Right and left Kreĭn–Langer factorizations S = S_r B_r⁻¹ = B_l⁻¹ S_l.
///
/// Each side first tries the system-level factorization of the backing
/// colligation; when its hypotheses fail, it falls back to the construction
/// from the pole data (the right side through the sharp transform). Every
/// side is certified: Schur-class factor, bi-inner Blaschke factor of degree
/// equal to the pole multiplicity, no common zeros, and reconstruction at
/// interior samples.
pub fn kl_factorize_function(
    s: &TransferFunction,
    tol: &Tolerances,
) -> Result<FactorizationResult> {
    let kappa = s.pole_multiplicity(tol)?;
    let (s_r, b_r, right_route) = right_side(s, tol)?;
    let (s_l, b_l, left_route) = left_side(s, tol)?;
    let right = certify_side(
        FactorizationSide::Right,
        right_route,
        s,
        &s_r,
        &b_r,
        kappa,
        tol,
    )?;
    let left = certify_side(
        FactorizationSide::Left,
        left_route,
        s,
        &s_l,
        &b_l,
        kappa,
        tol,
    )?;
    Ok(FactorizationResult {
        s_r,
        b_r,
        s_l,
        b_l,
        degree: kappa,
        right,
        left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{cx, real_matrix};
    use crate::products::cascade;
    use crate::schur::blaschke_potapov_factor;

    fn b(alpha: f64) -> Colligation {
        blaschke_potapov_factor(
            cx(alpha, 0.0),
            cx(1.0, 0.0),
            &real_matrix(1, 1, &[1.0]),
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn stein_solution() {
        let a = real_matrix(2, 2, &[2.0, 1.0, 0.0, -3.0]);
        let q = real_matrix(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        let p = stein(&a, &q).unwrap();
        assert!(spectral_norm(&(a.adjoint() * &p * &a - &p - q)) < 1e-12);
    }

    #[test]
    fn schur_class_input_has_trivial_factors() {
        let tol = Tolerances::default();
        let f = kl_factorize_function(&TransferFunction::from_colligation(b(0.5)), &tol).unwrap();
        assert_eq!(f.degree, 0);
        assert_eq!(f.b_r.realization().state_dim(), 0);
        assert_eq!(f.b_l.realization().state_dim(), 0);
    }

    #[test]
    fn mixed_cascade_round_trip_by_both_routes() {
        let tol = Tolerances::default();
        let inv = invert_system(&b(0.5), &tol).unwrap().colligation.unwrap();
        let sys = cascade(&inv, &b(-0.3)).unwrap();
        let f =
            kl_factorize_function(&TransferFunction::from_colligation(sys.clone()), &tol).unwrap();
        assert_eq!(f.degree, 1);
        assert_eq!(f.right.route, FactorizationRoute::System);
        assert!(f.right.reconstruction_error < 1e-7 && f.left.reconstruction_error < 1e-7);

        let bare = TransferFunction::from_bare(sys.into_bare());
        let g = kl_factorize_function(&bare, &tol).unwrap();
        assert_eq!(g.right.route, FactorizationRoute::Kernel);
        assert_eq!(g.left.route, FactorizationRoute::Kernel);
        // Both routes agree up to a unimodular constant.
        for z in disc_points(8, 3) {
            let x = f.b_l.evaluate(z, &tol).unwrap()[(0, 0)];
            let y = g.b_l.evaluate(z, &tol).unwrap()[(0, 0)];
            assert!(((x / y).norm() - 1.0).abs() < 1e-9);
        }
    }
}
