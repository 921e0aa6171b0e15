use num_complex::Complex64;
use serde::Serialize;

use super::{boundary_behavior, TransferFunction};
use crate::colligation::BareRealization;
use crate::eigen::eig_general;
use crate::error::{Error, Result};
use crate::indefinite::Tolerances;
use crate::matrix::{block2, identity, ComplexMatrix};
use crate::sampling::boundary_points;

/// Scalar rational function with coefficient lists in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarRational {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::from(0.0), |acc, &x| acc * z + x)
}

impl ScalarRational {
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        horner(&self.numerator, z) / horner(&self.denominator, z)
    }

    /// f^#(z) = conj(f(z̄)): conjugated coefficients.
    pub fn sharp(&self) -> ScalarRational {
        ScalarRational {
            numerator: self.numerator.iter().map(|c| c.conj()).collect(),
            denominator: self.denominator.iter().map(|c| c.conj()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectResult {
    pub scalar: bool,
    /// The right defect function vanishes identically.
    pub phi_zero: bool,
    /// The left defect function vanishes identically.
    pub psi_zero: bool,
    pub phi: Option<ScalarRational>,
    pub psi: Option<ScalarRational>,
    /// Largest | |φ(ζ)|² − (1 − |S(ζ)|²) | over the boundary samples.
    pub max_boundary_residual: f64,
    /// Smallest modulus of the zeros of the numerator and denominator of φ.
    pub min_root_modulus: f64,
    pub note: String,
}

/// Ascending coefficients of a polynomial of degree ≤ `deg` from its values
/// at the roots of unity of order deg + 1.
fn interpolate(deg: usize, f: impl Fn(Complex64) -> Result<Complex64>) -> Result<Vec<Complex64>> {
    let l = deg + 1;
    let pts: Vec<Complex64> = (0..l)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / l as f64))
        .collect();
    let vals = pts.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    Ok((0..l)
        .map(|k| {
            vals.iter()
                .zip(&pts)
                .map(|(v, z)| v * z.powi(-(k as i32)))
                .sum::<Complex64>()
                / l as f64
        })
        .collect())
}

/// det(I − zA) and det [[I − zA, zB], [−C, D]] = S(z)·det(I − zA).
fn numerator_denominator(r: &BareRealization) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = r.state_dim();
    let den = interpolate(n, |z| Ok((identity(n) - r.a() * z).determinant()))?;
    let num = interpolate(n, |z| {
        let m = block2(&(identity(n) - r.a() * z), &(r.b() * z), &(-r.c()), r.d());
        Ok(m.determinant())
    })?;
    Ok((num, den))
}

/// Laurent coefficients r_{-n..=n} of |P(ζ)|² on the circle.
fn modulus_squared(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() as isize - 1;
    (-n..=n)
        .map(|k| {
            (0..=n)
                .filter(|&j| j + k >= 0 && j + k <= n)
                .map(|j| p[(j + k) as usize] * p[j as usize].conj())
                .sum()
        })
        .collect()
}

fn poly_roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let mut comp = ComplexMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::from(1.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    eig_general(&comp)
}

/// Outer polynomial F of degree ≤ n with |F(ζ)|² equal to the nonnegative
/// trigonometric polynomial with Laurent coefficients `r` (index k + n).
/// Returns the ascending coefficients of F and the modulus of its smallest
/// root.
fn fejer_riesz(r: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let n = (r.len() - 1) / 2;
    let scale = r.iter().map(|c| c.norm()).fold(0.0, f64::max);
    // Trim vanishing outer coefficients.
    let d = (0..=n)
        .rev()
        .find(|&k| r[n + k].norm() > 1e-13 * scale)
        .unwrap_or(0);
    let trimmed = &r[n - d..=n + d];
    let roots = poly_roots(trimmed)?;
    let mut roots: Vec<Complex64> = roots;
    roots.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let chosen = &roots[..d];
    let mut f = vec![Complex64::from(1.0)];
    for &w in chosen {
        let mut next = vec![Complex64::from(0.0); f.len() + 1];
        for (i, &c) in f.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * w;
        }
        f = next;
    }
    // Normalize at the point of the circle where the target is largest.
    let target = |z: Complex64| -> f64 {
        trimmed
            .iter()
            .enumerate()
            .map(|(i, c)| c * z.powi(i as i32 - d as i32))
            .sum::<Complex64>()
            .re
    };
    let (_, z0) = (0..64)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / 64.0))
        .map(|z| (target(z), z))
        .fold((f64::NEG_INFINITY, Complex64::from(1.0)), |best, cur| {
            if cur.0 > best.0 {
                cur
            } else {
                best
            }
        });
    let c = (target(z0).max(0.0)).sqrt() / horner(&f, z0).norm();
    let f: Vec<Complex64> = f.into_iter().map(|x| x * c).collect();
    let min_root = chosen
        .iter()
        .map(|w| w.norm())
        .fold(f64::INFINITY, f64::min);
    Ok((f, min_root))
}

fn scalar_defect(s: &TransferFunction, tol: &Tolerances) -> Result<(ScalarRational, f64)> {
    let r = s.realization().minimal(tol);
    let (num, den) = numerator_denominator(&r)?;
    let q2 = modulus_squared(&den);
    let n2 = modulus_squared(&num);
    let diff: Vec<Complex64> = q2.iter().zip(&n2).map(|(a, b)| a - b).collect();
    let (f, root_f) = fejer_riesz(&diff)?;
    let (g, root_g) = fejer_riesz(&q2)?;
    Ok((
        ScalarRational {
            numerator: f,
            denominator: g,
        },
        root_f.min(root_g),
    ))
}

/// Right and left defect functions.
///
/// For any S the zero tests use the boundary defects I − SᴴS and I − SSᴴ on
/// the sample grid. For scalar S with a nonzero defect, the outer function
/// φ with |φ|² = 1 − |S|² on the circle is computed by Fejér–Riesz
/// factorization with root flipping, and ψ = (φ_{S^#})^#.
pub fn defect(s: &TransferFunction, tol: &Tolerances) -> Result<DefectResult> {
    let boundary = boundary_behavior(s, tol)?;
    let scalar = s.input_dim() == 1 && s.output_dim() == 1;
    let mut result = DefectResult {
        scalar,
        phi_zero: boundary.inner,
        psi_zero: boundary.co_inner,
        phi: None,
        psi: None,
        max_boundary_residual: 0.0,
        min_root_modulus: f64::INFINITY,
        note:
            "rational function: a boundary defect vanishing on the sample grid vanishes identically"
                .into(),
    };
    if !scalar {
        if !(result.phi_zero && result.psi_zero) {
            result
                .note
                .push_str("; outer factorization of matrix-valued defects is not computed");
        }
        return Ok(result);
    }
    if !result.phi_zero {
        let (phi, root_phi) = scalar_defect(s, tol)?;
        let (psi_sharp, root_psi) = scalar_defect(&s.sharp(), tol)?;
        let min_s = TransferFunction::from_bare(s.realization().minimal(tol));
        let mut worst: f64 = 0.0;
        for (_, z) in boundary_points(tol.boundary_samples, tol.seed) {
            let v = min_s.evaluate(z, tol)?[(0, 0)];
            worst = worst.max((phi.evaluate(z).norm_sqr() - (1.0 - v.norm_sqr())).abs());
        }
        if worst > tol.metric_tol {
            return Err(Error::Certification {
                what: "Fejér–Riesz factor does not reproduce the boundary defect".into(),
                residual: worst,
            });
        }
        result.max_boundary_residual = worst;
        result.min_root_modulus = root_phi.min(root_psi);
        result.phi = Some(phi);
        result.psi = Some(psi_sharp.sharp());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::Colligation;
    use crate::indefinite::SignatureSpace;
    use crate::matrix::{cx, real_matrix};
    use crate::schur::{blaschke_potapov_factor, invert_system};

    fn half_z() -> TransferFunction {
        TransferFunction::from_colligation(
            Colligation::new(
                SignatureSpace::hilbert(1),
                real_matrix(1, 1, &[0.0]),
                real_matrix(1, 1, &[1.0]),
                real_matrix(1, 1, &[0.5]),
                real_matrix(1, 1, &[0.0]),
            )
            .unwrap(),
        )
    }

    #[test]
    fn half_z_has_constant_defect() {
        let tol = Tolerances::default();
        let d = defect(&half_z(), &tol).unwrap();
        let phi = d.phi.unwrap();
        let r3 = 3.0_f64.sqrt() / 2.0;
        for z in [cx(0.0, 0.0), cx(0.5, 0.2), cx(-0.3, 0.7)] {
            assert!((phi.evaluate(z).norm() - r3).abs() < 1e-12);
        }
        assert!(d.max_boundary_residual < 1e-12);
    }

    #[test]
    fn inner_and_inverse_blaschke_have_zero_defect() {
        let tol = Tolerances::default();
        let b =
            blaschke_potapov_factor(cx(0.5, 0.0), cx(1.0, 0.0), &real_matrix(1, 1, &[1.0]), &tol)
                .unwrap();
        let d = defect(&TransferFunction::from_colligation(b.clone()), &tol).unwrap();
        assert!(d.phi_zero && d.psi_zero && d.phi.is_none());
        let inv = invert_system(&b, &tol).unwrap().colligation.unwrap();
        let d = defect(&TransferFunction::from_colligation(inv), &tol).unwrap();
        assert!(d.phi_zero && d.psi_zero);
    }

    #[test]
    fn nonconstant_defect_is_outer() {
        let tol = Tolerances::default();
        let s = Colligation::new(
            SignatureSpace::hilbert(1),
            real_matrix(1, 1, &[0.4]),
            real_matrix(1, 1, &[0.5]),
            real_matrix(1, 1, &[0.6]),
            real_matrix(1, 1, &[0.2]),
        )
        .unwrap();
        let d = defect(&TransferFunction::from_colligation(s), &tol).unwrap();
        assert!(!d.phi_zero);
        assert!(d.max_boundary_residual <= 1e-8);
        assert!(d.min_root_modulus >= 1.0 - 1e-6);
    }

    #[test]
    fn roots_of_quadratic() {
        let r = poly_roots(&[cx(2.0, 0.0), cx(-3.0, 0.0), cx(1.0, 0.0)]).unwrap();
        let mut v: Vec<f64> = r.iter().map(|z| z.re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
    }
}
