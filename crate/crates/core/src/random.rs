//! Seeded generators of J-unitary operators, J-contractions, passive and
//! conservative systems, and Blaschke products.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::colligation::Colligation;
use crate::error::{Error, Result};
use crate::indefinite::{SignatureSpace, Tolerances};
use crate::matrix::{block_diag, identity, permutation_matrix, ComplexMatrix};
use crate::schur::{blaschke_potapov_factor, blaschke_product, invert_system};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent entries uniform in the square [-1, 1]².
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        let v = random_matrix(n, 1, rng);
        let norm = v.norm();
        if norm > 1e-3 {
            return v / Complex64::from(norm);
        }
    }
}

pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let qr = (random_matrix(n, n, rng) + identity(n) * Complex64::from(0.5)).qr();
    qr.q()
}

/// Hilbert-space contraction with singular values in [0, max_sigma].
pub fn random_contraction(
    rows: usize,
    cols: usize,
    max_sigma: f64,
    rng: &mut impl Rng,
) -> ComplexMatrix {
    let (u, v) = (random_unitary(rows, rng), random_unitary(cols, rng));
    let mut s = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows.min(cols) {
        s[(i, i)] = Complex64::from(rng.random_range(0.0..max_sigma));
    }
    u * s * v.adjoint()
}

/// J-unitary operator on a canonical space: unitary mixing inside each sign
/// class combined with hyperbolic rotations between the classes.
pub fn random_j_unitary(
    space: &SignatureSpace,
    max_boost: f64,
    rng: &mut impl Rng,
) -> ComplexMatrix {
    let (p, q) = (space.pos(), space.neg());
    let mut u = block_diag(&[&random_unitary(p, rng), &random_unitary(q, rng)]);
    if p > 0 && q > 0 {
        for _ in 0..p.min(q) {
            let (i, j) = (rng.random_range(0..p), p + rng.random_range(0..q));
            let t: f64 = rng.random_range(-max_boost..max_boost);
            let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let mut h = identity(p + q);
            h[(i, i)] = Complex64::from(t.cosh());
            h[(j, j)] = Complex64::from(t.cosh());
            h[(i, j)] = phase * t.sinh();
            h[(j, i)] = phase.conj() * t.sinh();
            u = h * u;
        }
    }
    block_diag(&[&random_unitary(p, rng), &random_unitary(q, rng)]) * u
}

/// Map from a possibly interleaved signature space to its canonical form.
fn to_canonical(space: &SignatureSpace) -> ComplexMatrix {
    permutation_matrix(&space.canonical_order())
}

/// J-contraction between spaces with equal negative index: a J-unitary
/// change of coordinates on both sides around a block-diagonal core that
/// contracts the positive part (singular values ≤ max_sigma) and expands
/// the negative part (singular values ≥ 1/max_sigma).
pub fn random_j_contraction(
    dom: &SignatureSpace,
    cod: &SignatureSpace,
    max_sigma: f64,
    max_boost: f64,
    rng: &mut impl Rng,
) -> Result<ComplexMatrix> {
    if dom.neg() != cod.neg() {
        return Err(Error::InvalidParameter(format!(
            "negative indices differ: {} and {}",
            dom.neg(),
            cod.neg()
        )));
    }
    let (dc, cc) = (dom.canonical(), cod.canonical());
    let k = dom.neg();
    let plus = random_contraction(cc.pos(), dc.pos(), max_sigma, rng);
    let (u, v) = (random_unitary(k, rng), random_unitary(k, rng));
    let mut s = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        s[(i, i)] = Complex64::from(rng.random_range(1.0..1.5) / max_sigma);
    }
    let minus = u * s * v.adjoint();
    let core = block_diag(&[&plus, &minus]);
    let t = random_j_unitary(&cc, max_boost, rng) * core * random_j_unitary(&dc, max_boost, rng);
    Ok(to_canonical(cod).transpose() * t * to_canonical(dom))
}

/// Passive system with state signature (pos, neg) whose system operator is a
/// J-contraction with the given margin.
pub fn random_passive_system(
    pos: usize,
    neg: usize,
    input_dim: usize,
    output_dim: usize,
    max_sigma: f64,
    rng: &mut impl Rng,
) -> Result<Colligation> {
    let state = SignatureSpace::new(pos, neg);
    let dom = state.direct_sum(&SignatureSpace::hilbert(input_dim));
    let cod = state.direct_sum(&SignatureSpace::hilbert(output_dim));
    let t = random_j_contraction(&dom, &cod, max_sigma, 0.5, rng)?;
    Colligation::from_system_operator(&t, state, input_dim, output_dim)
}

/// Conservative system with state signature (pos, neg): its system operator
/// is J-unitary.
pub fn random_conservative_system(
    pos: usize,
    neg: usize,
    dim: usize,
    rng: &mut impl Rng,
) -> Result<Colligation> {
    let state = SignatureSpace::new(pos, neg);
    let dom = state.direct_sum(&SignatureSpace::hilbert(dim));
    let p = to_canonical(&dom);
    let u = random_j_unitary(&dom.canonical(), 0.5, rng);
    Colligation::from_system_operator(&(p.transpose() * u * &p), state, dim, dim)
}

/// Zeros α in the annulus 0.2 ≤ |α| ≤ 0.8, pairwise at least `separation`
/// apart.
pub fn separated_zeros(count: usize, separation: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(count);
    while out.len() < count {
        let z = Complex64::from_polar(
            rng.random_range(0.2..0.8),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        if out.iter().all(|w| (w - z).norm() >= separation) {
            out.push(z);
        }
    }
    out
}

/// Blaschke–Potapov product of the given degree on ℂ^dim with random
/// directions and unimodular constants. Degree zero gives a unitary constant.
pub fn random_blaschke_product(
    zeros: &[Complex64],
    dim: usize,
    rng: &mut impl Rng,
    tol: &Tolerances,
) -> Result<Colligation> {
    if zeros.is_empty() {
        return Ok(Colligation::static_gain(random_unitary(dim, rng)));
    }
    let factors = zeros
        .iter()
        .map(|&alpha| {
            let rho = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            blaschke_potapov_factor(alpha, rho, &random_unit_vector(dim, rng), tol)
        })
        .collect::<Result<Vec<_>>>()?;
    blaschke_product(&factors)
}

/// Conservative anti-Hilbert-state realization of the inverse of a random
/// Blaschke product with the given zeros.
pub fn random_inverse_blaschke(
    zeros: &[Complex64],
    dim: usize,
    rng: &mut impl Rng,
    tol: &Tolerances,
) -> Result<Colligation> {
    let b = random_blaschke_product(zeros, dim, rng, tol)?;
    invert_system(&b, tol)?
        .colligation
        .ok_or_else(|| Error::Certification {
            what: "inverse of a Blaschke product is not conservative".into(),
            residual: 0.0,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::SystemMetric;
    use crate::indefinite::metric_classify;
    use crate::matrix::spectral_norm;

    #[test]
    fn j_unitary_preserves_the_metric() {
        let mut r = rng(1);
        let sp = SignatureSpace::new(3, 2);
        let u = random_j_unitary(&sp, 1.0, &mut r);
        let j = sp.metric();
        assert!(spectral_norm(&(u.adjoint() * &j * &u - j)) < 1e-12);
    }

    #[test]
    fn generated_operators_have_their_metric_class() {
        let tol = Tolerances::default();
        let mut r = rng(2);
        let dom = SignatureSpace::new(2, 1).direct_sum(&SignatureSpace::hilbert(2));
        let cod = SignatureSpace::new(2, 1).direct_sum(&SignatureSpace::hilbert(1));
        let t = random_j_contraction(&dom, &cod, 0.9, 0.5, &mut r).unwrap();
        assert!(metric_classify(&t, &dom, &cod, &tol).unwrap().contraction);
        let s = random_passive_system(2, 1, 2, 1, 0.9, &mut r).unwrap();
        assert!(s.classify(&tol).unwrap().metric.is_passive());
        let c = random_conservative_system(2, 1, 2, &mut r).unwrap();
        assert_eq!(c.classify(&tol).unwrap().metric, SystemMetric::Conservative);
    }

    #[test]
    fn blaschke_generators() {
        let tol = Tolerances::default();
        let mut r = rng(3);
        let zeros = separated_zeros(3, 0.1, &mut r);
        let b = random_blaschke_product(&zeros, 2, &mut r, &tol).unwrap();
        assert_eq!(b.state_dim(), 3);
        let inv = random_inverse_blaschke(&zeros[..2], 2, &mut r, &tol).unwrap();
        assert_eq!(inv.kappa(), 2);
    }
}
