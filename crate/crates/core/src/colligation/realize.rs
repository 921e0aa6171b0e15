use num_complex::Complex64;

use super::BareRealization;
use crate::error::{Error, Result};
use crate::indefinite::Tolerances;
use crate::matrix::{numerical_rank, pinv, spectral_norm, svd, zeros, ComplexMatrix};

fn hankel(coeffs: &[ComplexMatrix], rows: usize, cols: usize, shift: usize) -> ComplexMatrix {
    let (p, m) = coeffs[0].shape();
    let mut h = zeros(rows * p, cols * m);
    for i in 0..rows {
        for j in 0..cols {
            h.view_mut((i * p, j * m), (p, m))
                .copy_from(&coeffs[i + j + 1 + shift]);
        }
    }
    h
}

/// Minimal metric-free realization of a function from its Taylor
/// coefficients at the origin (Ho–Kalman), given an a-priori order bound.
///
/// Needs at least `2·order_bound + 2` coefficients. The Hankel rank must be
/// the same on the square and the enlarged windows; otherwise the order is
/// ambiguous and an error is returned.
pub fn realize_from_taylor(
    coeffs: &[ComplexMatrix],
    order_bound: usize,
    tol: &Tolerances,
) -> Result<BareRealization> {
    let n = order_bound;
    if coeffs.len() < 2 * n + 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} coefficients for order bound {n}, got {}",
            2 * n + 2,
            coeffs.len()
        )));
    }
    let (p, m) = coeffs[0].shape();
    for (k, h) in coeffs.iter().enumerate() {
        if h.shape() != (p, m) {
            return Err(Error::dims(
                &format!("coefficient {k}"),
                format!("{p}x{m}"),
                format!("{}x{}", h.nrows(), h.ncols()),
            ));
        }
        crate::matrix::check_finite(h, "Taylor coefficient")?;
    }
    let d = coeffs[0].clone();
    if n == 0 {
        let r = BareRealization::static_gain(d);
        return verify(r, coeffs, tol);
    }
    let square = hankel(coeffs, n, n, 0);
    let tall = hankel(coeffs, n + 1, n, 0);
    let wide = hankel(coeffs, n, n + 1, 0);
    let r_square = numerical_rank(&square, tol.rank_tol);
    let r_tall = numerical_rank(&tall, tol.rank_tol);
    let r_wide = numerical_rank(&wide, tol.rank_tol);
    if r_square != r_tall || r_square != r_wide {
        return Err(Error::OrderAmbiguity(format!(
            "Hankel ranks {r_square}, {r_tall}, {r_wide} on windows of {n} and {} blocks",
            n + 1
        )));
    }
    let r = r_square;
    if r == 0 {
        return verify(BareRealization::static_gain(d), coeffs, tol);
    }
    let shifted = hankel(coeffs, n + 1, n, 1);
    let dec = svd(&tall);
    let mut obs = zeros(tall.nrows(), r);
    let mut ctrl = zeros(r, tall.ncols());
    for k in 0..r {
        let s = Complex64::from(dec.s[k].sqrt());
        obs.set_column(k, &(dec.u.column(k) * s));
        ctrl.set_row(k, &(dec.v.column(k).adjoint() * s));
    }
    let a = pinv(&obs, tol.rank_tol) * shifted * pinv(&ctrl, tol.rank_tol);
    let b = ctrl.columns(0, m).into_owned();
    let c = obs.rows(0, p).into_owned();
    verify(BareRealization::new(a, b, c, d)?, coeffs, tol)
}

fn verify(
    r: BareRealization,
    coeffs: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<BareRealization> {
    let scale = coeffs.iter().map(spectral_norm).fold(1.0, f64::max);
    for (k, h) in coeffs.iter().enumerate() {
        let err = spectral_norm(&(r.markov(k) - h));
        if err > tol.metric_tol * scale {
            return Err(Error::OrderAmbiguity(format!(
                "realized coefficient {k} misses the data by {err:.2e}"
            )));
        }
    }
    Ok(r)
}
