//! Dense complex matrix helpers: construction, rank-revealing factorizations,
//! block assembly, and subspace comparisons.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a complex matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols, "real_matrix: data length");
    ComplexMatrix::from_fn(rows, cols, |i, j| cx(data[i * cols + j], 0.0))
}

/// Builds a matrix from rows, rejecting ragged rows and non-finite entries.
pub fn from_rows(rows: &[Vec<Complex64>], cols: usize) -> Result<ComplexMatrix> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::dims(&format!("row {i}"), cols, row.len()));
        }
    }
    let m = ComplexMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    check_finite(&m, "matrix")?;
    Ok(m)
}

pub fn check_finite(m: &ComplexMatrix, context: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context.to_string()))
    }
}

pub fn check_shape(m: &ComplexMatrix, rows: usize, cols: usize, context: &str) -> Result<()> {
    if m.nrows() == rows && m.ncols() == cols {
        Ok(())
    } else {
        Err(Error::dims(
            context,
            format!("{rows}x{cols}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ))
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Singular value decomposition with singular values sorted in decreasing
/// order. `v` is square (cols × cols) so that null spaces are available.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            u: zeros(r, 0),
            s: Vec::new(),
            v: identity(c),
        };
    }
    // Pad wide matrices with zero rows so the factorization yields a
    // complete right singular basis.
    let mut w = zeros(r.max(c), c);
    w.view_mut((0, 0), (r, c)).copy_from(m);
    let mut v = identity(c);
    one_sided_jacobi(&mut w, &mut v);
    let norms: Vec<f64> = (0..c).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| {
        norms[b]
            .partial_cmp(&norms[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let k = r.min(c);
    let mut u = zeros(r, k);
    let mut v_sorted = zeros(c, c);
    for (dst, &src) in order.iter().enumerate() {
        if dst < k && norms[src] > 0.0 {
            let col = w.column(src).rows(0, r) / Complex64::from(norms[src]);
            u.set_column(dst, &col);
        }
        v_sorted.set_column(dst, &v.column(src));
    }
    let s = order.iter().take(k).map(|&i| norms[i]).collect();
    Svd { u, s, v: v_sorted }
}

/// Hestenes one-sided Jacobi: rotates pairs of columns of `w` until they are
/// mutually orthogonal, accumulating the rotations in `v`.
fn one_sided_jacobi(w: &mut ComplexMatrix, v: &mut ComplexMatrix) {
    let c = w.ncols();
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut *w, &mut *v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = xp * cs - xq * sn;
                        mat[(i, q)] = xp * sn + xq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    svd(m).s
}

pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Cutoff below which a singular value counts as zero.
pub fn rank_cutoff(s: &[f64], rank_tol: f64) -> f64 {
    rank_tol * s.first().copied().unwrap_or(0.0).max(1.0)
}

pub fn numerical_rank(m: &ComplexMatrix, rank_tol: f64) -> usize {
    let s = singular_values(m);
    let cut = rank_cutoff(&s, rank_tol);
    s.iter().filter(|&&x| x > cut).count()
}

/// Orthonormal basis of the column span.
pub fn orth(m: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let d = svd(m);
    let cut = rank_cutoff(&d.s, rank_tol);
    let r = d.s.iter().filter(|&&x| x > cut).count();
    d.u.columns(0, r).into_owned()
}

/// Orthonormal basis of the kernel.
pub fn null_space(m: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let d = svd(m);
    let cut = rank_cutoff(&d.s, rank_tol);
    let r = d.s.iter().filter(|&&x| x > cut).count();
    let c = m.ncols();
    d.v.columns(r, c - r).into_owned()
}

/// Orthonormal basis of the Euclidean orthogonal complement of the span of
/// the orthonormal columns `q`.
pub fn orth_complement(q: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    null_space(&q.adjoint(), rank_tol)
}

/// Moore–Penrose pseudo-inverse with the shared rank cutoff.
pub fn pinv(m: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let d = svd(m);
    let cut = rank_cutoff(&d.s, rank_tol);
    let mut out = zeros(m.ncols(), m.nrows());
    for (k, &sk) in d.s.iter().enumerate() {
        if sk <= cut {
            break;
        }
        let vk = d.v.column(k);
        let uk = d.u.column(k);
        out += (vk * uk.adjoint()) * Complex64::from(1.0 / sk);
    }
    out
}

/// Inverse together with a 1-norm condition number.
pub fn inverse_with_condition(m: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::dims(
            "inverse",
            "square",
            format!("{}x{}", n, m.ncols()),
        ));
    }
    if n == 0 {
        return Ok((zeros(0, 0), 1.0));
    }
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("LU pivot vanished".into()))?;
    if !inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Singular("inverse overflowed".into()));
    }
    let cond = norm_one(m) * norm_one(&inv);
    Ok((inv, cond))
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    inverse_with_condition(m).map(|(inv, _)| inv)
}

pub fn norm_one(m: &ComplexMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `a x = b` by LU.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::dims("solve", a.nrows(), b.nrows()));
    }
    if a.nrows() == 0 {
        return Ok(zeros(a.ncols(), b.ncols()));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("linear solve".into()))
}

/// Least-squares solution of `a x = b` via the pseudo-inverse.
pub fn lstsq(a: &ComplexMatrix, b: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    pinv(a, rank_tol) * b
}

pub fn hstack(rows: usize, blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack: row count");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn vstack(cols: usize, blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: column count");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

/// Assembles [[a, b], [c, d]].
pub fn block2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> ComplexMatrix {
    let top = hstack(a.nrows(), &[a, b]);
    let bottom = hstack(c.nrows(), &[c, d]);
    vstack(top.ncols(), &[&top, &bottom])
}

pub fn block_diag(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Permutation matrix `P` with `(P x)[i] = x[perm[i]]`.
pub fn permutation_matrix(perm: &[usize]) -> ComplexMatrix {
    let n = perm.len();
    let mut p = zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        p[(i, j)] = ONE;
    }
    p
}

/// Sine of the largest principal angle between two column spans, or 1 when
/// the dimensions differ. Inputs need not be orthonormal.
pub fn subspace_distance(a: &ComplexMatrix, b: &ComplexMatrix, rank_tol: f64) -> f64 {
    let qa = orth(a, rank_tol);
    let qb = orth(b, rank_tol);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = &qb - &qa * (qa.adjoint() * &qb);
    spectral_norm(&resid).min(1.0)
}

/// Relative asymmetry ‖H − Hᴴ‖ / max(1, ‖H‖).
pub fn hermitian_defect(h: &ComplexMatrix) -> f64 {
    let diff = h - h.adjoint();
    diff.norm() / h.norm().max(1.0)
}

pub fn hermitian_part(h: &ComplexMatrix) -> ComplexMatrix {
    (h + h.adjoint()) * Complex64::from(0.5)
}

/// Relative difference ‖a − b‖ / max(1, ‖b‖) in the spectral norm.
pub fn relative_error(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    spectral_norm(&(a - b)) / spectral_norm(b).max(1.0)
}

/// Intersection of two column spans, returned as an orthonormal basis.
pub fn intersection(a: &ComplexMatrix, b: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let n = a.nrows();
    let qa = orth(a, rank_tol);
    let qb = orth(b, rank_tol);
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return zeros(n, 0);
    }
    let stacked = hstack(n, &[&qa, &(-&qb)]);
    let kernel = null_space(&stacked, rank_tol);
    let coeffs = kernel.rows(0, qa.ncols()).into_owned();
    orth(&(&qa * coeffs), rank_tol)
}

/// Column span sum, returned as an orthonormal basis.
pub fn span_sum(a: &ComplexMatrix, b: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    orth(&hstack(a.nrows(), &[a, b]), rank_tol)
}

/// Integer power of a square matrix.
pub fn matrix_power(a: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut out = identity(a.nrows());
    for _ in 0..k {
        out = &out * a;
    }
    out
}
