//! Eigenvalue solvers: cyclic Jacobi for Hermitian matrices, Hessenberg
//! reduction with shifted QR for the complex Schur form, and Schur
//! reordering for invariant subspaces.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{identity, ComplexMatrix, ZERO};

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Hermitian eigensolve by cyclic Jacobi rotations. The input is symmetrized
/// before iterating.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::dims(
            "eig_hermitian",
            "square",
            format!("{}x{}", n, h.ncols()),
        ));
    }
    let mut a = (h + h.adjoint()) * Complex64::from(0.5);
    let mut v = identity(n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            return Ok(sorted(a, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotation R with R_pp = c, R_pq = s, R_qp = -s·conj(phase), R_qq = c·conj(phase).
                let r_pp = Complex64::from(c);
                let r_pq = Complex64::from(s);
                let r_qp = -phase.conj() * s;
                let r_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * r_pp + akq * r_qp;
                    a[(k, q)] = akp * r_pq + akq * r_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = r_pp.conj() * apk + r_qp.conj() * aqk;
                    a[(q, k)] = r_pq.conj() * apk + r_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::from(a[(p, p)].re);
                a[(q, q)] = Complex64::from(a[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * r_pp + vkq * r_qp;
                    v[(k, q)] = vkp * r_pq + vkq * r_qq;
                }
            }
        }
    }
    Err(Error::NoConvergence("Jacobi sweeps exhausted".into()))
}

fn sorted(a: ComplexMatrix, v: ComplexMatrix) -> HermitianEigen {
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// Complex Schur form A = Q T Qᴴ with T upper triangular and Q unitary.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Plane rotation G = [[c, s], [-conj(s), c]] with G·[x; y] = [r; 0].
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn zeroing(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let r = ax.hypot(y.norm());
        if r == 0.0 {
            return Givens { c: 1.0, s: ZERO };
        }
        if ax == 0.0 {
            return Givens {
                c: 0.0,
                s: Complex64::from(1.0) * (y.conj() / y.norm()),
            };
        }
        Givens {
            c: ax / r,
            s: (x / ax) * y.conj() / r,
        }
    }

    /// Rows i, j ← G·[row i; row j] over columns `cols`.
    fn rows(&self, m: &mut ComplexMatrix, i: usize, j: usize, cols: std::ops::Range<usize>) {
        for k in cols {
            let a = m[(i, k)];
            let b = m[(j, k)];
            m[(i, k)] = a * self.c + self.s * b;
            m[(j, k)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// Columns i, j ← [col i, col j]·Gᴴ over rows `rows`.
    fn cols(&self, m: &mut ComplexMatrix, i: usize, j: usize, rows: std::ops::Range<usize>) {
        for k in rows {
            let a = m[(k, i)];
            let b = m[(k, j)];
            m[(k, i)] = a * self.c + b * self.s.conj();
            m[(k, j)] = -a * self.s + b * self.c;
        }
    }
}

fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = identity(n);
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let x: Vec<Complex64> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            Complex64::from(1.0)
        } else {
            x[0] / x[0].norm()
        };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I − 2vvᴴ) H (I − 2vvᴴ) on the trailing block.
        for j in 0..n {
            let mut dot = ZERO;
            for i in 0..len {
                dot += v[i].conj() * h[(k + 1 + i, j)];
            }
            for i in 0..len {
                h[(k + 1 + i, j)] -= v[i] * dot * 2.0;
            }
        }
        for i in 0..n {
            let mut dot = ZERO;
            for l in 0..len {
                dot += h[(i, k + 1 + l)] * v[l];
            }
            for l in 0..len {
                h[(i, k + 1 + l)] -= dot * v[l].conj() * 2.0;
            }
            let mut dq = ZERO;
            for l in 0..len {
                dq += q[(i, k + 1 + l)] * v[l];
            }
            for l in 0..len {
                q[(i, k + 1 + l)] -= dq * v[l].conj() * 2.0;
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // Eigenvalue of [[a, b], [c, d]] closer to d.
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition by Hessenberg reduction and single-shift QR.
pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::dims(
            "schur",
            "square",
            format!("{}x{}", n, a.ncols()),
        ));
    }
    let (mut h, mut q) = hessenberg(a);
    if n <= 1 {
        return Ok(Schur { q, t: h });
    }
    let eps = f64::EPSILON;
    let norm = h.norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let bound = if diag == 0.0 { eps * norm } else { eps * diag };
            if sub <= bound {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(Error::NoConvergence("Schur QR iteration".into()));
        }
        let shift = if iter.is_multiple_of(11) {
            h[(hi, hi)] + Complex64::from(h[(hi, hi - 1)].norm() * 0.75)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        let mut x = h[(l, l)] - shift;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let g = Givens::zeroing(x, y);
            let start = if k > l { k - 1 } else { l };
            g.rows(&mut h, k, k + 1, start..n);
            let end = (k + 3).min(hi + 1);
            g.cols(&mut h, k, k + 1, 0..end);
            g.cols(&mut q, k, k + 1, 0..n);
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { q, t: h })
}

pub fn eig_general(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    Ok(schur(a)?.eigenvalues())
}

/// Swaps the adjacent diagonal entries k, k+1 of a Schur form in place.
fn swap_adjacent(s: &mut Schur, k: usize) {
    let n = s.t.nrows();
    let t11 = s.t[(k, k)];
    let t22 = s.t[(k + 1, k + 1)];
    let g = Givens::zeroing(s.t[(k, k + 1)], t22 - t11);
    g.rows(&mut s.t, k, k + 1, k..n);
    g.cols(&mut s.t, k, k + 1, 0..(k + 2));
    g.cols(&mut s.q, k, k + 1, 0..n);
    s.t[(k + 1, k)] = ZERO;
    s.t[(k, k)] = t22;
    s.t[(k + 1, k + 1)] = t11;
}

/// Reorders a Schur form so that the selected eigenvalues lead the diagonal.
/// Returns the number of selected eigenvalues.
pub fn reorder_schur(s: &mut Schur, select: impl Fn(Complex64) -> bool) -> usize {
    let n = s.t.nrows();
    let mut next = 0;
    for j in 0..n {
        if select(s.t[(j, j)]) {
            let mut k = j;
            while k > next {
                swap_adjacent(s, k - 1);
                k -= 1;
            }
            next += 1;
        }
    }
    next
}

/// Orthonormal basis of the invariant subspace belonging to the selected
/// eigenvalues, with the restricted upper-triangular block.
pub fn invariant_subspace(
    a: &ComplexMatrix,
    select: impl Fn(Complex64) -> bool,
) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    let mut s = schur(a)?;
    let k = reorder_schur(&mut s, select);
    let basis = s.q.columns(0, k).into_owned();
    let values = (0..k).map(|i| s.t[(i, i)]).collect();
    Ok((basis, values))
}

pub fn spectral_radius(a: &ComplexMatrix) -> Result<f64> {
    Ok(eig_general(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
