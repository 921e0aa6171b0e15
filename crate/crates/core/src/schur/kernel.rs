use num_complex::Complex64;
use serde::Serialize;

use super::TransferFunction;
use crate::error::{Error, Result};
use crate::indefinite::{inertia, Inertia, Tolerances};
use crate::matrix::{identity, ComplexMatrix};
use crate::sampling::{exclude_near, nested_disc_levels};

/// Sampled Schur kernel K(w, z) = (I − S(z)S(w)ᴴ)/(1 − z w̄).
#[derive(Debug, Clone)]
pub struct KernelGram {
    pub points: Vec<Complex64>,
    /// S at each sample point.
    pub values: Vec<ComplexMatrix>,
    /// Block (i, j) is K(w_j, w_i).
    pub gram: ComplexMatrix,
    pub inertia: Inertia,
}

/// Builds the kernel Gram matrix at the given interior points.
pub fn kernel_gram(
    s: &TransferFunction,
    points: &[Complex64],
    tol: &Tolerances,
) -> Result<KernelGram> {
    let poles = s.poles()?;
    for &w in points {
        if w.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sample point {w} is not in the open disc"
            )));
        }
        if let Some(&p) = poles
            .iter()
            .find(|p| (w - *p).norm() <= 10.0 * tol.rank_tol)
        {
            return Err(Error::PoleProximity { z: w, nearest: p });
        }
    }
    let values = points
        .iter()
        .map(|&w| s.evaluate(w, tol))
        .collect::<Result<Vec<_>>>()?;
    let gram = gram_from_values(points, &values);
    let inertia = inertia(&gram, tol)?;
    Ok(KernelGram {
        points: points.to_vec(),
        values,
        gram,
        inertia,
    })
}

pub(crate) fn gram_from_values(points: &[Complex64], values: &[ComplexMatrix]) -> ComplexMatrix {
    let p = values.first().map(|v| v.nrows()).unwrap_or(0);
    let n = points.len();
    let mut g = ComplexMatrix::zeros(n * p, n * p);
    let id = identity(p);
    for i in 0..n {
        for j in i..n {
            let denom = Complex64::from(1.0) - points[i] * points[j].conj();
            let block = (&id - &values[i] * values[j].adjoint()) / denom;
            g.view_mut((i * p, j * p), (p, p)).copy_from(&block);
            if i != j {
                g.view_mut((j * p, i * p), (p, p))
                    .copy_from(&block.adjoint());
            }
        }
    }
    for k in 0..n * p {
        g[(k, k)] = Complex64::from(g[(k, k)].re);
    }
    g
}

/// Kernel-based count of negative squares with the pole-multiplicity cross
/// check.
#[derive(Debug, Clone, Serialize)]
pub struct NegativeSquares {
    /// Stabilized negative eigenvalue count, or None when the count kept
    /// changing within the sampling budget.
    pub kernel_estimate: Option<usize>,
    /// Negative eigenvalue counts on the nested sample sets.
    pub history: Vec<usize>,
    /// Sample counts of the nested sets.
    pub sample_counts: Vec<usize>,
    /// Disc poles of a minimal realization, with multiplicity.
    pub pole_multiplicity: usize,
    pub agreement: bool,
}

const LEVELS: usize = 6;
const STABLE_RUN: usize = 4;
const MAX_GRAM_DIM: usize = 240;

/// Grows nested sample sets until the negative eigenvalue count of the kernel
/// Gram matrix is unchanged over three consecutive enlargements.
pub fn negative_squares_estimate(
    s: &TransferFunction,
    tol: &Tolerances,
) -> Result<NegativeSquares> {
    let poles = s.poles()?;
    let p = s.output_dim().max(1);
    let mut history = Vec::new();
    let mut sample_counts = Vec::new();
    let mut kernel_estimate = None;
    for level in nested_disc_levels(1, LEVELS, tol.seed) {
        let pts = exclude_near(level, &poles, 10.0 * tol.rank_tol);
        if pts.len() * p > MAX_GRAM_DIM && history.len() >= STABLE_RUN {
            break;
        }
        let g = kernel_gram(s, &pts, tol)?;
        history.push(g.inertia.minus);
        sample_counts.push(pts.len());
        let n = history.len();
        if n >= STABLE_RUN
            && history[n - STABLE_RUN..]
                .iter()
                .all(|&v| v == history[n - 1])
        {
            kernel_estimate = Some(history[n - 1]);
            break;
        }
    }
    let pole_multiplicity = s.pole_multiplicity(tol)?;
    Ok(NegativeSquares {
        agreement: kernel_estimate == Some(pole_multiplicity),
        kernel_estimate,
        history,
        sample_counts,
        pole_multiplicity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{cx, real_matrix};
    use crate::schur::{blaschke_potapov_factor, invert_system};

    fn b(alpha: f64) -> TransferFunction {
        let tol = Tolerances::default();
        TransferFunction::from_colligation(
            blaschke_potapov_factor(
                cx(alpha, 0.0),
                cx(1.0, 0.0),
                &real_matrix(1, 1, &[1.0]),
                &tol,
            )
            .unwrap(),
        )
    }

    #[test]
    fn single_point_values() {
        let tol = Tolerances::default();
        let g = kernel_gram(&b(0.5), &[cx(0.0, 0.0)], &tol).unwrap();
        assert!((g.gram[(0, 0)] - cx(0.75, 0.0)).norm() < 1e-15);
        assert_eq!(
            g.inertia,
            Inertia {
                plus: 1,
                zero: 0,
                minus: 0
            }
        );

        let sys = b(0.5).colligation().unwrap().clone();
        let inv = TransferFunction::from_colligation(
            invert_system(&sys, &tol).unwrap().colligation.unwrap(),
        );
        let g = kernel_gram(&inv, &[cx(0.0, 0.0)], &tol).unwrap();
        assert!((g.gram[(0, 0)] - cx(-3.0, 0.0)).norm() < 1e-13);
        assert_eq!(g.inertia.minus, 1);

        let unit = TransferFunction::constant(real_matrix(1, 1, &[1.0]));
        let pts = crate::sampling::disc_points(5, 1);
        let g = kernel_gram(&unit, &pts, &tol).unwrap();
        assert_eq!(g.inertia.zero, 5);
    }

    #[test]
    fn estimates() {
        let tol = Tolerances::default();
        let e = negative_squares_estimate(&b(0.5), &tol).unwrap();
        assert_eq!(e.kernel_estimate, Some(0));
        assert!(e.agreement);
        let sys = b(0.5).colligation().unwrap().clone();
        let inv = TransferFunction::from_colligation(
            invert_system(&sys, &tol).unwrap().colligation.unwrap(),
        );
        let e = negative_squares_estimate(&inv, &tol).unwrap();
        assert_eq!(e.kernel_estimate, Some(1));
        assert_eq!(e.pole_multiplicity, 1);
    }

    #[test]
    fn rejects_points_at_poles() {
        let tol = Tolerances::default();
        let sys = b(0.5).colligation().unwrap().clone();
        let inv = TransferFunction::from_colligation(
            invert_system(&sys, &tol).unwrap().colligation.unwrap(),
        );
        assert!(matches!(
            kernel_gram(&inv, &[cx(0.5, 0.0)], &tol),
            Err(Error::PoleProximity { .. })
        ));
    }
}
