use serde::Serialize;

use super::TransferFunction;
use crate::error::Result;
use crate::indefinite::Tolerances;
use crate::matrix::{identity, singular_values, spectral_norm};
use crate::sampling::boundary_points;

#[derive(Debug, Clone, Serialize)]
pub struct BoundarySample {
    pub theta: f64,
    pub sigma_max: f64,
    /// ‖I − S(ζ)ᴴS(ζ)‖
    pub defect_right_norm: f64,
    /// ‖I − S(ζ)S(ζ)ᴴ‖
    pub defect_left_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub samples: Vec<BoundarySample>,
    pub max_sigma: f64,
    pub contractive: bool,
    pub inner: bool,
    pub co_inner: bool,
    pub bi_inner: bool,
    pub note: String,
}

impl BoundaryReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,sigma_max,defect_right_norm,defect_left_norm\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.theta, s.sigma_max, s.defect_right_norm, s.defect_left_norm
            ));
        }
        out
    }
}

/// Boundary values of S on `boundary_samples` points of the unit circle,
/// evaluated through a minimal realization.
///
/// A rational function whose boundary defect vanishes at every sample of a
/// fine grid vanishes identically, so the per-sample tests stand in for the
/// almost-everywhere conditions.
pub fn boundary_behavior(s: &TransferFunction, tol: &Tolerances) -> Result<BoundaryReport> {
    let min = TransferFunction::from_bare(s.realization().minimal(tol));
    let (p, m) = (s.output_dim(), s.input_dim());
    let mut samples = Vec::with_capacity(tol.boundary_samples);
    for (theta, z) in boundary_points(tol.boundary_samples, tol.seed) {
        let v = min.evaluate(z, tol)?;
        let sigma_max = singular_values(&v).first().copied().unwrap_or(0.0);
        samples.push(BoundarySample {
            theta,
            sigma_max,
            defect_right_norm: spectral_norm(&(identity(m) - v.adjoint() * &v)),
            defect_left_norm: spectral_norm(&(identity(p) - &v * v.adjoint())),
        });
    }
    let max_sigma = samples.iter().map(|s| s.sigma_max).fold(0.0, f64::max);
    let limit = tol.metric_tol * max_sigma.max(1.0).powi(2);
    let inner = samples.iter().all(|s| s.defect_right_norm <= limit);
    let co_inner = samples.iter().all(|s| s.defect_left_norm <= limit);
    Ok(BoundaryReport {
        max_sigma,
        contractive: max_sigma <= 1.0 + tol.metric_tol,
        inner,
        co_inner,
        bi_inner: inner && co_inner,
        note: "rational function: vanishing boundary defect on the sample grid is taken as vanishing everywhere on the circle".into(),
        samples,
    })
}
