//! Exact phase-space evolution and the pointwise decay estimates.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expm_neg, ComplexMatrix3, StateVector3, C64};
use crate::reduce::ordered_argmin;
use crate::spectral::rho;
use crate::system::{assemble_a, eigenvalues};

/// Largest admissible value of `‖e^{-A t}‖ e^{c* ρ t}`.
pub const OPERATOR_BOUND: f64 = 100.0;

/// `e^{-A(z) t}`.
pub fn propagator(z: f64, t: f64) -> Result<ComplexMatrix3> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(z));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(t));
    }
    expm_neg(&assemble_a(z), t)
}

/// `W(t) = e^{-A(z) t} W₀`.
pub fn propagate(z: f64, t: f64, w0: &StateVector3) -> Result<StateVector3> {
    Ok(propagator(z, t)?.mul_vec(w0))
}

/// Scalar quantities carried by `W = (∂ₜu + √z u, ∂ₜu − √z u, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components {
    pub sqrtz_u: C64,
    pub dt_u: C64,
    pub theta: C64,
}

pub fn extract_components(w: &StateVector3) -> Components {
    let [a, b, c] = w.0;
    Components {
        sqrtz_u: (a - b) * 0.5,
        dt_u: (a + b) * 0.5,
        theta: c,
    }
}

/// Inverse of [`extract_components`].
pub fn assemble_state(sqrtz_u: C64, dt_u: C64, theta: C64) -> StateVector3 {
    StateVector3([dt_u + sqrtz_u, dt_u - sqrtz_u, theta])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseRow {
    pub z: f64,
    pub min_re_eig: f64,
    pub rho: f64,
    pub ratio: f64,
    pub max_operator_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseReport {
    pub c_star: f64,
    pub argmin_z: f64,
    pub rows: Vec<PointwiseRow>,
}

/// `min_j Re λ⁽ʲ⁾(z) / ρ(z)`.
pub fn rate_ratio(z: f64) -> Result<(f64, f64)> {
    let min_re = eigenvalues(z)?.min_re();
    Ok((min_re, min_re / rho(z)))
}

/// `c* = min_z min_j Re λ⁽ʲ⁾(z) / ρ(z)` over `z_grid`, plus the operator-norm
/// ratio at each `z`.
///
/// `tau_grid` holds rescaled times: at each `z` the operator bound is checked
/// at `t = τ / ρ(z)`, so one grid covers every zone on its own time scale.
pub fn pointwise_rate(z_grid: &[f64], tau_grid: &[f64]) -> Result<PointwiseReport> {
    if z_grid.is_empty() || tau_grid.is_empty() {
        return Err(Error::InvalidGrid("pointwise grids must be non-empty".into()));
    }
    let ratios: Vec<(f64, f64)> = z_grid
        .par_iter()
        .map(|&z| rate_ratio(z))
        .collect::<Result<_>>()?;
    let only: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    let (idx, c_star) = ordered_argmin(&only).ok_or(Error::NonPositiveRate(f64::NAN))?;
    if !(c_star > 0.0) {
        return Err(Error::NonPositiveRate(c_star));
    }
    let rows = z_grid
        .par_iter()
        .zip(ratios.par_iter())
        .map(|(&z, &(min_re, ratio))| {
            let times: Vec<f64> = tau_grid.iter().map(|tau| tau / rho(z)).collect();
            let max_operator_ratio = operator_ratio(z, &times, c_star)?;
            Ok(PointwiseRow {
                z,
                min_re_eig: min_re,
                rho: rho(z),
                ratio,
                max_operator_ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointwiseReport {
        c_star,
        argmin_z: z_grid[idx],
        rows,
    })
}

fn operator_ratio(z: f64, t_grid: &[f64], c_star: f64) -> Result<f64> {
    let r = rho(z);
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let norm = propagator(z, t)?.op_norm();
        let ratio = norm * (c_star * r * t).exp();
        if ratio.is_nan() {
            return Err(Error::UnboundedGrowth {
                z,
                ratio,
                bound: OPERATOR_BOUND,
            });
        }
        worst = worst.max(ratio);
    }
    Ok(worst)
}

/// `max_t ‖e^{-A(z)t}‖_op · e^{c* ρ(z) t}` over `t_grid`; fails when it
/// exceeds [`OPERATOR_BOUND`].
pub fn verify_operator_bound(z: f64, t_grid: &[f64], c_star: f64) -> Result<f64> {
    let worst = operator_ratio(z, t_grid, c_star)?;
    if worst > OPERATOR_BOUND {
        return Err(Error::UnboundedGrowth {
            z,
            ratio: worst,
            bound: OPERATOR_BOUND,
        });
    }
    Ok(worst)
}
