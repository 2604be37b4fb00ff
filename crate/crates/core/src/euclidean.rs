//! The same 3×3 system on `ℝⁿ`, where the zone parameter is `z = |ξ|²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::log_space;
use crate::linalg::StateVector3;
use crate::plancherel::{EnergyCurve, TimeGrid};
use crate::propagator::propagate;
use crate::reduce::pairwise_sum;
use crate::report::Check;
use crate::spectral::rho;

/// `ρ̃(|ξ|) = |ξ|⁴ / (1 + |ξ|⁶)`.
pub fn rho_tilde(xi_abs: f64) -> f64 {
    let x2 = xi_abs * xi_abs;
    x2 * x2 / (1.0 + x2 * x2 * x2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EuclidData {
    /// `|ŵ₀| = 1`, the `m = 1` class.
    Bounded,
    /// `|ŵ₀|² = |ξ|^{-(n+2s)}` for `|ξ| ≥ 1`.
    Hs { s: u32 },
}

/// Radial log-grid in `|ξ|` with derivative weight `|ξ|^{2r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclidGrid {
    pub n: usize,
    pub xi_min: f64,
    pub xi_max: f64,
    pub ppd: u32,
    pub r: f64,
}

impl EuclidGrid {
    pub fn low_frequency(n: usize, r: f64) -> Self {
        Self {
            n,
            xi_min: 1e-4,
            xi_max: 1.0,
            ppd: 40,
            r,
        }
    }

    fn nodes(&self) -> Result<Vec<f64>> {
        if !(self.n >= 1 && self.xi_min > 0.0 && self.xi_max > self.xi_min && self.ppd > 0 && self.r >= 0.0) {
            return Err(Error::InvalidGrid(format!("{self:?}")));
        }
        let decades = (self.xi_max / self.xi_min).log10();
        let count = (decades * self.ppd as f64).ceil() as usize + 1;
        Ok(log_space(self.xi_min, self.xi_max, count))
    }
}

fn amplitude(data: EuclidData, xi: f64, n: usize) -> f64 {
    match data {
        EuclidData::Bounded => 1.0,
        EuclidData::Hs { s } => {
            if xi <= 1.0 {
                1.0
            } else {
                xi.powf(-(n as f64 + 2.0 * s as f64) / 2.0)
            }
        }
    }
}

/// `∫ |ξ|^{2r} ‖e^{−A(|ξ|²)t} ŵ₀‖² |ξ|^{n−1} d|ξ|` over the radial grid (the
/// sphere area is omitted).
pub fn euclid_energy(t: f64, data: EuclidData, grid: &EuclidGrid) -> Result<f64> {
    let nodes = grid.nodes()?;
    let v = StateVector3::real(1.0, 0.0, 0.0);
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&xi| {
            let w0 = v.scale(amplitude(data, xi, grid.n).into());
            let w = propagate(xi * xi, t, &w0)?;
            Ok(w.norm_sqr() * xi.powf(2.0 * grid.r) * xi.powi(grid.n as i32))
        })
        .collect::<Result<_>>()?;
    let panels: Vec<f64> = (0..nodes.len() - 1)
        .map(|i| 0.5 * (nodes[i + 1] / nodes[i]).ln() * (vals[i] + vals[i + 1]))
        .collect();
    Ok(pairwise_sum(&panels))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EuclidReport {
    pub n: usize,
    pub r: f64,
    pub curve: EnergyCurve,
    pub checks: Vec<Check>,
}

/// Low-frequency (`|ξ| < 1`) decay for bounded data: norm slope
/// `−n/8 − r/4`, tolerance 0.03.
pub fn euclid_experiment(grid: &EuclidGrid, times: &TimeGrid) -> Result<EuclidReport> {
    let samples = times
        .times()?
        .into_iter()
        .map(|t| Ok((t, euclid_energy(t, EuclidData::Bounded, grid)?)))
        .collect::<Result<Vec<_>>>()?;
    let curve = EnergyCurve::fit(samples, times.window)?;
    let expected = -(grid.n as f64) / 8.0 - grid.r / 4.0;
    let checks = vec![Check::within(
        "low-frequency norm slope (-n/8 - r/4)",
        expected,
        curve.norm_slope(),
        0.03,
    )];
    Ok(EuclidReport {
        n: grid.n,
        r: grid.r,
        curve,
        checks,
    })
}

/// Largest `|rho_tilde(x) − rho(x²)|` over `xs`.
pub fn key_function_mismatch(xs: &[f64]) -> f64 {
    xs.iter()
        .map(|&x| (rho_tilde(x) - rho(x * x)).abs())
        .fold(0.0, f64::max)
}
