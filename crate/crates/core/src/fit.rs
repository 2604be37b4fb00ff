//! Least-squares rate fits on sampled decay curves.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_SAMPLES: usize = 10;
/// Second-half slope over first-half slope above which a decaying curve is
/// flagged as exponential-like.
pub const CURVATURE_FLAG: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub rms: f64,
    pub samples: usize,
    /// The curve steepens across the window faster than any power law would.
    pub exponential_like: bool,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

fn window_samples(samples: &[(f64, f64)], window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (t1, t2) = window;
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::InvalidGrid(format!("fit window [{t1}, {t2}]")));
    }
    let inside: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(t, _)| t >= t1 && t <= t2)
        .collect();
    if inside.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: inside.len(),
        });
    }
    if let Some(&(t, value)) = inside.iter().find(|&&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveSample { t, value });
    }
    Ok(inside)
}

/// Slope of `log value` against `log t` over the samples with `t` in `window`.
pub fn slope_fit(samples: &[(f64, f64)], window: (f64, f64)) -> Result<SlopeFit> {
    let inside = window_samples(samples, window)?;
    let xs: Vec<f64> = inside.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = inside.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, rms) = least_squares(&xs, &ys);

    let half = xs.len() / 2;
    let (first, _, _) = least_squares(&xs[..half], &ys[..half]);
    let (second, _, _) = least_squares(&xs[half..], &ys[half..]);
    let exponential_like = slope < 0.0 && first < 0.0 && second / first > CURVATURE_FLAG;

    Ok(SlopeFit {
        slope,
        intercept,
        rms,
        samples: xs.len(),
        exponential_like,
    })
}

/// Rate `c` of a fit `value ≈ C e^{-c t}` (least squares on `log value`
/// against `t`).
pub fn exponential_rate(samples: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let inside = window_samples(samples, window)?;
    let xs: Vec<f64> = inside.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = inside.iter().map(|p| p.1.ln()).collect();
    Ok(-least_squares(&xs, &ys).0)
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i + 1 == count {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}
