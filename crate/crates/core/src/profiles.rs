//! Truncated-eigenvalue propagators `V⁽⁰⁾` (small zone) and `V⁽∞⁾` (large
//! zone), and the refined decay experiment for `U − V`.

use serde::Serialize;

use crate::cascade::{build_large, build_small, LargeCoefficients, SmallCoefficients, SymbolicMatrix};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix3, StateVector3, C64, I};
use crate::plancherel::{finish_report, fit_resolution, DecayReport, ExperimentGrid, SpectralDataSpec, ZoneSeries};
use crate::propagator::propagator;
use crate::report::Check;
use crate::spectral::{homogeneous_dimension, Zone};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncatedEigen {
    /// `μ⁽¹⁾ = z²`, `μ⁽²'³⁾ = ±i + (1±i)z/2 − (2±i)z²/4`.
    SmallPrincipal,
    /// `ν⁽¹'²⁾ = ±i√z + 1/(2z)`, `ν⁽³⁾ = z − 1/z`.
    LargePrincipal,
}

impl TruncatedEigen {
    pub fn values(&self, z: f64) -> [C64; 3] {
        match self {
            Self::SmallPrincipal => {
                let z2 = z * z;
                [
                    C64::from(z2),
                    I + C64::new(0.5, 0.5) * z - C64::new(0.5, 0.25) * z2,
                    -I + C64::new(0.5, -0.5) * z - C64::new(0.5, -0.25) * z2,
                ]
            }
            Self::LargePrincipal => {
                let s = z.sqrt();
                let h = 0.5 / z;
                [C64::new(h, s), C64::new(h, -s), C64::from(z - 1.0 / z)]
            }
        }
    }

    /// Diagonal symbol `Λ₀ + Λ₂z + Λ₄z²` or `Λ̃₀z + Λ̃₁√z + Λ̃₄z⁻¹`.
    pub fn symbol(&self) -> SymbolicMatrix {
        match self {
            Self::SmallPrincipal => SmallCoefficients::standard().lambda(),
            Self::LargePrincipal => LargeCoefficients::standard().lambda(),
        }
    }
}

fn check_args(z: f64, t: f64) -> Result<()> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(z));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(t));
    }
    Ok(())
}

fn conjugated_exponential(p: ComplexMatrix3, mu: [C64; 3], t: f64, what: &str) -> Result<ComplexMatrix3> {
    let p_inv = p
        .inverse()
        .ok_or_else(|| Error::Singular(format!("{what} transform")))?;
    let d = ComplexMatrix3::diag(mu.map(|m| (-m * t).exp()));
    Ok(p * d * p_inv)
}

/// `T₁T₂T₃T₄ diag(e^{−μ t}) (T₁T₂T₃T₄)⁻¹`.
pub fn v0_matrix(z: f64, t: f64) -> Result<ComplexMatrix3> {
    check_args(z, t)?;
    if t == 0.0 {
        return Ok(ComplexMatrix3::identity());
    }
    let c = build_small(z)?;
    conjugated_exponential(c.chain(4), TruncatedEigen::SmallPrincipal.values(z), t, "small-zone")
}

/// `T̃₁T̃₂T̃₃T̃₄ diag(e^{−ν t}) (T̃₁T̃₂T̃₃T̃₄)⁻¹`.
pub fn vinf_matrix(z: f64, t: f64) -> Result<ComplexMatrix3> {
    check_args(z, t)?;
    if t == 0.0 {
        return Ok(ComplexMatrix3::identity());
    }
    let c = build_large(z)?;
    conjugated_exponential(c.chain(4), TruncatedEigen::LargePrincipal.values(z), t, "large-zone")
}

pub fn propagate_v0(z: f64, t: f64, w0: &StateVector3) -> Result<StateVector3> {
    Ok(v0_matrix(z, t)?.mul_vec(w0))
}

pub fn propagate_vinf(z: f64, t: f64, w0: &StateVector3) -> Result<StateVector3> {
    Ok(vinf_matrix(z, t)?.mul_vec(w0))
}

/// `‖(e^{−A t} − V) w₀‖²` with `V` the profile belonging to `zone`. In the
/// bounded zone no profile is subtracted.
pub fn difference_sqr(z: f64, t: f64, zone: Zone, w0: &StateVector3) -> Result<f64> {
    let u = propagator(z, t)?;
    let d = match zone {
        Zone::Small => u - v0_matrix(z, t)?,
        Zone::Large => u - vinf_matrix(z, t)?,
        Zone::Bounded => u,
    };
    Ok(d.mul_vec(w0).norm_sqr())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub difference: DecayReport,
    /// Small-zone norm slope of `U` itself, for the gain.
    pub plain_small_slope: f64,
    pub gain: f64,
    pub checks: Vec<Check>,
}

/// `J^int + J^bdd + J^ext` with `J^int = ‖U − V⁽⁰⁾‖²` (bounded data),
/// `J^bdd = ‖U‖²` and `J^ext = ‖U − V⁽∞⁾‖²` (data of class `H^{s−1}`).
pub fn profile_series(grid: &ExperimentGrid, n: usize, s: u32, times: &[f64]) -> Result<(ZoneSeries, ZoneSeries)> {
    let assembler = grid.assembler(n)?;
    let l1 = SpectralDataSpec::l1_like();
    let hs = SpectralDataSpec::hs_like(s.saturating_sub(1));
    let mut diff = Vec::with_capacity(times.len());
    let mut plain = Vec::with_capacity(times.len());
    for &t in times {
        diff.push(assembler.integrate(|z, zone| {
            let data = if zone == Zone::Large { &hs } else { &l1 };
            difference_sqr(z, t, zone, &data.initial(z, n))
        })?);
        plain.push(assembler.integrate(|z, zone| {
            if zone != Zone::Small {
                return Ok(0.0);
            }
            Ok(propagator(z, t)?.mul_vec(&l1.initial(z, n)).norm_sqr())
        })?);
    }
    Ok((
        ZoneSeries {
            t: times.to_vec(),
            parts: diff,
        },
        ZoneSeries {
            t: times.to_vec(),
            parts: plain,
        },
    ))
}

/// Small zone: norm slope `−Q/8 − 1/4`; large zone: norm slope `−s/2` with
/// data one derivative rougher; bounded zone: exponential.
pub fn profile_experiment(n: usize, s: u32, grid: &ExperimentGrid) -> Result<ProfileReport> {
    if s == 0 {
        return Err(Error::Config("the profile experiment needs s >= 1".into()));
    }
    let times = grid.times.times()?;
    let (diff, plain) = profile_series(grid, n, s, &times)?;
    let q = homogeneous_dimension(n) as f64;
    let target = -q / 8.0 - 0.25;
    let plain_curve = crate::plancherel::EnergyCurve::fit(plain.curve(Zone::Small), grid.times.window)?;
    let assembler = grid.assembler(n)?;
    let integrand = |t: f64| {
        move |z: f64, zone: Zone| {
            let data = if zone == Zone::Large {
                SpectralDataSpec::hs_like(s - 1)
            } else {
                SpectralDataSpec::l1_like()
            };
            difference_sqr(z, t, zone, &data.initial(z, n))
        }
    };
    let resolution_change = fit_resolution(&assembler, grid, s, integrand)?;
    let difference = finish_report(
        n,
        s,
        diff,
        grid,
        resolution_change,
        Some((target, "small-zone difference norm slope (-Q/8 - 1/4)")),
    )?;
    let plain_small_slope = plain_curve.norm_slope();
    let gain = difference.small.norm_slope() - plain_small_slope;
    let mut checks = difference.checks.clone();
    checks.push(Check::within("small-zone gain over U (-1/4)", -0.25, gain, 0.05));
    Ok(ProfileReport {
        difference,
        plain_small_slope,
        gain,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::ExactMatrix;
    use crate::fit::{log_space, slope_fit};
    use crate::linalg::ZERO;
    use crate::propagator::propagate;

    #[test]
    fn traces_are_exactly_z() {
        for kind in [TruncatedEigen::SmallPrincipal, TruncatedEigen::LargePrincipal] {
            let sym = kind.symbol();
            let mut trace = SymbolicMatrix::zero();
            for h in sym.half_powers() {
                let c = sym.coefficient(h);
                let tr = c.0[0][0] + c.0[1][1] + c.0[2][2];
                let mut m = ExactMatrix::zero();
                m.0[0][0] = tr;
                trace = trace + SymbolicMatrix::term(h, m);
            }
            let mut one = ExactMatrix::zero();
            one.0[0][0] = crate::cascade::Exact::new(1.into(), 0.into());
            assert_eq!(trace, SymbolicMatrix::term(2, one), "{kind:?}");
        }
    }

    #[test]
    fn values_match_symbols_and_conjugate() {
        for z in [1e-3, 0.07, 30.0, 1e4] {
            for kind in [TruncatedEigen::SmallPrincipal, TruncatedEigen::LargePrincipal] {
                let v = kind.values(z);
                let d = kind.symbol().eval(z).diagonal();
                for j in 0..3 {
                    assert!((v[j] - d[j]).norm() <= 1e-14 * (1.0 + d[j].norm()));
                }
                let sum: C64 = v.iter().sum();
                assert!((sum - C64::from(z)).norm() <= 1e-12 * z.max(1.0));
            }
            let s = TruncatedEigen::SmallPrincipal.values(z);
            assert_eq!(s[1], s[2].conj());
            let l = TruncatedEigen::LargePrincipal.values(z);
            assert_eq!(l[0], l[1].conj());
        }
    }

    #[test]
    fn identity_at_time_zero() {
        let w = StateVector3::real(0.3, -0.2, 1.0);
        assert_eq!(propagate_v0(0.01, 0.0, &w).unwrap(), w);
        assert_eq!(propagate_vinf(100.0, 0.0, &w).unwrap(), w);
        // The conjugation also cancels on the non-shortcut path.
        let m = v0_matrix(0.01, 1e-300).unwrap();
        assert!(m.max_abs_diff(&ComplexMatrix3::identity()) < 1e-14);
    }

    #[test]
    fn dominant_branches() {
        // Small z: late-time V₀ is e^{−z² t} times a fixed projection.
        let z: f64 = 0.01;
        let w = StateVector3::real(1.0, 0.0, 0.0);
        let a = propagate_v0(z, 1e5, &w).unwrap().norm();
        let b = propagate_v0(z, 2e5, &w).unwrap().norm();
        assert!(((b / a).ln() / -(z * z * 1e5) - 1.0).abs() < 1e-9);
        // Large z: the oscillating pair decays like e^{−t/(2z)}.
        let z: f64 = 400.0;
        let a = propagate_vinf(z, 1000.0, &w).unwrap().norm();
        let b = propagate_vinf(z, 2000.0, &w).unwrap().norm();
        assert!(((b / a).ln() / -(1000.0 / (2.0 * z)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn small_zone_difference_bound() {
        let w = StateVector3::real(1.0, -0.5, 0.25);
        let c = 0.9;
        for z in [1e-3, 5e-3, 0.02, 0.05] {
            for t in log_space(1.0, 1e3 / (z * z), 15) {
                let d = (propagate(z, t, &w).unwrap() - propagate_v0(z, t, &w).unwrap()).norm();
                let bound = (z.powf(2.5) * t + z * z) * (-c * z * z * t).exp() * w.norm();
                assert!(d <= 10.0 * bound, "z={z} t={t} d={d:e} bound={bound:e}");
            }
        }
    }

    #[test]
    fn large_zone_difference_bound() {
        let w = StateVector3::real(1.0, -0.5, 0.25);
        let c = 0.45;
        for z in [50.0, 200.0, 1e3] {
            for t in log_space(0.1, 50.0 * z, 15) {
                let d = (propagate(z, t, &w).unwrap() - propagate_vinf(z, t, &w).unwrap()).norm();
                let bound = z.powf(-1.5) * (1.0 + t) * (-c * t / z).exp() * w.norm();
                assert!(d <= 10.0 * bound, "z={z} t={t}");
            }
        }
    }

    #[test]
    fn difference_growth_is_at_most_linear() {
        let z: f64 = 0.01;
        let c = 0.99;
        let w = StateVector3::real(1.0, 0.0, 0.0);
        let samples: Vec<(f64, f64)> = log_space(1e4, 1e6, 20)
            .into_iter()
            .map(|t| {
                let d = (propagate(z, t, &w).unwrap() - propagate_v0(z, t, &w).unwrap()).norm();
                (t, d * (c * z * z * t).exp())
            })
            .collect();
        assert!(slope_fit(&samples, (1e4, 1e6)).unwrap().slope <= 1.0 + 1e-6);
    }

    #[test]
    fn foreign_zone_profiles_grow() {
        // V⁽∞⁾ at small z and V⁽⁰⁾ at large z carry eigenvalues with negative
        // real part, so they cannot be used outside their own zone.
        let w = StateVector3::real(1.0, 0.0, 0.0);
        assert!(propagate_vinf(0.05, 2.0, &w).unwrap().norm() > 1e6);
        assert!(propagate_v0(20.0, 2.0, &w).unwrap().norm() > 1e6);
        assert!(TruncatedEigen::LargePrincipal.values(0.05)[2].re < 0.0);
        assert!(TruncatedEigen::SmallPrincipal.values(20.0)[1].re < 0.0);
    }

    #[test]
    fn symbol_is_diagonal() {
        let s = TruncatedEigen::SmallPrincipal.symbol().eval(0.03);
        let l = TruncatedEigen::LargePrincipal.symbol().eval(300.0);
        for m in [s, l] {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert_eq!(m[(i, j)], ZERO);
                    }
                }
            }
        }
    }
}
