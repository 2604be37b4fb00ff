//! Plancherel-type energy assembly over the `(k, λ)` phase space, split into
//! the three zones, and the decay-rate experiment built on it.
//!
//! With `z = μ_k|λ|` the `λ`-integral of level `k` becomes
//! `μ_k^{-(n+1)} ∫ F(z) zⁿ dz`, so for data depending on `k` only through `z`
//!
//! ```text
//! E = 2 c_n · S_n · ∫ F(z) zⁿ dz,   S_n = Σ_m binom(m+n-1, n-1) (2m+n)^{-(n+1)},
//! ```
//!
//! the factor 2 accounting for `λ < 0`. The `z`-integral is a trapezoid rule in
//! `log z` whose node set contains the zone boundaries, so the three zone parts
//! add up to the full-range integral panel by panel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{exponential_rate, log_space, slope_fit, SlopeFit};
use crate::linalg::StateVector3;
use crate::propagator::propagate;
use crate::reduce::pairwise_sum;
use crate::report::Check;
use crate::spectral::{auto_truncation, homogeneous_dimension, tail_weight_sum, Thresholds, Zone};

/// Relative tail tolerance for the automatic `|k|` truncation.
pub const K_TAIL_TOL: f64 = 1e-8;
/// Hard cap on the automatic `|k|` truncation.
pub const K_MAX_CAP: u64 = 1 << 31;
/// Maximum relative change tolerated when the grid is refined.
pub const RESOLUTION_TOL: f64 = 0.01;

/// `c_n = (2π)^{-(3n+1)}`.
pub fn plancherel_constant(n: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powi(-(3 * n as i32 + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DataClass {
    /// Coefficients bounded by one, as produced by `L¹` data.
    L1Like,
    /// Coefficients with `|w₀(z)|² zⁿ = z^{-(s+1)}` for `z ≥ 1`, the slowest
    /// decay compatible with `s` horizontal derivatives in `L²` (up to a
    /// logarithm absorbed by the cap of the grid).
    HsLike { s: u32 },
}

/// Diagonal phase-space datum `W₀(λ)_{k,ℓ} = w₀(μ_k|λ|) δ_{kℓ} v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDataSpec {
    pub class: DataClass,
    pub direction: StateVector3,
}

impl SpectralDataSpec {
    pub fn new(class: DataClass) -> Self {
        Self {
            class,
            direction: StateVector3::real(1.0, 0.0, 0.0),
        }
    }

    pub fn l1_like() -> Self {
        Self::new(DataClass::L1Like)
    }

    pub fn hs_like(s: u32) -> Self {
        Self::new(DataClass::HsLike { s })
    }

    /// `w₀(z)` in dimension `n`.
    pub fn amplitude(&self, z: f64, n: usize) -> f64 {
        match self.class {
            DataClass::L1Like => 1.0,
            DataClass::HsLike { s } => {
                if z <= 1.0 {
                    1.0
                } else {
                    z.powf(-(n as f64 + s as f64 + 1.0) / 2.0)
                }
            }
        }
    }

    pub fn initial(&self, z: f64, n: usize) -> StateVector3 {
        self.direction.scale(self.amplitude(z, n).into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KTruncation {
    Auto,
    #[serde(untagged)]
    Fixed(u64),
}

/// Log-spaced quadrature in the scaled variable `z = μ_k|λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub n: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub ppd: u32,
    pub kmax: KTruncation,
}

impl QuadratureGrid {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            z_min: 1e-8,
            z_max: 1e8,
            ppd: 40,
            kmax: KTruncation::Auto,
        }
    }

    pub fn refined(&self, truncation: u64) -> Self {
        Self {
            ppd: self.ppd * 2,
            kmax: KTruncation::Fixed(truncation.saturating_mul(2).max(1)),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ZoneEnergies {
    pub int: f64,
    pub bdd: f64,
    pub ext: f64,
}

impl ZoneEnergies {
    pub fn total(&self) -> f64 {
        self.int + self.bdd + self.ext
    }

    pub fn get(&self, zone: Zone) -> f64 {
        match zone {
            Zone::Small => self.int,
            Zone::Bounded => self.bdd,
            Zone::Large => self.ext,
        }
    }

    /// Part-wise `|a − b| / max(|a|, |b|)`.
    pub fn rel_change(&self, other: &Self) -> Self {
        let rel = |a: f64, b: f64| {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        };
        Self {
            int: rel(self.int, other.int),
            bdd: rel(self.bdd, other.bdd),
            ext: rel(self.ext, other.ext),
        }
    }

    pub fn max_part(&self) -> f64 {
        self.int.max(self.bdd).max(self.ext)
    }
}

/// Node set, zone split and multiplicity prefactor for one dimension `n`.
#[derive(Debug, Clone)]
pub struct EnergyAssembler {
    pub grid: QuadratureGrid,
    pub thresholds: Thresholds,
    pub truncation: u64,
    /// `S_n` partial sum.
    pub multiplicity_sum: f64,
    /// Bound on the neglected part of `S_n`.
    pub multiplicity_tail: f64,
    nodes: Vec<f64>,
    /// Node-index ranges `[lo, hi]` of the small, bounded and large zones.
    zones: [(usize, usize); 3],
}

impl EnergyAssembler {
    pub fn new(grid: QuadratureGrid, thresholds: Thresholds) -> Result<Self> {
        let QuadratureGrid {
            n, z_min, z_max, ppd, ..
        } = grid;
        if n == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if ppd == 0 {
            return Err(Error::InvalidGrid("points per decade must be positive".into()));
        }
        let ok = z_min > 0.0
            && z_max.is_finite()
            && z_min < thresholds.eps
            && thresholds.big_n < z_max;
        if !ok {
            return Err(Error::InvalidGrid(format!(
                "need 0 < z_min < eps < N < z_max, got z_min = {z_min}, eps = {}, N = {}, z_max = {z_max}",
                thresholds.eps, thresholds.big_n
            )));
        }
        let decades = (z_max / z_min).log10();
        let count = (decades * ppd as f64).ceil() as usize + 1;
        let mut nodes = log_space(z_min, z_max, count);
        let close = |a: f64, b: f64| (a / b - 1.0).abs() < 1e-9;
        nodes.retain(|&x| !close(x, thresholds.eps) && !close(x, thresholds.big_n));
        nodes.push(thresholds.eps);
        nodes.push(thresholds.big_n);
        nodes.sort_by(f64::total_cmp);
        let ie = nodes.iter().position(|&x| x == thresholds.eps).expect("inserted");
        let inn = nodes.iter().position(|&x| x == thresholds.big_n).expect("inserted");
        let zones = [(0, ie), (ie, inn), (inn, nodes.len() - 1)];

        let p = n as f64 + 1.0;
        let truncation = match grid.kmax {
            KTruncation::Auto => auto_truncation(n, p, K_TAIL_TOL, K_MAX_CAP)?,
            KTruncation::Fixed(m) => m,
        };
        let tail = tail_weight_sum(n, p, truncation)?;
        Ok(Self {
            grid,
            thresholds,
            truncation,
            multiplicity_sum: tail.value,
            multiplicity_tail: tail.tail_bound,
            nodes,
            zones,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `2 c_n S_n`.
    pub fn prefactor(&self) -> f64 {
        2.0 * plancherel_constant(self.grid.n) * self.multiplicity_sum
    }

    pub fn zone_of_panel(&self, i: usize) -> Zone {
        if i < self.zones[0].1 {
            Zone::Small
        } else if i < self.zones[1].1 {
            Zone::Bounded
        } else {
            Zone::Large
        }
    }

    /// `2 c_n S_n ∫_zone f(z, zone) zⁿ dz` for each zone. `f` is evaluated
    /// only at nodes of the zone it is asked about; boundary nodes are
    /// evaluated once per adjacent zone.
    pub fn integrate<F>(&self, f: F) -> Result<ZoneEnergies>
    where
        F: Fn(f64, Zone) -> Result<f64> + Sync,
    {
        let n = self.grid.n as i32;
        let zones = [Zone::Small, Zone::Bounded, Zone::Large];
        let parts: Vec<f64> = zones
            .iter()
            .zip(self.zones.iter())
            .map(|(&zone, &(lo, hi))| {
                let vals: Vec<f64> = self.nodes[lo..=hi]
                    .par_iter()
                    .map(|&z| Ok(f(z, zone)? * z.powi(n + 1)))
                    .collect::<Result<_>>()?;
                let panels: Vec<f64> = (0..hi - lo)
                    .map(|i| {
                        let h = (self.nodes[lo + i + 1] / self.nodes[lo + i]).ln();
                        0.5 * h * (vals[i] + vals[i + 1])
                    })
                    .collect();
                Ok(pairwise_sum(&panels))
            })
            .collect::<Result<_>>()?;
        let c = self.prefactor();
        Ok(ZoneEnergies {
            int: c * parts[0],
            bdd: c * parts[1],
            ext: c * parts[2],
        })
    }

    /// Single pass over the whole range without zone split.
    pub fn integrate_full<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let n = self.grid.n as i32;
        let vals: Vec<f64> = self
            .nodes
            .par_iter()
            .map(|&z| Ok(f(z)? * z.powi(n + 1)))
            .collect::<Result<_>>()?;
        let panels: Vec<f64> = (0..self.nodes.len() - 1)
            .map(|i| 0.5 * (self.nodes[i + 1] / self.nodes[i]).ln() * (vals[i] + vals[i + 1]))
            .collect();
        Ok(self.prefactor() * pairwise_sum(&panels))
    }

    /// `(I^int, I^bdd, I^ext)(t)` for the datum `data`, with an extra weight
    /// `z^{weight_r}`.
    pub fn energy(&self, t: f64, data: &SpectralDataSpec, weight_r: u32) -> Result<ZoneEnergies> {
        let n = self.grid.n;
        self.integrate(|z, _| {
            let w = propagate(z, t, &data.initial(z, n))?;
            Ok(w.norm_sqr() * z.powi(weight_r as i32))
        })
    }

    /// Relative change of each zone part when both the `z`-resolution and
    /// the `|k|` truncation are doubled.
    pub fn resolution_change<F>(&self, f: F) -> Result<ZoneEnergies>
    where
        F: Fn(f64, Zone) -> Result<f64> + Sync,
    {
        let fine = Self::new(self.grid.refined(self.truncation), self.thresholds)?;
        let a = self.integrate(&f)?;
        let b = fine.integrate(&f)?;
        Ok(a.rel_change(&b))
    }

    /// Fails when refining the grid moves any zone part by more than
    /// [`RESOLUTION_TOL`].
    pub fn resolution_check<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64, Zone) -> Result<f64> + Sync,
    {
        let change = self.resolution_change(f)?.max_part();
        if change > RESOLUTION_TOL {
            return Err(Error::InvalidGrid(format!(
                "refining the grid changes a zone energy by {:.3}%",
                100.0 * change
            )));
        }
        Ok(change)
    }
}

/// Sampled energy series with its fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCurve {
    pub samples: Vec<(f64, f64)>,
    pub window: (f64, f64),
    pub fit: SlopeFit,
}

impl EnergyCurve {
    /// Fits the squared-energy slope; the window must span two decades.
    pub fn fit(samples: Vec<(f64, f64)>, window: (f64, f64)) -> Result<Self> {
        if !(window.1 / window.0 >= 100.0) {
            return Err(Error::InvalidGrid(format!(
                "fit window [{}, {}] spans less than two decades",
                window.0, window.1
            )));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidGrid("sample times must increase".into()));
        }
        let fit = slope_fit(&samples, window)?;
        Ok(Self {
            samples,
            window,
            fit,
        })
    }

    /// Amplitude (norm) slope: half the squared slope.
    pub fn norm_slope(&self) -> f64 {
        self.fit.slope / 2.0
    }
}

/// Time sampling and fit windows shared by the decay experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    /// Window for the small- and large-zone power-law fits.
    pub window: (f64, f64),
    /// Window for the bounded-zone exponential fit.
    pub bounded_window: (f64, f64),
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_min: 1.0,
            t_max: 1e4,
            t_points: 41,
            window: (1e2, 1e4),
            bounded_window: (10.0, 1e3),
        }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_points >= 2) {
            return Err(Error::InvalidGrid(format!(
                "time grid [{}, {}] with {} points",
                self.t_min, self.t_max, self.t_points
            )));
        }
        Ok(log_space(self.t_min, self.t_max, self.t_points))
    }

    /// Both windows stretched by `factor` (used when `ε` is changed: the
    /// small-zone time scale is `ε^{-2}`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            t_min: self.t_min * factor,
            t_max: self.t_max * factor,
            window: (self.window.0 * factor, self.window.1 * factor),
            bounded_window: (self.bounded_window.0 * factor, self.bounded_window.1 * factor),
            ..*self
        }
    }
}

/// Quadrature, zones and times for one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub z_min: f64,
    pub z_max: f64,
    pub ppd: u32,
    pub kmax: KTruncation,
    pub thresholds: Thresholds,
    pub times: TimeGrid,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        let q = QuadratureGrid::new(1);
        Self {
            z_min: q.z_min,
            z_max: q.z_max,
            ppd: q.ppd,
            kmax: q.kmax,
            thresholds: Thresholds::default(),
            times: TimeGrid::default(),
        }
    }
}

impl ExperimentGrid {
    pub fn quadrature(&self, n: usize) -> QuadratureGrid {
        QuadratureGrid {
            n,
            z_min: self.z_min,
            z_max: self.z_max,
            ppd: self.ppd,
            kmax: self.kmax,
        }
    }

    pub fn assembler(&self, n: usize) -> Result<EnergyAssembler> {
        EnergyAssembler::new(self.quadrature(n), self.thresholds)
    }
}

/// Per-time zone energies of a three-zone experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneSeries {
    pub t: Vec<f64>,
    pub parts: Vec<ZoneEnergies>,
}

impl ZoneSeries {
    pub fn curve(&self, zone: Zone) -> Vec<(f64, f64)> {
        self.t
            .iter()
            .zip(&self.parts)
            .map(|(&t, e)| (t, e.get(zone)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub n: usize,
    pub s: u32,
    pub series: ZoneSeries,
    pub small: EnergyCurve,
    pub large: Option<EnergyCurve>,
    pub bounded_rate: f64,
    pub resolution_change: f64,
    pub checks: Vec<Check>,
}

/// `I^int` for `L¹`-type data, `I^bdd` for the same data and `I^ext` for
/// `H^s`-type data, at every time of `grid.times`.
pub fn decay_series(assembler: &EnergyAssembler, s: u32, times: &[f64]) -> Result<ZoneSeries> {
    let l1 = SpectralDataSpec::l1_like();
    let hs = SpectralDataSpec::hs_like(s);
    let n = assembler.grid.n;
    let parts = times
        .iter()
        .map(|&t| {
            assembler.integrate(|z, zone| {
                let data = if zone == Zone::Large { &hs } else { &l1 };
                Ok(propagate(z, t, &data.initial(z, n))?.norm_sqr())
            })
        })
        .collect::<Result<_>>()?;
    Ok(ZoneSeries {
        t: times.to_vec(),
        parts,
    })
}

/// Small zone: norm slope `−Q/8`; large zone (`s ≥ 1`): norm slope `−s/2`;
/// bounded zone: positive exponential rate.
pub fn decay_experiment(n: usize, s: u32, grid: &ExperimentGrid) -> Result<DecayReport> {
    let assembler = grid.assembler(n)?;
    let times = grid.times.times()?;
    let series = decay_series(&assembler, s, &times)?;
    let integrand = |t: f64| {
        move |z: f64, zone: Zone| {
            let data = if zone == Zone::Large {
                SpectralDataSpec::hs_like(s)
            } else {
                SpectralDataSpec::l1_like()
            };
            Ok(propagate(z, t, &data.initial(z, n))?.norm_sqr())
        }
    };
    let resolution_change = fit_resolution(&assembler, grid, s, integrand)?;
    finish_report(n, s, series, grid, resolution_change, None)
}

/// Largest refinement change of the parts that are fitted: small and large
/// zone at the end of the power-law window, bounded zone at the start of the
/// exponential window (later bounded-zone energies concentrate in a boundary
/// layer at `z = ε` that a log grid need not resolve for a rate fit).
pub(crate) fn fit_resolution<G, F>(assembler: &EnergyAssembler, grid: &ExperimentGrid, s: u32, integrand: G) -> Result<f64>
where
    G: Fn(f64) -> F,
    F: Fn(f64, Zone) -> Result<f64> + Sync,
{
    let late = assembler.resolution_change(integrand(grid.times.window.1))?;
    let early = assembler.resolution_change(integrand(grid.times.bounded_window.0))?;
    let ext = if s >= 1 { late.ext } else { 0.0 };
    Ok(late.int.max(ext).max(early.bdd))
}

pub(crate) fn finish_report(
    n: usize,
    s: u32,
    series: ZoneSeries,
    grid: &ExperimentGrid,
    resolution_change: f64,
    small_target: Option<(f64, &str)>,
) -> Result<DecayReport> {
    let q = homogeneous_dimension(n) as f64;
    let small = EnergyCurve::fit(series.curve(Zone::Small), grid.times.window)?;
    let large = if s >= 1 {
        Some(EnergyCurve::fit(series.curve(Zone::Large), grid.times.window)?)
    } else {
        None
    };
    let bdd: Vec<(f64, f64)> = series
        .curve(Zone::Bounded)
        .into_iter()
        .filter(|&(_, v)| v > 0.0)
        .collect();
    let bounded_rate = exponential_rate(&bdd, grid.times.bounded_window)?;

    let (small_expected, small_name) = small_target.unwrap_or((-q / 8.0, "small-zone norm slope (-Q/8)"));
    let mut checks = vec![Check::within(small_name, small_expected, small.norm_slope(), 0.05)];
    if let Some(l) = &large {
        checks.push(Check::within(
            "large-zone norm slope (-s/2)",
            -(s as f64) / 2.0,
            l.norm_slope(),
            0.05,
        ));
    }
    checks.push(Check::at_least(
        "bounded-zone exponential rate > 0",
        f64::MIN_POSITIVE,
        bounded_rate,
    ));
    checks.push(Check::at_most(
        "grid refinement change",
        RESOLUTION_TOL,
        resolution_change,
    ));
    Ok(DecayReport {
        n,
        s,
        series,
        small,
        large,
        bounded_rate,
        resolution_change,
        checks,
    })
}

/// `s = ⌊(n+1)/2⌋ = ⌊Q/4⌋`, where both terms of the energy estimate decay at
/// the same rate.
pub fn balanced_regularity(n: usize) -> usize {
    n.div_ceil(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::log_space;

    fn small_grid(n: usize) -> EnergyAssembler {
        let grid = QuadratureGrid {
            n,
            z_min: 1e-6,
            z_max: 1e3,
            ppd: 20,
            kmax: KTruncation::Fixed(2000),
        };
        EnergyAssembler::new(grid, Thresholds::default()).unwrap()
    }

    #[test]
    fn balanced_regularity_examples() {
        assert_eq!(balanced_regularity(1), 1);
        assert_eq!(balanced_regularity(2), 1);
        assert_eq!(balanced_regularity(5), 3);
    }

    #[test]
    fn zone_boundaries_are_nodes() {
        let a = small_grid(1);
        assert!(a.nodes().contains(&0.1));
        assert!(a.nodes().contains(&10.0));
        assert!(a.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn initial_energy_is_data_norm() {
        // At t = 0 the integrand is |w₀|² zⁿ; for w₀ = 1 on [z_min, z_max]
        // the exact z-integral is (z_max^{n+1} − z_min^{n+1}) / (n + 1).
        let a = small_grid(1);
        let e = a.energy(0.0, &SpectralDataSpec::l1_like(), 0).unwrap();
        let exact = a.prefactor() * (1e6 - 1e-12) / 2.0;
        assert!((e.total() / exact - 1.0).abs() < 1e-2, "{e:?}");
        assert!(e.int > 0.0 && e.bdd > 0.0 && e.ext > 0.0);
    }

    #[test]
    fn zone_parts_add_up() {
        let a = small_grid(2);
        let data = SpectralDataSpec::hs_like(1);
        for t in [0.0, 3.0, 500.0] {
            let parts = a.energy(t, &data, 1).unwrap();
            let full = a
                .integrate_full(|z| Ok(propagate(z, t, &data.initial(z, 2))?.norm_sqr() * z))
                .unwrap();
            assert!((parts.total() - full).abs() <= 1e-10 * full, "t={t}");
        }
    }

    #[test]
    fn factorized_sum_matches_level_by_level() {
        // Direct per-level sum with λ-nodes z_j / μ_m.
        let n = 2;
        let m_max = 30;
        let grid = QuadratureGrid {
            n,
            z_min: 1e-4,
            z_max: 1e2,
            ppd: 10,
            kmax: KTruncation::Fixed(m_max),
        };
        let a = EnergyAssembler::new(grid, Thresholds::default()).unwrap();
        let t = 5.0;
        let data = SpectralDataSpec::l1_like();
        let g = |z: f64| propagate(z, t, &data.initial(z, n)).unwrap().norm_sqr();
        let mut direct = 0.0;
        for m in 0..=m_max {
            let mu = (2 * m + n as u64) as f64;
            let count = crate::spectral::multiindex_count(m, n).unwrap() as f64;
            let lam: Vec<f64> = a.nodes().iter().map(|z| z / mu).collect();
            let mut level = 0.0;
            for i in 0..lam.len() - 1 {
                let f0 = g(lam[i] * mu) * lam[i].powi(n as i32 + 1);
                let f1 = g(lam[i + 1] * mu) * lam[i + 1].powi(n as i32 + 1);
                level += 0.5 * (lam[i + 1] / lam[i]).ln() * (f0 + f1);
            }
            direct += 2.0 * count * level;
        }
        direct *= plancherel_constant(n);
        let factorized = a.energy(t, &data, 0).unwrap().total();
        assert!((direct / factorized - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bounded_zone_decays_exponentially() {
        let a = small_grid(1);
        let data = SpectralDataSpec::l1_like();
        let e0 = a.energy(0.0, &data, 0).unwrap().bdd;
        let samples: Vec<(f64, f64)> = log_space(10.0, 1000.0, 12)
            .into_iter()
            .map(|t| (t, a.energy(t, &data, 0).unwrap().bdd))
            .collect();
        let c = exponential_rate(&samples, (10.0, 1000.0)).unwrap();
        assert!(c > 0.0);
        for &(t, e) in &samples {
            assert!(e / e0 <= 2.0 * (-c * t / 2.0).exp());
        }
    }

    #[test]
    fn loss_mechanism_sup_bound() {
        // sup_{z > N} z^{-s} e^{-t/z} ≤ C (1+t)^{-s}.
        let zs = log_space(10.0, 1e9, 2000);
        for s in [1, 2] {
            for t in [10.0f64, 100.0, 1000.0] {
                let sup = zs
                    .iter()
                    .map(|z| z.powi(-s) * (-t / z).exp())
                    .fold(0.0, f64::max);
                let bound = (1.0 + t).powi(-s);
                assert!(sup <= bound, "s={s} t={t}");
            }
        }
    }

    #[test]
    fn rejects_invalid_grids() {
        let mut g = QuadratureGrid::new(1);
        g.z_min = 0.5;
        assert!(EnergyAssembler::new(g, Thresholds::default()).is_err());
        let mut g = QuadratureGrid::new(1);
        g.ppd = 0;
        assert!(EnergyAssembler::new(g, Thresholds::default()).is_err());
        assert!(EnergyCurve::fit(vec![(1.0, 1.0); 12], (1.0, 10.0)).is_err());
    }

    #[test]
    fn data_classes() {
        let hs = SpectralDataSpec::hs_like(2);
        assert_eq!(hs.amplitude(0.5, 1), 1.0);
        let z: f64 = 100.0;
        assert!((hs.amplitude(z, 1).powi(2) * z - z.powi(-3)).abs() < 1e-18);
        assert_eq!(SpectralDataSpec::l1_like().amplitude(1e6, 3), 1.0);
    }
}
