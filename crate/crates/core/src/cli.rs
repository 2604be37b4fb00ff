//! Command-line experiment runner: configuration, dispatch, CSV and JSON
//! reports.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand as ClapSubcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cascade::{residual_large, residual_small, verify_step_identities};
use crate::error::{Error, Result};
use crate::euclidean::{euclid_energy, key_function_mismatch, EuclidData, EuclidGrid};
use crate::fit::{log_space, slope_fit};
use crate::linalg::{ComplexMatrix3, C64};
use crate::plancherel::{decay_experiment, ExperimentGrid, KTruncation, TimeGrid, ZoneSeries};
use crate::profiles::profile_experiment;
use crate::propagator::{pointwise_rate, rate_ratio, OPERATOR_BOUND};
use crate::report::Check;
use crate::spectral::{homogeneous_dimension, Thresholds};
use crate::system::{assemble_a, asymptotic_error, char_poly_eval, eigenvalues};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_GATE_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "WAVEHEAT_THREADS";

const VIETA_TOL: f64 = 1e-9;
const CHAR_POLY_TOL: f64 = 1e-10;
const SMALL_SLOPE_MIN: f64 = 2.4;
const LARGE_SLOPE_MAX: f64 = -1.4;
const RATIO_TOL: f64 = 0.05;
const C_STAR_MIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Eigen,
    Cascade,
    Pointwise,
    Decay,
    Profiles,
    Euclid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ZoneSel {
    Small,
    Bounded,
    Large,
    All,
}

/// Log-spaced `z` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl SampleRange {
    pub fn grid(&self) -> Vec<f64> {
        log_space(self.min, self.max, self.points)
    }
}

/// Everything a run depends on. The resolved config is echoed into the
/// report; feeding it back through `--config` reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub n: usize,
    pub s: u32,
    /// Derivative weight of the Euclidean experiment.
    pub r: f64,
    pub zone: Option<ZoneSel>,
    pub eps: f64,
    pub big_n: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub ppd: u32,
    pub kmax: KTruncation,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub window: (f64, f64),
    pub bounded_window: (f64, f64),
    /// `z` samples of `eigen`, `cascade` and `pointwise`.
    pub samples: Option<SampleRange>,
    /// Largest rescaled time `τ = ρ(z) t` of the operator-bound scan.
    pub tau_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let grid = ExperimentGrid::default();
        Self {
            subcommand: Subcommand::Decay,
            n: 1,
            s: 1,
            r: 0.0,
            zone: None,
            eps: grid.thresholds.eps,
            big_n: grid.thresholds.big_n,
            lambda_min: grid.z_min,
            lambda_max: grid.z_max,
            ppd: grid.ppd,
            kmax: grid.kmax,
            t_min: grid.times.t_min,
            t_max: grid.times.t_max,
            t_points: grid.times.t_points,
            window: grid.times.window,
            bounded_window: grid.times.bounded_window,
            samples: None,
            tau_max: 50.0,
            xi_min: 1e-4,
            xi_max: 1.0,
            seed: 0,
            threads: None,
            out: None,
            report: None,
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(usage(format!("{name}: need 0 < min < max, got [{lo}, {hi}]")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses a config file, or a report whose `config` key holds one.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| usage(format!("config: {e}")))?;
        let inner = match value.get("config") {
            Some(c) if value.get("version").is_some() => c.clone(),
            _ => value,
        };
        serde_json::from_value(inner).map_err(|e| usage(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn zone(&self) -> ZoneSel {
        self.zone.unwrap_or(match self.subcommand {
            Subcommand::Cascade => ZoneSel::Small,
            _ => ZoneSel::All,
        })
    }

    pub fn samples(&self) -> SampleRange {
        self.samples.unwrap_or(match (self.subcommand, self.zone()) {
            (Subcommand::Cascade, ZoneSel::Large) => SampleRange {
                min: 1e2,
                max: 1e4,
                points: 20,
            },
            (Subcommand::Cascade, _) => SampleRange {
                min: 1e-4,
                max: 1e-2,
                points: 20,
            },
            (Subcommand::Pointwise, _) => SampleRange {
                min: 1e-5,
                max: 1e5,
                points: 81,
            },
            _ => SampleRange {
                min: 1e-6,
                max: 1e6,
                points: 60,
            },
        })
    }

    pub fn thresholds(&self) -> Result<Thresholds> {
        Thresholds::new(self.eps, self.big_n).map_err(|e| usage(e.to_string()))
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid {
            t_min: self.t_min,
            t_max: self.t_max,
            t_points: self.t_points,
            window: self.window,
            bounded_window: self.bounded_window,
        }
    }

    pub fn experiment_grid(&self) -> Result<ExperimentGrid> {
        Ok(ExperimentGrid {
            z_min: self.lambda_min,
            z_max: self.lambda_max,
            ppd: self.ppd,
            kmax: self.kmax,
            thresholds: self.thresholds()?,
            times: self.time_grid(),
        })
    }

    pub fn euclid_grid(&self) -> EuclidGrid {
        EuclidGrid {
            n: self.n,
            xi_min: self.xi_min,
            xi_max: self.xi_max,
            ppd: self.ppd,
            r: self.r,
        }
    }

    /// Rejects configurations that cannot describe a run.
    pub fn validate(&self) -> Result<()> {
        if let Some(0) = self.threads {
            return Err(usage("--threads must be at least 1"));
        }
        let zone = self.zone();
        match self.subcommand {
            Subcommand::Eigen | Subcommand::Pointwise => {
                if self.zone.is_some() && zone != ZoneSel::All {
                    return Err(usage("--zone is not used by this subcommand"));
                }
            }
            Subcommand::Cascade => {
                if !matches!(zone, ZoneSel::Small | ZoneSel::Large) {
                    return Err(usage("cascade needs --zone small or --zone large"));
                }
            }
            Subcommand::Euclid => {
                if self.zone.is_some() {
                    return Err(usage("--zone is not used by euclid"));
                }
            }
            Subcommand::Decay | Subcommand::Profiles => {}
        }
        match self.subcommand {
            Subcommand::Eigen | Subcommand::Cascade | Subcommand::Pointwise => {
                let r = self.samples();
                positive_range("z samples", r.min, r.max)?;
                if !(2..=100_000).contains(&r.points) {
                    return Err(usage("--points must lie in 2..=100000"));
                }
                if !(self.tau_max > 0.0 && self.tau_max <= 1e4) {
                    return Err(usage("tau_max must lie in (0, 1e4]"));
                }
            }
            Subcommand::Decay | Subcommand::Profiles | Subcommand::Euclid => {
                let max_n = if self.subcommand == Subcommand::Euclid { 3 } else { 4 };
                if !(1..=max_n).contains(&self.n) {
                    return Err(usage(format!("--n must lie in 1..={max_n}")));
                }
                if self.s > 8 {
                    return Err(usage("--s must lie in 0..=8"));
                }
                if self.subcommand == Subcommand::Profiles && self.s == 0 {
                    return Err(usage("profiles needs --s >= 1"));
                }
                if !(self.r >= 0.0 && self.r <= 8.0) {
                    return Err(usage("--r must lie in [0, 8]"));
                }
                if !(1..=2000).contains(&self.ppd) {
                    return Err(usage("--ppd must lie in 1..=2000"));
                }
                if let KTruncation::Fixed(0) = self.kmax {
                    return Err(usage("--kmax must be positive"));
                }
                positive_range("time grid", self.t_min, self.t_max)?;
                if !(2..=10_000).contains(&self.t_points) {
                    return Err(usage("--t-points must lie in 2..=10000"));
                }
                positive_range("fit window", self.window.0, self.window.1)?;
                positive_range("bounded-zone window", self.bounded_window.0, self.bounded_window.1)?;
                if self.window.1 / self.window.0 < 100.0 {
                    return Err(usage("fit window must span at least two decades"));
                }
                for (lo, hi) in [self.window, self.bounded_window] {
                    if lo < self.t_min || hi > self.t_max {
                        return Err(usage("fit windows must lie inside [t-min, t-max]"));
                    }
                }
                if self.subcommand == Subcommand::Euclid {
                    positive_range("xi range", self.xi_min, self.xi_max)?;
                    if (self.xi_max / self.xi_min).log10() * self.ppd as f64 > 1e6 {
                        return Err(usage("xi grid too large"));
                    }
                } else {
                    let th = self.thresholds()?;
                    positive_range("lambda range", self.lambda_min, self.lambda_max)?;
                    if !(self.lambda_min < th.eps && self.lambda_max > th.big_n) {
                        return Err(usage("lambda range must contain [eps, N]"));
                    }
                    if (self.lambda_max / self.lambda_min).log10() * self.ppd as f64 > 1e6 {
                        return Err(usage("quadrature grid too large"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "waveheat", version, about = "Spectral decay experiments for a coupled wave-heat system")]
pub struct Cli {
    /// CSV output path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON report path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (falls back to WAVEHEAT_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, ClapSubcommand)]
pub enum Command {
    /// Branch-labelled eigenvalues, Vieta checks and asymptotic errors.
    Eigen(SampleArgs),
    /// Diagonalization residuals and step identities.
    Cascade(CascadeArgs),
    /// Pointwise rate ratio and operator-norm bound.
    Pointwise(SampleArgs),
    /// Zone-split energy decay.
    Decay(GridArgs),
    /// Decay of the difference to the asymptotic profiles.
    Profiles(GridArgs),
    /// Low-frequency decay on Euclidean space.
    Euclid(EuclidArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub z_min: Option<f64>,
    #[arg(long)]
    pub z_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    #[arg(long, value_enum)]
    pub zone: Option<ZoneSel>,
    #[command(flatten)]
    pub samples: SampleArgs,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
    #[arg(long)]
    pub ppd: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long, value_enum)]
    pub zone: Option<ZoneSel>,
    #[command(flatten)]
    pub times: TimeArgs,
    /// Lower end of the quadrature in `z = μ_k|λ|`.
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// `auto` or a fixed `|k|` truncation.
    #[arg(long, value_parser = parse_kmax)]
    pub kmax: Option<KTruncation>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub big_n: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EuclidArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub xi_min: Option<f64>,
    #[arg(long)]
    pub xi_max: Option<f64>,
    #[command(flatten)]
    pub times: TimeArgs,
}

pub fn parse_kmax(s: &str) -> std::result::Result<KTruncation, String> {
    if s == "auto" {
        return Ok(KTruncation::Auto);
    }
    s.parse::<u64>()
        .map(KTruncation::Fixed)
        .map_err(|_| format!("expected `auto` or a non-negative integer, got `{s}`"))
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_samples(cfg: &mut ExperimentConfig, args: &SampleArgs) {
    if args.z_min.is_none() && args.z_max.is_none() && args.points.is_none() {
        return;
    }
    let mut range = cfg.samples();
    set(&mut range.min, args.z_min);
    set(&mut range.max, args.z_max);
    set(&mut range.points, args.points);
    cfg.samples = Some(range);
}

fn apply_times(cfg: &mut ExperimentConfig, args: &TimeArgs) {
    set(&mut cfg.t_min, args.t_min);
    set(&mut cfg.t_max, args.t_max);
    set(&mut cfg.t_points, args.t_points);
    set(&mut cfg.ppd, args.ppd);
}

impl Cli {
    /// Config file (if any) overridden by flags and the environment.
    pub fn resolve(&self, file: Option<&str>) -> Result<ExperimentConfig> {
        let mut cfg = match file {
            Some(text) => ExperimentConfig::from_json(text)?,
            None => ExperimentConfig::default(),
        };
        let sub = match &self.command {
            Command::Eigen(_) => Subcommand::Eigen,
            Command::Cascade(_) => Subcommand::Cascade,
            Command::Pointwise(_) => Subcommand::Pointwise,
            Command::Decay(_) => Subcommand::Decay,
            Command::Profiles(_) => Subcommand::Profiles,
            Command::Euclid(_) => Subcommand::Euclid,
        };
        if file.is_some() && cfg.subcommand != sub {
            return Err(usage(format!(
                "config is for `{:?}`, command line asks for `{:?}`",
                cfg.subcommand, sub
            )));
        }
        cfg.subcommand = sub;
        match &self.command {
            Command::Eigen(a) | Command::Pointwise(a) => apply_samples(&mut cfg, a),
            Command::Cascade(a) => {
                if a.zone.is_some() {
                    cfg.zone = a.zone;
                }
                apply_samples(&mut cfg, &a.samples);
            }
            Command::Decay(a) | Command::Profiles(a) => {
                set(&mut cfg.n, a.n);
                set(&mut cfg.s, a.s);
                if a.zone.is_some() {
                    cfg.zone = a.zone;
                }
                apply_times(&mut cfg, &a.times);
                set(&mut cfg.lambda_min, a.lambda_min);
                set(&mut cfg.lambda_max, a.lambda_max);
                set(&mut cfg.kmax, a.kmax);
                set(&mut cfg.eps, a.eps);
                set(&mut cfg.big_n, a.big_n);
            }
            Command::Euclid(a) => {
                set(&mut cfg.n, a.n);
                set(&mut cfg.r, a.r);
                set(&mut cfg.xi_min, a.xi_min);
                set(&mut cfg.xi_max, a.xi_max);
                apply_times(&mut cfg, &a.times);
            }
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.report.is_some() {
            cfg.report = self.report.clone();
        }
        set(&mut cfg.seed, self.seed);
        if self.threads.is_some() {
            cfg.threads = self.threads;
        } else if cfg.threads.is_none() {
            if let Ok(v) = std::env::var(THREADS_ENV) {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("{THREADS_ENV}={v} is not a thread count")))?;
                cfg.threads = Some(n);
            }
        }
        if cfg.samples.is_none() && matches!(sub, Subcommand::Eigen | Subcommand::Cascade | Subcommand::Pointwise) {
            cfg.samples = Some(cfg.samples());
        }
        if cfg.zone.is_none() && sub != Subcommand::Euclid {
            cfg.zone = Some(cfg.zone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// CSV table, report summary and gates of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: String,
    pub summary: Value,
    pub checks: Vec<Check>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

fn row(cells: &[f64]) -> String {
    let mut line = cells.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// Runs the configured experiment on the current thread pool.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.subcommand {
        Subcommand::Eigen => run_eigen(cfg),
        Subcommand::Cascade => run_cascade(cfg),
        Subcommand::Pointwise => run_pointwise(cfg),
        Subcommand::Decay => run_decay(cfg),
        Subcommand::Profiles => run_profiles(cfg),
        Subcommand::Euclid => run_euclid(cfg),
    }
}

/// Slope of the asymptotic eigenvalue error on `[lo, hi]`.
pub fn eigen_error_slope(lo: f64, hi: f64, points: usize) -> Result<f64> {
    let samples = log_space(lo, hi, points)
        .into_iter()
        .map(|z| Ok((z, asymptotic_error(&eigenvalues(z)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(slope_fit(&samples, (lo, hi))?.slope)
}

fn run_eigen(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from(
        "z,l1_re,l1_im,l2_re,l2_im,l3_re,l3_im,vieta_trace,vieta_pair,vieta_product,min_re,asymptotic_error\n",
    );
    let (mut vieta, mut min_re, mut poly): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for z in cfg.samples().grid() {
        let e = eigenvalues(z)?;
        let [l1, l2, l3] = e.values;
        let rel = |got: C64, want: f64| (got - C64::from(want)).norm() / want;
        let v = [
            rel(l1 + l2 + l3, z),
            rel(l1 * l2 + l1 * l3 + l2 * l3, 1.0 + z),
            rel(l1 * l2 * l3, z * z),
        ];
        vieta = v.iter().copied().fold(vieta, f64::max);
        min_re = min_re.min(e.min_re());
        for _ in 0..4 {
            let lam = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) * (1.0 + z);
            let det = (assemble_a(z) - ComplexMatrix3::identity().scale(lam)).det();
            let p = char_poly_eval(z, lam);
            poly = poly.max((det - p).norm() / p.norm().max(1.0));
        }
        csv.push_str(&row(&[
            z,
            l1.re,
            l1.im,
            l2.re,
            l2.im,
            l3.re,
            l3.im,
            v[0],
            v[1],
            v[2],
            e.min_re(),
            asymptotic_error(&e),
        ]));
    }
    let small = eigen_error_slope(1e-4, 1e-2, 20)?;
    let large = eigen_error_slope(1e2, 1e4, 20)?;
    let checks = vec![
        Check::at_most("Vieta relations (relative)", VIETA_TOL, vieta),
        Check::at_least("min Re eigenvalue > 0", f64::MIN_POSITIVE, min_re),
        Check::at_most("characteristic cubic vs determinant", CHAR_POLY_TOL, poly),
        Check::at_least("small-z eigenvalue error slope", SMALL_SLOPE_MIN, small),
        Check::at_most("large-z eigenvalue error slope", LARGE_SLOPE_MAX, large),
    ];
    Ok(RunOutput {
        csv,
        summary: json!({
            "max_vieta_error": vieta,
            "min_re_eigenvalue": min_re,
            "small_error_slope": small,
            "large_error_slope": large,
        }),
        checks,
    })
}

fn run_cascade(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (zone, label, residual): (_, _, fn(f64) -> Result<f64>) = match cfg.zone() {
        ZoneSel::Large => (crate::spectral::Zone::Large, "residual_large", residual_large),
        _ => (crate::spectral::Zone::Small, "residual_small", residual_small),
    };
    let zs = cfg.samples().grid();
    let mut csv = format!("z,{label}");
    let mut rows = String::new();
    let mut samples = Vec::with_capacity(zs.len());
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for (i, &z) in zs.iter().enumerate() {
        let rep = verify_step_identities(z, zone)?;
        if i == 0 {
            for c in &rep.checks {
                let _ = write!(csv, ",{}", c.name);
            }
            csv.push('\n');
        }
        let r = residual(z)?;
        samples.push((z, r));
        let mut cells = vec![z, r];
        for c in &rep.checks {
            cells.push(c.max_abs_error);
            worst = worst.max(c.max_abs_error);
            exact &= c.exact;
        }
        rows.push_str(&row(&cells));
    }
    csv.push_str(&rows);
    let fit = slope_fit(&samples, (cfg.samples().min, cfg.samples().max))?;
    let slope_check = if zone == crate::spectral::Zone::Large {
        Check::at_most("residual_large slope", LARGE_SLOPE_MAX, fit.slope)
    } else {
        Check::at_least("residual_small slope", SMALL_SLOPE_MIN, fit.slope)
    };
    let checks = vec![
        slope_check,
        Check::at_most("step identities (max abs error)", crate::cascade::IDENTITY_TOL, worst),
        Check::at_least("step identities exact", 1.0, if exact { 1.0 } else { 0.0 }),
    ];
    Ok(RunOutput {
        csv,
        summary: json!({
            "residual_slope": fit.slope,
            "max_identity_error": worst,
            "identities_exact": exact,
        }),
        checks,
    })
}

fn run_pointwise(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let tau = log_space(1e-2, cfg.tau_max, 12);
    let rep = pointwise_rate(&cfg.samples().grid(), &tau)?;
    let mut csv = String::from("z,min_Re_eig,rho,ratio,max_operator_ratio\n");
    for r in &rep.rows {
        csv.push_str(&row(&[r.z, r.min_re_eig, r.rho, r.ratio, r.max_operator_ratio]));
    }
    let worst = rep.rows.iter().map(|r| r.max_operator_ratio).fold(0.0, f64::max);
    let min_re = rep.rows.iter().map(|r| r.min_re_eig).fold(f64::INFINITY, f64::min);
    let (_, low) = rate_ratio(1e-5)?;
    let (_, high) = rate_ratio(1e5)?;
    let checks = vec![
        Check::at_least("min Re eigenvalue > 0", f64::MIN_POSITIVE, min_re),
        Check::at_least("c* lower bound", C_STAR_MIN, rep.c_star),
        Check::within("ratio limit z -> 0", 1.0, low, RATIO_TOL),
        Check::within("ratio limit z -> inf", 0.5, high, 0.5 * RATIO_TOL),
        Check::at_most("operator-norm ratio", OPERATOR_BOUND, worst),
    ];
    Ok(RunOutput {
        csv,
        summary: json!({
            "c_star": rep.c_star,
            "argmin_z": rep.argmin_z,
            "ratio_small_z": low,
            "ratio_large_z": high,
            "max_operator_ratio": worst,
        }),
        checks,
    })
}

fn zone_csv(header: &str, series: &ZoneSeries) -> String {
    let mut csv = format!("{header}\n");
    for (t, p) in series.t.iter().zip(&series.parts) {
        csv.push_str(&row(&[*t, p.int, p.bdd, p.ext, p.total()]));
    }
    csv
}

fn select_checks(checks: Vec<Check>, zone: ZoneSel) -> Vec<Check> {
    let key = match zone {
        ZoneSel::All => return checks,
        ZoneSel::Small => "small-zone",
        ZoneSel::Bounded => "bounded-zone",
        ZoneSel::Large => "large-zone",
    };
    checks
        .into_iter()
        .filter(|c| c.name.starts_with(key) || c.name.starts_with("grid"))
        .collect()
}

fn run_decay(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let rep = decay_experiment(cfg.n, cfg.s, &cfg.experiment_grid()?)?;
    let q = homogeneous_dimension(cfg.n) as f64;
    let summary = json!({
        "n": cfg.n,
        "s": cfg.s,
        "homogeneous_dimension": q,
        "fitted_slope": rep.small.fit.slope,
        "expected_slope": -q / 4.0,
        "norm_slope": rep.small.norm_slope(),
        "large_fitted_slope": rep.large.as_ref().map(|c| c.fit.slope),
        "large_norm_slope": rep.large.as_ref().map(|c| c.norm_slope()),
        "bounded_rate": rep.bounded_rate,
        "resolution_change": rep.resolution_change,
    });
    Ok(RunOutput {
        csv: zone_csv("t,E_int,E_bdd,E_ext,E_total", &rep.series),
        summary,
        checks: select_checks(rep.checks, cfg.zone()),
    })
}

fn run_profiles(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let rep = profile_experiment(cfg.n, cfg.s, &cfg.experiment_grid()?)?;
    let q = homogeneous_dimension(cfg.n) as f64;
    let d = &rep.difference;
    let gained = rep.checks.iter().filter(|c| c.name.contains("gain")).all(|c| c.passed);
    let summary = json!({
        "n": cfg.n,
        "s": cfg.s,
        "fitted_slope": d.small.fit.slope,
        "expected_slope": -q / 4.0 - 0.5,
        "norm_slope": d.small.norm_slope(),
        "plain_norm_slope": rep.plain_small_slope,
        "gain": rep.gain,
        "gained_rate": gained,
        "large_norm_slope": d.large.as_ref().map(|c| c.norm_slope()),
        "bounded_rate": d.bounded_rate,
        "resolution_change": d.resolution_change,
    });
    Ok(RunOutput {
        csv: zone_csv("t,J_int,J_bdd,J_ext,J_total", &d.series),
        summary,
        checks: select_checks(rep.checks, cfg.zone()),
    })
}

fn run_euclid(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let grid = cfg.euclid_grid();
    let times = cfg.time_grid();
    let samples = times
        .times()?
        .into_iter()
        .map(|t| Ok((t, euclid_energy(t, EuclidData::Bounded, &grid)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("t,E\n");
    for &(t, e) in &samples {
        csv.push_str(&row(&[t, e]));
    }
    let curve = crate::plancherel::EnergyCurve::fit(samples, times.window)?;
    let expected = -(cfg.n as f64) / 8.0 - cfg.r / 4.0;
    let mismatch = key_function_mismatch(&log_space(1e-3, 1e3, 61));
    let checks = vec![
        Check::within("low-frequency norm slope (-n/8 - r/4)", expected, curve.norm_slope(), 0.03),
        Check::at_most("key function identity", 0.0, mismatch),
    ];
    Ok(RunOutput {
        csv,
        summary: json!({
            "n": cfg.n,
            "r": cfg.r,
            "fitted_slope": curve.fit.slope,
            "expected_slope": 2.0 * expected,
            "norm_slope": curve.norm_slope(),
        }),
        checks,
    })
}

/// JSON report: resolved config, tool version, summary and gates.
pub fn report_json(cfg: &ExperimentConfig, out: &RunOutput) -> String {
    let value = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "summary": out.summary,
        "checks": out.checks,
        "passed": out.passed(),
    });
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    text
}

/// Runs `cfg` on a pool of the configured size.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| usage(format!("thread pool: {e}")))?;
    pool.install(|| execute(cfg))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidThresholds { .. } => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

/// Parses `args`, runs, writes outputs and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let file = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        None => None,
    };
    let cfg = match cli.resolve(file.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &out.csv),
        None => {
            print!("{}", out.csv);
            Ok(())
        }
    }
    .and_then(|_| match &cfg.report {
        Some(path) => std::fs::write(path, report_json(&cfg, &out)),
        None => Ok(()),
    });
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_NUMERIC;
    }
    for c in &out.checks {
        eprintln!(
            "{} {}: measured {:.6e}, expected {:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.expected
        );
    }
    if out.passed() {
        EXIT_PASS
    } else {
        EXIT_GATE_FAILED
    }
}
