use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid zone thresholds: eps = {eps}, N = {big_n} (need 0 < eps < N)")]
    InvalidThresholds { eps: f64, big_n: f64 },

    #[error("spectral parameter must be positive and finite, got {0}")]
    InvalidParameter(f64),

    #[error("multi-index count overflows u64 for m = {m}, n = {n}")]
    CountOverflow { m: u64, n: usize },

    #[error("weight sum diverges: exponent p = {p} must exceed dimension n = {n}")]
    Divergent { n: usize, p: f64 },

    #[error("cubic root finder did not converge at z = {z}: residual {residual:e}")]
    RootNotConverged { z: f64, residual: f64 },

    #[error("matrix exponential paths disagree by {disagreement:e} (relative)")]
    IllConditioned { disagreement: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("cascade identity `{name}` fails at z = {z}: max abs error {error:e}")]
    IdentityFailed { name: String, z: f64, error: f64 },

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("slope fit needs at least {needed} samples in window, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("non-positive sample value {value:e} at t = {t}")]
    NonPositiveSample { t: f64, value: f64 },

    #[error("pointwise rate is not positive: c* = {0:e}")]
    NonPositiveRate(f64),

    #[error("unbounded growth: operator ratio {ratio:e} exceeds {bound} at z = {z}")]
    UnboundedGrowth { z: f64, ratio: f64, bound: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
