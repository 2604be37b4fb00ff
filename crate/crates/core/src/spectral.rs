//! Multi-index bookkeeping for the Hermite basis, zone classification and the
//! key decay profile `rho`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::par_sum_by;

/// Default lower zone threshold (small zone is `z < eps`).
pub const DEFAULT_EPS: f64 = 0.1;
/// Default upper zone threshold (large zone is `z > N`).
pub const DEFAULT_BIG_N: f64 = 10.0;

/// Hermite multi-index `k ∈ ℕⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    k: Vec<u32>,
}

impl MultiIndex {
    /// Panics if `k` is empty (the dimension must be at least one).
    pub fn new(k: Vec<u32>) -> Self {
        assert!(!k.is_empty(), "multi-index needs dimension n >= 1");
        Self { k }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// `|k| = Σ k_j`.
    pub fn order(&self) -> u64 {
        self.k.iter().map(|&x| x as u64).sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.k
    }
}

/// Harmonic-oscillator eigenvalue `μ_k = 2|k| + n`.
pub fn mu_of(k: &MultiIndex) -> u64 {
    2 * k.order() + k.dim() as u64
}

/// `μ` for any multi-index of order `m` in dimension `n`.
pub fn mu_of_order(m: u64, n: usize) -> u64 {
    2 * m + n as u64
}

/// Homogeneous dimension `Q = 2n + 2` of the Heisenberg group `H_n`.
pub fn homogeneous_dimension(n: usize) -> usize {
    2 * n + 2
}

/// Number of `k ∈ ℕⁿ` with `|k| = m`, i.e. `binomial(m + n - 1, n - 1)`.
pub fn multiindex_count(m: u64, n: usize) -> Result<u64> {
    assert!(n >= 1, "dimension must be positive");
    let mut c: u128 = 1;
    for j in 1..n as u128 {
        c = c
            .checked_mul(m as u128 + j)
            .ok_or(Error::CountOverflow { m, n })?
            / j;
    }
    u64::try_from(c).map_err(|_| Error::CountOverflow { m, n })
}

/// Floating-point multiplicity, usable far beyond the `u64` range.
pub fn multiindex_weight(m: u64, n: usize) -> f64 {
    let mf = m as f64;
    (1..n).fold(1.0, |acc, j| acc * (mf + j as f64) / j as f64)
}

/// Key decay profile `ρ(z) = z² / (1 + z³)`.
pub fn rho(z: f64) -> f64 {
    z * z / (1.0 + z * z * z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Small,
    Bounded,
    Large,
}

/// Zone thresholds `0 < eps < N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps: f64,
    pub big_n: f64,
}

impl Thresholds {
    pub fn new(eps: f64, big_n: f64) -> Result<Self> {
        let ok = eps.is_finite() && big_n.is_finite() && eps > 0.0 && eps < big_n;
        if !ok {
            return Err(Error::InvalidThresholds { eps, big_n });
        }
        Ok(Self { eps, big_n })
    }

    pub fn zone_of(&self, z: f64) -> Zone {
        if z < self.eps {
            Zone::Small
        } else if z <= self.big_n {
            Zone::Bounded
        } else {
            Zone::Large
        }
    }

    /// Geometric midpoint of the bounded zone; used to pick the branch family.
    pub fn split(&self) -> f64 {
        (self.eps * self.big_n).sqrt()
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            big_n: DEFAULT_BIG_N,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonePoint {
    pub z: f64,
    pub zone: Zone,
    pub thresholds: Thresholds,
}

pub fn classify(z: f64, eps: f64, big_n: f64) -> Result<ZonePoint> {
    let thresholds = Thresholds::new(eps, big_n)?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(z));
    }
    Ok(ZonePoint {
        z,
        zone: thresholds.zone_of(z),
        thresholds,
    })
}

/// Truncated multiplicity-weighted sum `Σ_{|k| ≤ M} μ_k^{-p}` with a rigorous
/// bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    pub value: f64,
    pub tail_bound: f64,
    pub truncation: u64,
}

impl TailSum {
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

fn weight_term(m: u64, n: usize, p: f64) -> f64 {
    let mu = mu_of_order(m, n) as f64;
    let pow = if p.fract() == 0.0 && p.abs() < 64.0 {
        mu.powi(p as i32)
    } else {
        mu.powf(p)
    };
    multiindex_weight(m, n) / pow
}

/// Integral-comparison bound on `Σ_{m > M} binom(m+n-1, n-1) (2m+n)^{-p}`.
///
/// For `x ≥ M` and `1 ≤ j < n`, `x + j ≤ q (2x + n)` with
/// `q = 1/2 + n / (2(2M + n))`, so every term is dominated by the decreasing
/// function `q^{n-1}/(n-1)! · (2x+n)^{n-1-p}`, whose integral over `[M, ∞)` is
/// the returned value.
pub fn tail_bound(n: usize, p: f64, truncation: u64) -> f64 {
    let base = (2 * truncation + n as u64) as f64;
    let q = 0.5 + n as f64 / (2.0 * base);
    let fact: f64 = (1..n).map(|j| j as f64).product();
    let k = q.powi(n as i32 - 1) / fact;
    k * base.powf(n as f64 - p) / (2.0 * (p - n as f64))
}

pub fn tail_weight_sum(n: usize, p: f64, truncation: u64) -> Result<TailSum> {
    if n == 0 {
        return Err(Error::InvalidGrid("dimension must be positive".into()));
    }
    if !(p > n as f64) {
        return Err(Error::Divergent { n, p });
    }
    let len = usize::try_from(truncation + 1)
        .map_err(|_| Error::InvalidGrid(format!("truncation {truncation} too large")))?;
    let value = par_sum_by(len, |m| weight_term(m as u64, n, p));
    Ok(TailSum {
        value,
        tail_bound: tail_bound(n, p, truncation),
        truncation,
    })
}

/// Smallest power-of-two truncation whose tail bound drops below
/// `rel_tol` times the partial sum, capped at `max_truncation`.
pub fn auto_truncation(n: usize, p: f64, rel_tol: f64, max_truncation: u64) -> Result<u64> {
    if !(p > n as f64) {
        return Err(Error::Divergent { n, p });
    }
    // The partial sum only grows with M, so a cheap lower bound suffices.
    let floor = (0..=64u64).map(|m| weight_term(m, n, p)).sum::<f64>();
    let mut m = 64u64;
    while tail_bound(n, p, m) > rel_tol * floor {
        if m >= max_truncation {
            return Err(Error::InvalidGrid(format!(
                "k-truncation would exceed {max_truncation} for tail tolerance {rel_tol:e}"
            )));
        }
        m = (m * 2).min(max_truncation);
    }
    Ok(m)
}
