//! The 3×3 system matrix `A(z)`, its characteristic cubic and branch-labelled
//! eigenvalues.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{monic_cubic_roots, ComplexMatrix3, C64};
use crate::profiles::TruncatedEigen;

/// Residual gate for polished roots (relative to the size of the terms).
pub const ROOT_RESIDUAL_GATE: f64 = 1e-8;
/// Anchor of the small-z family.
pub const SMALL_ANCHOR: f64 = 1e-6;
/// Anchor of the large-z family.
pub const LARGE_ANCHOR: f64 = 1e6;
/// Targets with `z <= FAMILY_SPLIT` are tracked from the small anchor, the
/// others from the large anchor. Equal to `sqrt(eps N)` for the default zones.
pub const FAMILY_SPLIT: f64 = 1.0;
/// Geometric step of the continuation path (eight steps per decade).
const TRACK_STEP: f64 = 1.333_521_432_163_324; // 10^(1/8)

pub fn a0() -> ComplexMatrix3 {
    ComplexMatrix3::from_real([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [-0.5, -0.5, 0.0]])
}

pub fn a1() -> ComplexMatrix3 {
    ComplexMatrix3::from_real([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
}

pub fn a2() -> ComplexMatrix3 {
    ComplexMatrix3::from_real([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
}

/// `A(z) = A₀ + A₁ √z + A₂ z`.
pub fn assemble_a(z: f64) -> ComplexMatrix3 {
    assert!(z >= 0.0, "assemble_a needs z >= 0, got {z}");
    let s = z.sqrt();
    ComplexMatrix3::from_real([
        [0.0, -s, 1.0],
        [s, 0.0, 1.0],
        [-0.5, -0.5, z],
    ])
}

/// Coefficients `(c₃, c₂, c₁, c₀)` of `det(A(z) - λI) = c₃λ³ + c₂λ² + c₁λ + c₀`.
pub fn char_poly_coeffs(z: f64) -> [f64; 4] {
    [-1.0, z, -(1.0 + z), z * z]
}

pub fn char_poly_eval(z: f64, lam: C64) -> C64 {
    let [c3, c2, c1, c0] = char_poly_coeffs(z);
    ((lam * c3 + c2) * lam + c1) * lam + c0
}

fn relative_residual(z: f64, lam: C64) -> f64 {
    let scale = lam.norm().powi(3) + z * lam.norm_sqr() + (1.0 + z) * lam.norm() + z * z;
    char_poly_eval(z, lam).norm() / scale
}

/// Unlabelled roots of the characteristic cubic, Newton polished and gated.
pub fn raw_eigenvalues(z: f64) -> Result<[C64; 3]> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(z));
    }
    let roots = monic_cubic_roots(C64::from(-z), C64::from(1.0 + z), C64::from(-z * z));
    let residual = roots
        .iter()
        .map(|&r| relative_residual(z, r))
        .fold(0.0, f64::max);
    if !(residual <= ROOT_RESIDUAL_GATE) {
        return Err(Error::RootNotConverged { z, residual });
    }
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchFamily {
    /// Branch 1 near `z²`, branches 2/3 near `±i`.
    Small,
    /// Branches 1/2 near `±i√z`, branch 3 near `z`.
    Large,
}

/// Three eigenvalues of `A(z)` in the branch order of the asymptotic
/// expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub z: f64,
    pub values: [C64; 3],
    pub family: BranchFamily,
}

impl EigenTriple {
    pub fn min_re(&self) -> f64 {
        self.values.iter().map(|l| l.re).fold(f64::INFINITY, f64::min)
    }
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Reorders `roots` so that `out[j]` is the root closest to `reference[j]`,
/// minimising the total squared distance over all six assignments.
pub fn match_to(reference: &[C64; 3], roots: &[C64; 3]) -> [C64; 3] {
    let cost = |p: &[usize; 3]| -> f64 {
        (0..3).map(|j| (roots[p[j]] - reference[j]).norm_sqr()).sum()
    };
    let best = PERMUTATIONS
        .iter()
        .min_by(|a, b| cost(a).total_cmp(&cost(b)))
        .expect("non-empty");
    [roots[best[0]], roots[best[1]], roots[best[2]]]
}

/// Branch-labelled eigenvalues, tracked by continuity from the anchor of the
/// family that `z` belongs to.
pub fn eigenvalues(z: f64) -> Result<EigenTriple> {
    let roots = raw_eigenvalues(z)?;
    let (family, anchor) = if z <= FAMILY_SPLIT {
        (BranchFamily::Small, SMALL_ANCHOR.min(z))
    } else {
        (BranchFamily::Large, LARGE_ANCHOR.max(z))
    };
    let expansion = match family {
        BranchFamily::Small => TruncatedEigen::SmallPrincipal,
        BranchFamily::Large => TruncatedEigen::LargePrincipal,
    };
    let mut labelled = match_to(&expansion.values(anchor), &raw_eigenvalues(anchor)?);
    let mut w = anchor;
    loop {
        let next = if z > anchor {
            (w * TRACK_STEP).min(z)
        } else {
            (w / TRACK_STEP).max(z)
        };
        if next == w {
            break;
        }
        w = next;
        let here = if w == z { roots } else { raw_eigenvalues(w)? };
        labelled = match_to(&labelled, &here);
    }
    Ok(EigenTriple {
        z,
        values: labelled,
        family,
    })
}

/// Largest error of the labelled eigenvalues against the principal
/// expansion of their family.
pub fn asymptotic_error(triple: &EigenTriple) -> f64 {
    let expansion = match triple.family {
        BranchFamily::Small => TruncatedEigen::SmallPrincipal,
        BranchFamily::Large => TruncatedEigen::LargePrincipal,
    };
    let approx = expansion.values(triple.z);
    (0..3)
        .map(|j| (triple.values[j] - approx[j]).norm())
        .fold(0.0, f64::max)
}
