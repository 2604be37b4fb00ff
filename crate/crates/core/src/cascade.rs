//! Diagonalization cascades of `A(z)` in the small and large zones.
//!
//! Every matrix is stored symbolically: a finite sum of exact complex
//! rational 3×3 matrices, each multiplying a half-integer power `z^{h/2}`.
//! The step identities are checked exactly on the symbols and numerically at
//! the requested `z`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix3, C64};
use crate::spectral::Zone;
use crate::system::assemble_a;

/// Absolute tolerance of the numeric identity checks.
pub const IDENTITY_TOL: f64 = 1e-12;

pub type Exact = Complex<Ratio<i64>>;

fn ex(re: i64, im: i64) -> Exact {
    Complex::new(Ratio::from_integer(re), Ratio::from_integer(im))
}

fn to_c64(x: &Exact) -> C64 {
    C64::new(
        x.re.to_f64().unwrap_or(f64::NAN),
        x.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// 3×3 matrix over the Gaussian rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix(pub [[Exact; 3]; 3]);

impl ExactMatrix {
    pub fn zero() -> Self {
        Self(std::array::from_fn(|_| std::array::from_fn(|_| Exact::zero())))
    }

    pub fn identity() -> Self {
        Self::diag([ex(1, 0), ex(1, 0), ex(1, 0)])
    }

    pub fn diag(d: [Exact; 3]) -> Self {
        let mut m = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    /// `(1/den) · [[re + i·im]]`.
    pub fn from_gaussian(den: i64, rows: [[(i64, i64); 3]; 3]) -> Self {
        let d = Ratio::from_integer(den);
        Self(rows.map(|r| r.map(|(re, im)| Exact::new(Ratio::from_integer(re) / d, Ratio::from_integer(im) / d))))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_zero())
    }

    pub fn to_numeric(&self) -> ComplexMatrix3 {
        ComplexMatrix3(self.0.map(|r| r.map(|x| to_c64(&x))))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.clone() * other.clone() - other.clone() * self.clone()
    }
}

impl Add for ExactMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl Sub for ExactMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}

impl Neg for ExactMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|r| r.map(|x| -x)))
    }
}

impl Mul for ExactMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).fold(Exact::zero(), |acc, k| acc + self.0[i][k] * rhs.0[k][j])
            })
        }))
    }
}

/// `Σ_h C_h z^{h/2}` with exact coefficients `C_h`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolicMatrix {
    terms: BTreeMap<i32, ExactMatrix>,
}

impl SymbolicMatrix {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `coefficient · z^{half_power/2}`.
    pub fn term(half_power: i32, coefficient: ExactMatrix) -> Self {
        let mut s = Self::zero();
        s.insert(half_power, coefficient);
        s
    }

    pub fn constant(coefficient: ExactMatrix) -> Self {
        Self::term(0, coefficient)
    }

    fn insert(&mut self, h: i32, c: ExactMatrix) {
        let merged = match self.terms.remove(&h) {
            Some(prev) => prev + c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(h, merged);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, half_power: i32) -> ExactMatrix {
        self.terms
            .get(&half_power)
            .cloned()
            .unwrap_or_else(ExactMatrix::zero)
    }

    pub fn half_powers(&self) -> Vec<i32> {
        self.terms.keys().copied().collect()
    }

    pub fn eval(&self, z: f64) -> ComplexMatrix3 {
        let s = z.sqrt();
        self.terms
            .iter()
            .fold(ComplexMatrix3::zero(), |acc, (&h, c)| {
                acc + c.to_numeric().scale_re(s.powi(h))
            })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.clone() * other.clone() - other.clone() * self.clone()
    }
}

impl Add for SymbolicMatrix {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (h, c) in rhs.terms {
            self.insert(h, c);
        }
        self
    }
}

impl Neg for SymbolicMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            terms: self.terms.into_iter().map(|(h, c)| (h, -c)).collect(),
        }
    }
}

impl Sub for SymbolicMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for SymbolicMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for (ha, a) in &self.terms {
            for (hb, b) in &rhs.terms {
                out.insert(ha + hb, a.clone() * b.clone());
            }
        }
        out
    }
}

fn k(c: &ExactMatrix) -> SymbolicMatrix {
    SymbolicMatrix::constant(c.clone())
}

fn exact_system(m: ComplexMatrix3) -> ExactMatrix {
    // Entries of A₀, A₁, A₂ are multiples of 1/2.
    ExactMatrix(m.0.map(|r| {
        r.map(|x| {
            Exact::new(
                Ratio::new((x.re * 2.0).round() as i64, 2),
                Ratio::new((x.im * 2.0).round() as i64, 2),
            )
        })
    }))
}

pub fn exact_a0() -> ExactMatrix {
    exact_system(crate::system::a0())
}

pub fn exact_a1() -> ExactMatrix {
    exact_system(crate::system::a1())
}

pub fn exact_a2() -> ExactMatrix {
    exact_system(crate::system::a2())
}

/// Small-zone cascade symbols.
#[derive(Debug, Clone)]
pub struct SmallCoefficients {
    pub t1: ExactMatrix,
    pub t1_inv: ExactMatrix,
    /// `N₂ … N₅` as symbols in `z`.
    pub n: [SymbolicMatrix; 4],
    pub lambda0: ExactMatrix,
    pub lambda2: ExactMatrix,
    pub lambda4: ExactMatrix,
}

/// Coefficient of `N₅` with the sign of its off-diagonal entries flipped;
/// it breaks identity (iv).
pub fn n5_flipped_coefficient() -> ExactMatrix {
    ExactMatrix::from_gaussian(8, [[(0, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (-1, 3)], [(0, 0), (-1, -3), (0, 0)]])
}

impl SmallCoefficients {
    pub fn standard() -> Self {
        let t1 = ExactMatrix::from_gaussian(1, [[(-1, 0), (0, -1), (0, 1)], [(1, 0), (0, -1), (0, 1)], [(0, 0), (1, 0), (1, 0)]]);
        let t1_inv = ExactMatrix::from_gaussian(4, [[(-2, 0), (2, 0), (0, 0)], [(0, 1), (0, 1), (2, 0)], [(0, -1), (0, -1), (2, 0)]]);
        let n2 = ExactMatrix::from_gaussian(2, [[(0, 0), (-2, 0), (-2, 0)], [(1, 0), (0, 0), (0, 0)], [(1, 0), (0, 0), (0, 0)]]);
        let n3 = ExactMatrix::from_gaussian(4, [[(0, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (-1, 1)], [(0, 0), (-1, -1), (0, 0)]]);
        let n4 = ExactMatrix::from_gaussian(2, [[(0, 0), (0, -2), (0, 2)], [(0, 1), (0, 0), (0, 0)], [(0, -1), (0, 0), (0, 0)]]);
        let n5 = ExactMatrix::from_gaussian(8, [[(0, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (1, -3)], [(0, 0), (1, 3), (0, 0)]]);
        Self {
            t1,
            t1_inv,
            n: [
                SymbolicMatrix::term(1, n2),
                SymbolicMatrix::term(2, n3),
                SymbolicMatrix::term(3, n4),
                SymbolicMatrix::term(4, n5),
            ],
            lambda0: ExactMatrix::diag([ex(0, 0), ex(0, 1), ex(0, -1)]),
            lambda2: ExactMatrix::from_gaussian(2, [[(0, 0), (0, 0), (0, 0)], [(0, 0), (1, 1), (0, 0)], [(0, 0), (0, 0), (1, -1)]]),
            lambda4: ExactMatrix::from_gaussian(4, [[(4, 0), (0, 0), (0, 0)], [(0, 0), (-2, -1), (0, 0)], [(0, 0), (0, 0), (-2, 1)]]),
        }
    }

    /// Same symbols with the sign-flipped `N₅`.
    pub fn flipped_n5() -> Self {
        let mut c = Self::standard();
        c.n[3] = SymbolicMatrix::term(4, n5_flipped_coefficient());
        c
    }

    fn nc(&self, j: usize) -> ExactMatrix {
        self.n[j - 2].coefficient(j as i32 - 1)
    }

    /// `A₁⁽¹⁾ = T₁⁻¹A₁T₁`.
    pub fn a1_1(&self) -> ExactMatrix {
        self.t1_inv.clone() * exact_a1() * self.t1.clone()
    }

    /// `A₂⁽¹⁾ = T₁⁻¹A₂T₁`.
    pub fn a2_1(&self) -> ExactMatrix {
        self.t1_inv.clone() * exact_a2() * self.t1.clone()
    }

    /// Coefficient of `z` after the second conjugation.
    pub fn a1_2(&self) -> ExactMatrix {
        self.a1_1() * self.nc(2) + self.a2_1()
    }

    /// Coefficient of `z^{3/2}` after the third conjugation.
    pub fn a1_3(&self) -> ExactMatrix {
        let (a11, a21, n2) = (self.a1_1(), self.a2_1(), self.nc(2));
        a21.clone() * n2.clone() - n2.clone() * a11 * n2.clone() - n2 * a21
    }

    /// Coefficient of `z²` after the fourth conjugation.
    pub fn a1_4(&self) -> ExactMatrix {
        let (a11, a21, n2, n3) = (self.a1_1(), self.a2_1(), self.nc(2), self.nc(3));
        let n2sq = n2.clone() * n2.clone();
        self.a1_2() * n3.clone() - n3 * self.lambda2.clone()
            + n2sq.clone() * a11 * n2.clone()
            + n2sq * a21.clone()
            - n2.clone() * a21 * n2
    }

    /// The four small-zone step identities as `(name, lhs - rhs)` symbols.
    pub fn step_identities(&self) -> Vec<(&'static str, SymbolicMatrix)> {
        let l0 = k(&self.lambda0);
        vec![
            (
                "(i) A1(1) z^1/2 - [N2,L0] = 0",
                SymbolicMatrix::term(1, self.a1_1()) - self.n[0].commutator(&l0),
            ),
            (
                "(ii) A1(2) z - [N3,L0] = L2 z",
                SymbolicMatrix::term(2, self.a1_2())
                    - self.n[1].commutator(&l0)
                    - SymbolicMatrix::term(2, self.lambda2.clone()),
            ),
            (
                "(iii) A1(3) z^3/2 - [N4,L0] = 0",
                SymbolicMatrix::term(3, self.a1_3()) - self.n[2].commutator(&l0),
            ),
            (
                "(iv) A1(4) z^2 - [N5,L0] = L4 z^2",
                SymbolicMatrix::term(4, self.a1_4())
                    - self.n[3].commutator(&l0)
                    - SymbolicMatrix::term(4, self.lambda4.clone()),
            ),
        ]
    }

    /// `Λ(z) = Λ₀ + Λ₂z + Λ₄z²`.
    pub fn lambda(&self) -> SymbolicMatrix {
        k(&self.lambda0)
            + SymbolicMatrix::term(2, self.lambda2.clone())
            + SymbolicMatrix::term(4, self.lambda4.clone())
    }
}

/// Large-zone cascade symbols.
#[derive(Debug, Clone)]
pub struct LargeCoefficients {
    pub t1: ExactMatrix,
    pub t1_inv: ExactMatrix,
    /// `Ñ₂ … Ñ₅` as symbols in `z`.
    pub n: [SymbolicMatrix; 4],
    pub lambda0: ExactMatrix,
    pub lambda1: ExactMatrix,
    pub lambda4: ExactMatrix,
}

impl LargeCoefficients {
    pub fn standard() -> Self {
        let t1 = ExactMatrix::from_gaussian(1, [[(0, 1), (0, -1), (0, 0)], [(1, 0), (1, 0), (0, 0)], [(0, 0), (0, 0), (1, 0)]]);
        let t1_inv = ExactMatrix::from_gaussian(2, [[(0, -1), (1, 0), (0, 0)], [(0, 1), (1, 0), (0, 0)], [(0, 0), (0, 0), (2, 0)]]);
        let n2 = ExactMatrix::from_gaussian(2, [[(0, 0), (0, 0), (1, -1)], [(0, 0), (0, 0), (1, 1)], [(1, 1), (1, -1), (0, 0)]]);
        let n3 = ExactMatrix::from_gaussian(2, [[(0, 0), (0, 0), (1, 1)], [(0, 0), (0, 0), (1, -1)], [(-1, 1), (-1, -1), (0, 0)]]);
        let n4 = ExactMatrix::from_gaussian(2, [[(0, 0), (0, 0), (-1, 1)], [(0, 0), (0, 0), (-1, -1)], [(-1, -1), (-1, 1), (0, 0)]]);
        let n5 = ExactMatrix::from_gaussian(4, [[(0, 0), (1, 0), (0, 0)], [(1, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (0, 0)]]);
        Self {
            t1,
            t1_inv,
            n: [
                SymbolicMatrix::term(-2, n2),
                SymbolicMatrix::term(-3, n3),
                SymbolicMatrix::term(-4, n4),
                SymbolicMatrix::term(-3, n5),
            ],
            lambda0: ExactMatrix::diag([ex(0, 0), ex(0, 0), ex(1, 0)]),
            lambda1: ExactMatrix::diag([ex(0, 1), ex(0, -1), ex(0, 0)]),
            lambda4: ExactMatrix::from_gaussian(2, [[(1, 0), (0, 0), (0, 0)], [(0, 0), (1, 0), (0, 0)], [(0, 0), (0, 0), (-2, 0)]]),
        }
    }

    fn nc(&self, j: usize) -> ExactMatrix {
        let h = [-2, -3, -4, -3][j - 2];
        self.n[j - 2].coefficient(h)
    }

    /// `Ã₀⁽¹⁾ = T̃₁⁻¹A₀T̃₁`.
    pub fn a0_1(&self) -> ExactMatrix {
        self.t1_inv.clone() * exact_a0() * self.t1.clone()
    }

    /// `Ã₋₁ = [Λ̃₁, Ñ₂]` (coefficient of `z^{-1/2}` after the second step).
    pub fn a_m1(&self) -> ExactMatrix {
        self.lambda1.commutator(&self.nc(2))
    }

    /// `Ã₋₂ = [Λ̃₁, Ñ₃] + Ã₀⁽¹⁾Ñ₂` (coefficient of `z^{-1}` after the third step).
    pub fn a_m2(&self) -> ExactMatrix {
        self.lambda1.commutator(&self.nc(3)) + self.a0_1() * self.nc(2)
    }

    /// `Ã₋₃ = Ã₋₂ − [Ñ₄, Λ̃₀]`.
    pub fn a_m3(&self) -> ExactMatrix {
        self.a_m2() - self.nc(4).commutator(&self.lambda0)
    }

    pub fn step_identities(&self) -> Vec<(&'static str, SymbolicMatrix)> {
        let l0 = k(&self.lambda0);
        let l1 = k(&self.lambda1);
        let z = SymbolicMatrix::term(2, ExactMatrix::identity());
        let sqrt_z = SymbolicMatrix::term(1, ExactMatrix::identity());
        vec![
            (
                "(v) A0(1) - [N2,L0] z = 0",
                k(&self.a0_1()) - self.n[0].commutator(&l0) * z.clone(),
            ),
            (
                "(vi) A-1 z^-1/2 - [N3,L0] z = 0",
                SymbolicMatrix::term(-1, self.a_m1()) - self.n[1].commutator(&l0) * z.clone(),
            ),
            (
                "(vii) A-2 z^-1 - [N4,L0] z = A-3 z^-1",
                SymbolicMatrix::term(-2, self.a_m2())
                    - self.n[2].commutator(&l0) * z
                    - SymbolicMatrix::term(-2, self.a_m3()),
            ),
            (
                "(viii) A-3 z^-1 - [N5,L1] z^1/2 = L4 z^-1",
                SymbolicMatrix::term(-2, self.a_m3())
                    - self.n[3].commutator(&l1) * sqrt_z
                    - SymbolicMatrix::term(-2, self.lambda4.clone()),
            ),
        ]
    }

    /// `Λ̃(z) = Λ̃₀z + Λ̃₁√z + Λ̃₄z⁻¹`.
    pub fn lambda(&self) -> SymbolicMatrix {
        SymbolicMatrix::term(2, self.lambda0.clone())
            + SymbolicMatrix::term(1, self.lambda1.clone())
            + SymbolicMatrix::term(-2, self.lambda4.clone())
    }
}

/// Numeric instance of the small-zone cascade at one `z`.
#[derive(Debug, Clone, Copy)]
pub struct CascadeSmall {
    pub z: f64,
    pub t1: ComplexMatrix3,
    /// `N₂(z) … N₅(z)`.
    pub n: [ComplexMatrix3; 4],
    /// `Λ(z)`.
    pub lambda: ComplexMatrix3,
}

/// Numeric instance of the large-zone cascade at one `z`.
#[derive(Debug, Clone, Copy)]
pub struct CascadeLarge {
    pub z: f64,
    pub t1: ComplexMatrix3,
    /// `Ñ₂(z) … Ñ₅(z)`.
    pub n: [ComplexMatrix3; 4],
    /// `Λ̃(z)`.
    pub lambda: ComplexMatrix3,
}

fn check_z(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(z))
    }
}

/// Product `T₁ T₂ ⋯ T_{upto}` with `T_j = I + N_j`.
fn chain(t1: &ComplexMatrix3, n: &[ComplexMatrix3; 4], upto: usize) -> ComplexMatrix3 {
    n[..upto - 1]
        .iter()
        .fold(*t1, |acc, nj| acc * (ComplexMatrix3::identity() + *nj))
}

fn conjugated_residual(
    t1: &ComplexMatrix3,
    n: &[ComplexMatrix3; 4],
    lambda: &ComplexMatrix3,
    z: f64,
) -> Result<f64> {
    // T_int⁻¹ = T₁T₂T₃T₄T₅, so T_int A T_int⁻¹ = P⁻¹ A P with P = T₁⋯T₅.
    let p = chain(t1, n, 5);
    let p_inv = p
        .inverse()
        .ok_or_else(|| Error::Singular(format!("cascade transform at z = {z}")))?;
    Ok((p_inv * assemble_a(z) * p - *lambda).frobenius())
}

impl CascadeSmall {
    /// `T₁⋯T_j`.
    pub fn chain(&self, j: usize) -> ComplexMatrix3 {
        chain(&self.t1, &self.n, j)
    }

    pub fn residual(&self) -> Result<f64> {
        conjugated_residual(&self.t1, &self.n, &self.lambda, self.z)
    }

    /// `T_int A T_int⁻¹`.
    pub fn conjugated(&self) -> Result<ComplexMatrix3> {
        let p = self.chain(5);
        let p_inv = p.inverse().ok_or_else(|| Error::Singular("small cascade".into()))?;
        Ok(p_inv * assemble_a(self.z) * p)
    }
}

impl CascadeLarge {
    /// `T̃₁⋯T̃_j`.
    pub fn chain(&self, j: usize) -> ComplexMatrix3 {
        chain(&self.t1, &self.n, j)
    }

    pub fn residual(&self) -> Result<f64> {
        conjugated_residual(&self.t1, &self.n, &self.lambda, self.z)
    }

    /// `T_ext A T_ext⁻¹`.
    pub fn conjugated(&self) -> Result<ComplexMatrix3> {
        let p = self.chain(5);
        let p_inv = p.inverse().ok_or_else(|| Error::Singular("large cascade".into()))?;
        Ok(p_inv * assemble_a(self.z) * p)
    }
}

/// Small-zone cascade at `z ≥ 0` (intended for `z < ε`).
pub fn build_small(z: f64) -> Result<CascadeSmall> {
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(z));
    }
    let c = SmallCoefficients::standard();
    Ok(CascadeSmall {
        z,
        t1: c.t1.to_numeric(),
        n: std::array::from_fn(|j| c.n[j].eval(z)),
        lambda: c.lambda().eval(z),
    })
}

/// Large-zone cascade at `z > 0` (intended for `z > N`).
pub fn build_large(z: f64) -> Result<CascadeLarge> {
    check_z(z)?;
    let c = LargeCoefficients::standard();
    Ok(CascadeLarge {
        z,
        t1: c.t1.to_numeric(),
        n: std::array::from_fn(|j| c.n[j].eval(z)),
        lambda: c.lambda().eval(z),
    })
}

pub fn residual_small(z: f64) -> Result<f64> {
    check_z(z)?;
    build_small(z)?.residual()
}

pub fn residual_large(z: f64) -> Result<f64> {
    build_large(z)?.residual()
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    /// The symbolic difference `lhs − rhs` vanishes identically.
    pub exact: bool,
    /// `max |lhs − rhs|` entrywise at `z`.
    pub max_abs_error: f64,
    #[serde(skip)]
    pub difference: ComplexMatrix3,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.exact && self.max_abs_error <= IDENTITY_TOL
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub z: f64,
    pub zone: Zone,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    /// First failing identity as an error.
    pub fn into_result(self) -> Result<Self> {
        if let Some(bad) = self.checks.iter().find(|c| !c.passed()) {
            return Err(Error::IdentityFailed {
                name: bad.name.to_string(),
                z: self.z,
                error: bad.max_abs_error,
            });
        }
        Ok(self)
    }
}

fn evaluate_identities(
    z: f64,
    zone: Zone,
    ids: Vec<(&'static str, SymbolicMatrix)>,
) -> IdentityReport {
    let checks = ids
        .into_iter()
        .map(|(name, diff)| {
            let difference = diff.eval(z);
            IdentityCheck {
                name,
                exact: diff.is_zero(),
                max_abs_error: difference.max_abs(),
                difference,
            }
        })
        .collect();
    IdentityReport { z, zone, checks }
}

/// Small-zone identities for an arbitrary symbol set.
pub fn verify_small_identities(coefficients: &SmallCoefficients, z: f64) -> IdentityReport {
    evaluate_identities(z, Zone::Small, coefficients.step_identities())
}

/// Checks identities (i)–(iv) for `Zone::Small` or (v)–(viii) for
/// `Zone::Large`, each to [`IDENTITY_TOL`]. The report is returned even when
/// a check fails; use [`IdentityReport::into_result`] to turn failures into
/// errors.
pub fn verify_step_identities(z: f64, zone: Zone) -> Result<IdentityReport> {
    check_z(z)?;
    match zone {
        Zone::Small => Ok(verify_small_identities(&SmallCoefficients::standard(), z)),
        Zone::Large => Ok(evaluate_identities(
            z,
            Zone::Large,
            LargeCoefficients::standard().step_identities(),
        )),
        Zone::Bounded => Err(Error::Config(
            "step identities exist only in the small and large zones".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues_general, I, ONE, ZERO};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn small_t1_inverse_and_lambda0() {
        let s = SmallCoefficients::standard();
        assert_eq!(s.t1.clone() * s.t1_inv.clone(), ExactMatrix::identity());
        assert_eq!(s.t1_inv.clone() * exact_a0() * s.t1.clone(), s.lambda0);
        assert_eq!(s.lambda0.to_numeric().diagonal(), [ZERO, I, -I]);
    }

    #[test]
    fn large_t1_inverse_and_lambda1() {
        let l = LargeCoefficients::standard();
        assert_eq!(l.t1.clone() * l.t1_inv.clone(), ExactMatrix::identity());
        assert_eq!(l.t1_inv.clone() * exact_a1() * l.t1.clone(), l.lambda1);
        assert_eq!(l.t1_inv.clone() * exact_a2() * l.t1.clone(), l.lambda0);
    }

    #[test]
    fn byproducts_match_closed_forms() {
        let s = SmallCoefficients::standard();
        let g = ExactMatrix::from_gaussian;
        assert_eq!(s.a1_1(), g(2, [[(0, 0), (0, -2), (0, 2)], [(0, -1), (0, 0), (0, 0)], [(0, 1), (0, 0), (0, 0)]]));
        assert_eq!(s.a2_1(), g(2, [[(0, 0), (0, 0), (0, 0)], [(0, 0), (1, 0), (1, 0)], [(0, 0), (1, 0), (1, 0)]]));
        assert_eq!(s.a1_2(), g(2, [[(0, 0), (0, 0), (0, 0)], [(0, 0), (1, 1), (1, 1)], [(0, 0), (1, -1), (1, -1)]]));
        assert_eq!(s.a1_3(), g(2, [[(0, 0), (2, 0), (2, 0)], [(1, 0), (0, 0), (0, 0)], [(1, 0), (0, 0), (0, 0)]]));
        assert_eq!(s.a1_4(), g(4, [[(4, 0), (0, 0), (0, 0)], [(0, 0), (-2, -1), (-3, -1)], [(0, 0), (-3, 1), (-2, 1)]]));

        let l = LargeCoefficients::standard();
        assert_eq!(l.a0_1(), g(2, [[(0, 0), (0, 0), (1, -1)], [(0, 0), (0, 0), (1, 1)], [(-1, -1), (-1, 1), (0, 0)]]));
        assert_eq!(l.a_m1(), g(2, [[(0, 0), (0, 0), (1, 1)], [(0, 0), (0, 0), (1, -1)], [(1, -1), (1, 1), (0, 0)]]));
        assert_eq!(l.a_m2(), g(2, [[(1, 0), (0, -1), (-1, 1)], [(0, 1), (1, 0), (-1, -1)], [(1, 1), (1, -1), (-2, 0)]]));
        assert_eq!(l.a_m3(), g(2, [[(1, 0), (0, -1), (0, 0)], [(0, 1), (1, 0), (0, 0)], [(0, 0), (0, 0), (-2, 0)]]));
    }

    #[test]
    fn small_zone_n_vanish_at_zero() {
        let cs = build_small(0.0).unwrap();
        for nj in cs.n {
            assert_eq!(nj, ComplexMatrix3::zero());
        }
        assert_eq!(cs.lambda.diagonal(), [ZERO, I, -I]);
    }

    #[test]
    fn large_zone_n_vanish_at_infinity() {
        let cl = build_large(1e12).unwrap();
        for nj in cl.n {
            assert!(nj.max_abs() < 1e-12);
        }
    }

    #[test]
    fn identities_hold_symbolically() {
        for (name, d) in SmallCoefficients::standard().step_identities() {
            assert!(d.is_zero(), "{name}: {d:?}");
        }
        for (name, d) in LargeCoefficients::standard().step_identities() {
            assert!(d.is_zero(), "{name}: {d:?}");
        }
    }

    #[test]
    fn identity_examples() {
        let r = verify_step_identities(0.01, Zone::Small).unwrap();
        assert_eq!(r.checks[0].difference, ComplexMatrix3::zero());

        // (iv) at z = 0.05: A₁⁽⁴⁾z² − [N₅,Λ₀] equals Λ₄ z².
        let z = 0.05f64;
        let s = SmallCoefficients::standard();
        let lhs = SymbolicMatrix::term(4, s.a1_4()) - s.n[3].commutator(&k(&s.lambda0));
        let want = [c(1.0, 0.0), c(-0.5, -0.25), c(-0.5, 0.25)].map(|x| x * z * z);
        let got = lhs.eval(z);
        for j in 0..3 {
            assert!((got[(j, j)] - want[j]).norm() < 1e-15);
        }

        // (viii) at z = 100.
        let l = LargeCoefficients::standard();
        let lhs = SymbolicMatrix::term(-2, l.a_m3())
            - l.n[3].commutator(&k(&l.lambda1)) * SymbolicMatrix::term(1, ExactMatrix::identity());
        let got = lhs.eval(100.0);
        let want = [0.005, 0.005, -0.01];
        for j in 0..3 {
            assert!((got[(j, j)] - C64::from(want[j])).norm() < 1e-15);
        }
        assert!(got[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn flipped_n5_breaks_identity_iv() {
        let r = verify_small_identities(&SmallCoefficients::flipped_n5(), 0.05);
        assert!(r.checks[..3].iter().all(IdentityCheck::passed));
        assert!(!r.checks[3].exact);
        assert!(r.clone().into_result().is_err());
        // The flipped sign also spoils the remainder order.
        let lit = SmallCoefficients::flipped_n5();
        let res = |z: f64| {
            let n = std::array::from_fn(|j| lit.n[j].eval(z));
            conjugated_residual(&lit.t1.to_numeric(), &n, &lit.lambda().eval(z), z).unwrap()
        };
        let slope = (res(1e-2) / res(1e-4)).log10() / 2.0;
        assert!(slope < 2.2, "slope {slope}");
    }

    #[test]
    fn bounded_zone_has_no_identities() {
        assert!(verify_step_identities(1.0, Zone::Bounded).is_err());
    }

    #[test]
    fn residual_examples() {
        assert!(residual_small(1e-3).unwrap() < residual_small(1e-2).unwrap());
        assert!(residual_small(1e-4).unwrap() / 1e-8 < 0.1);
        assert!(residual_large(1e4).unwrap() < residual_large(1e2).unwrap());
        assert!(residual_large(1e3).unwrap() * 1e3 < 0.1);
    }

    #[test]
    fn similarity_preserves_spectrum() {
        for z in [1e-3, 0.02, 0.09] {
            let b = build_small(z).unwrap().conjugated().unwrap();
            let mut got = eigenvalues_general(&b);
            let mut want = crate::system::raw_eigenvalues(z).unwrap();
            for v in [&mut got, &mut want] {
                v.sort_by(|a, b| (a.im, a.re).partial_cmp(&(b.im, b.re)).unwrap());
            }
            for j in 0..3 {
                assert!((got[j] - want[j]).norm() < 1e-9, "z={z}");
            }
        }
        let b = build_large(50.0).unwrap().conjugated().unwrap();
        let tr = b.trace();
        assert!((tr - C64::from(50.0)).norm() < 1e-9);
        assert!((ONE - ONE).norm() == 0.0);
    }
}
