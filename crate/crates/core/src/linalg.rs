//! Dense 3×3 complex linear algebra: the matrix type, inversion, spectral
//! norm, a general eigensolver and the matrix exponential.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative eigenvalue separation below which the eigendecomposition path of
/// [`expm_neg`] is abandoned in favour of Padé scaling-and-squaring.
pub const SEPARATION_GATE: f64 = 1e-6;
/// Eigenvector condition number above which both exponential paths are
/// computed and cross-checked.
pub const CONDITION_GATE: f64 = 1e6;
/// Maximum tolerated relative disagreement between the two paths.
pub const PATH_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix3(pub [[C64; 3]; 3]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector3(pub [C64; 3]);

impl StateVector3 {
    pub fn new(a: C64, b: C64, c: C64) -> Self {
        Self([a, b, c])
    }

    pub fn real(a: f64, b: f64, c: f64) -> Self {
        Self([C64::from(a), C64::from(b), C64::from(c)])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|x| x * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Sub for StateVector3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Add for StateVector3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl ComplexMatrix3 {
    pub fn zero() -> Self {
        Self([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 3])
    }

    pub fn diag(d: [C64; 3]) -> Self {
        let mut m = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        Self(rows.map(|r| r.map(C64::from)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|r| r.map(|x| x * s)))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::from(s))
    }

    pub fn diagonal(&self) -> [C64; 3] {
        [self.0[0][0], self.0[1][1], self.0[2][2]]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn adjoint(&self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[j][i].conj())
        }))
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the principal 2×2 minors.
    pub fn minor_sum(&self) -> C64 {
        let m = &self.0;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    }

    /// Cofactor inverse. `None` when the determinant is zero relative to the
    /// scale of the entries.
    pub fn inverse(&self) -> Option<Self> {
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
        let scale = self.max_abs().powi(3);
        if det.norm() <= scale * 1e-300 || det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let inv_det = det.inv();
        Some(Self(adj.map(|r| r.map(|x| x * inv_det))))
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..3)
            .map(|j| (0..3).map(|i| self.0[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm: square root of the largest eigenvalue of `MᴴM`.
    pub fn op_norm(&self) -> f64 {
        let g = self.adjoint() * *self;
        hermitian_max_eigenvalue(&g).max(0.0).sqrt()
    }

    pub fn mul_vec(&self, v: &StateVector3) -> StateVector3 {
        StateVector3(std::array::from_fn(|i| {
            self.0[i][0] * v.0[0] + self.0[i][1] * v.0[1] + self.0[i][2] * v.0[2]
        }))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }
}

impl Index<(usize, usize)> for ComplexMatrix3 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for ComplexMatrix3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl AddAssign for ComplexMatrix3 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for ComplexMatrix3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}

impl Neg for ComplexMatrix3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|r| r.map(|x| -x)))
    }
}

impl Mul for ComplexMatrix3 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j] + self.0[i][2] * rhs.0[2][j]
            })
        }))
    }
}

/// Largest eigenvalue of a Hermitian 3×3 matrix (trigonometric closed form).
fn hermitian_max_eigenvalue(h: &ComplexMatrix3) -> f64 {
    let d = [h.0[0][0].re, h.0[1][1].re, h.0[2][2].re];
    let p1 = h.0[0][1].norm_sqr() + h.0[0][2].norm_sqr() + h.0[1][2].norm_sqr();
    let q = (d[0] + d[1] + d[2]) / 3.0;
    if p1 == 0.0 {
        return d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    let p2 = d.iter().map(|x| (x - q) * (x - q)).sum::<f64>() + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return q;
    }
    let b = (*h - ComplexMatrix3::identity().scale_re(q)).scale_re(1.0 / p);
    let r = (b.det().re / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * phi.cos()
}

/// Evaluates the monic cubic `λ³ + a λ² + b λ + c` and its derivative.
fn monic_eval(a: C64, b: C64, c: C64, x: C64) -> (C64, C64) {
    let p = ((x + a) * x + b) * x + c;
    let dp = (x * 3.0 + a * 2.0) * x + b;
    (p, dp)
}

/// Roots of the monic cubic `λ³ + a λ² + b λ + c` by Cardano's formula
/// followed by Newton polishing.
pub fn monic_cubic_roots(a: C64, b: C64, c: C64) -> [C64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = a * a * a * (2.0 / 27.0) - a * b / 3.0 + c;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let sq = disc.sqrt();
    let cand1 = -q / 2.0 + sq;
    let cand2 = -q / 2.0 - sq;
    let w = if cand1.norm() >= cand2.norm() { cand1 } else { cand2 };
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = if w.norm() == 0.0 {
        [-shift; 3]
    } else {
        let u = w.powf(1.0 / 3.0);
        let mut out = [ZERO; 3];
        let mut rot = ONE;
        for r in out.iter_mut() {
            let uk = u * rot;
            let vk = -p / (uk * 3.0);
            *r = uk + vk - shift;
            rot *= omega;
        }
        out
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (f, df) = monic_eval(a, b, c, *r);
            if df.norm() == 0.0 || f.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}

/// Eigenvalues of a general complex 3×3 matrix.
pub fn eigenvalues_general(m: &ComplexMatrix3) -> [C64; 3] {
    monic_cubic_roots(-m.trace(), m.minor_sum(), -m.det())
}

/// Right eigenvector for eigenvalue `lam`: the largest cross product of two
/// rows of `M - lam I`, normalised.
pub fn eigenvector(m: &ComplexMatrix3, lam: C64) -> StateVector3 {
    let s = *m - ComplexMatrix3::identity().scale(lam);
    let rows = s.0;
    let cross = |a: [C64; 3], b: [C64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let cands = [
        cross(rows[0], rows[1]),
        cross(rows[0], rows[2]),
        cross(rows[1], rows[2]),
    ];
    let best = cands
        .iter()
        .max_by(|x, y| {
            let nx: f64 = x.iter().map(|c| c.norm_sqr()).sum();
            let ny: f64 = y.iter().map(|c| c.norm_sqr()).sum();
            nx.total_cmp(&ny)
        })
        .copied()
        .unwrap_or([ZERO; 3]);
    let v = StateVector3(best);
    let n = v.norm();
    if n == 0.0 {
        v
    } else {
        v.scale(C64::from(1.0 / n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpmPath {
    Identity,
    Eigen,
    Pade,
}

/// Eigendecomposition `M = P diag(λ) P⁻¹` of a matrix with well separated
/// eigenvalues.
#[derive(Debug, Clone, Copy)]
pub struct Eigendecomposition {
    pub values: [C64; 3],
    pub vectors: ComplexMatrix3,
    pub inverse: ComplexMatrix3,
}

impl Eigendecomposition {
    /// `None` when the eigenvalues are not separated by
    /// `SEPARATION_GATE · ‖M‖` or the eigenvector matrix is singular.
    pub fn try_new(m: &ComplexMatrix3) -> Option<Self> {
        let values = eigenvalues_general(m);
        let scale = m.frobenius().max(f64::MIN_POSITIVE);
        let sep = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| (values[i] - values[j]).norm())
            .fold(f64::INFINITY, f64::min);
        if !(sep > SEPARATION_GATE * scale) {
            return None;
        }
        let mut vectors = ComplexMatrix3::zero();
        for (j, &lam) in values.iter().enumerate() {
            let v = eigenvector(m, lam);
            for i in 0..3 {
                vectors.0[i][j] = v.0[i];
            }
        }
        let inverse = vectors.inverse()?;
        Some(Self {
            values,
            vectors,
            inverse,
        })
    }

    pub fn condition(&self) -> f64 {
        self.vectors.frobenius() * self.inverse.frobenius()
    }

    /// `P diag(f(λ)) P⁻¹`.
    pub fn apply<F: Fn(C64) -> C64>(&self, f: F) -> ComplexMatrix3 {
        let d = ComplexMatrix3::diag(self.values.map(f));
        self.vectors * d * self.inverse
    }
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// `exp(M)` by scaling and squaring with the degree-13 Padé approximant.
pub fn expm_pade(m: &ComplexMatrix3) -> Result<ComplexMatrix3> {
    let norm = m.norm_1();
    if !norm.is_finite() {
        return Err(Error::Singular("non-finite matrix in expm".into()));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = m.scale_re(0.5f64.powi(s));
    let id = ComplexMatrix3::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let b = &PADE13;
    let u_inner = a6 * (a6.scale_re(b[13]) + a4.scale_re(b[11]) + a2.scale_re(b[9]))
        + a6.scale_re(b[7])
        + a4.scale_re(b[5])
        + a2.scale_re(b[3])
        + id.scale_re(b[1]);
    let u = a * u_inner;
    let v = a6 * (a6.scale_re(b[12]) + a4.scale_re(b[10]) + a2.scale_re(b[8]))
        + a6.scale_re(b[6])
        + a4.scale_re(b[4])
        + a2.scale_re(b[2])
        + id.scale_re(b[0]);
    let q_inv = (v - u)
        .inverse()
        .ok_or_else(|| Error::Singular("Padé denominator".into()))?;
    let mut r = q_inv * (v + u);
    for _ in 0..s {
        r = r * r;
    }
    Ok(r)
}

/// `exp(-A t)`, reporting which path produced it.
pub fn expm_neg_with_path(a: &ComplexMatrix3, t: f64) -> Result<(ComplexMatrix3, ExpmPath)> {
    if t == 0.0 {
        return Ok((ComplexMatrix3::identity(), ExpmPath::Identity));
    }
    match Eigendecomposition::try_new(a) {
        Some(eig) => {
            let e = eig.apply(|lam| (-lam * t).exp());
            if eig.condition() > CONDITION_GATE || !e.is_finite() {
                let p = expm_pade(&a.scale_re(-t))?;
                let scale = p.frobenius().max(e.frobenius()).max(f64::MIN_POSITIVE);
                let disagreement = (p - e).frobenius() / scale;
                if !(disagreement <= PATH_AGREEMENT) {
                    return Err(Error::IllConditioned { disagreement });
                }
                return Ok((p, ExpmPath::Pade));
            }
            Ok((e, ExpmPath::Eigen))
        }
        None => Ok((expm_pade(&a.scale_re(-t))?, ExpmPath::Pade)),
    }
}

pub fn expm_neg(a: &ComplexMatrix3, t: f64) -> Result<ComplexMatrix3> {
    expm_neg_with_path(a, t).map(|(m, _)| m)
}
