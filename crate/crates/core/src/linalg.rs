//! Dense complex algebra for 2×2 operators and 4×4 superoperators.
//!
//! Superoperators act on column-stacked matrices:
//! `vec(X) = [X00, X10, X01, X11]`, so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Default tolerance for hermiticity, trace and positivity checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        Mat2([
            [C64::from(rows[0][0]), C64::from(rows[0][1])],
            [C64::from(rows[1][0]), C64::from(rows[1][1])],
        ])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2::from_real([[a, 0.0], [0.0, b]])
    }

    pub const fn sigma_x() -> Self {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn sigma_y() -> Self {
        Mat2([[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]])
    }

    pub const fn sigma_z() -> Self {
        Mat2([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// Lowering operator |0⟩⟨1| (excited |1⟩ decays to ground |0⟩).
    pub const fn lowering() -> Self {
        Mat2([[ZERO, ONE], [ZERO, ZERO]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let m = &self.0;
        Mat2([[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]])
    }

    pub fn entries(&self) -> impl Iterator<Item = C64> + '_ {
        self.0.iter().flat_map(|row| row.iter().copied())
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Mat2, tol: f64) -> bool {
        (*self - *other).max_abs() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Mat2) -> Mat2 {
        *self * *other + *other * *self
    }

    /// Column-stacked vectorization.
    pub fn vec(&self) -> [C64; 4] {
        let m = &self.0;
        [m[0][0], m[1][0], m[0][1], m[1][1]]
    }

    pub fn unvec(v: [C64; 4]) -> Self {
        Mat2([[v[0], v[2]], [v[1], v[3]]])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, rhs: Mat2) {
        *self = *self + rhs;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.map(|z| -z)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &Mat2) -> Mat2 {
    (*m + m.adjoint()).scale_re(0.5)
}

/// Both eigenvalues of a Hermitian 2×2 matrix, ascending, from trace and determinant.
pub fn hermitian_eigenvalues(m: &Mat2) -> (f64, f64) {
    let h = hermitize(m);
    let t = h.trace().re;
    let d = h.det().re;
    let disc = (t * t - 4.0 * d).max(0.0).sqrt();
    ((t - disc) / 2.0, (t + disc) / 2.0)
}

/// True iff both eigenvalues of the Hermitian matrix `m` are ≥ −tol.
pub fn psd_check(m: &Mat2, tol: f64) -> Result<bool> {
    if !m.is_finite() {
        return Err(Error::NumericDomain("non-finite matrix entry".into()));
    }
    if !m.is_hermitian(tol) {
        return Err(Error::ContractViolation(format!(
            "matrix is not Hermitian within {tol:e}"
        )));
    }
    let (lo, _) = hermitian_eigenvalues(m);
    Ok(lo >= -tol)
}

/// A linear map on 2×2 matrices in the column-stacked representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperOp4(pub [[C64; 4]; 4]);

impl SuperOp4 {
    pub const fn zero() -> Self {
        SuperOp4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ONE;
        }
        SuperOp4(m)
    }

    /// `Bᵀ ⊗ A`, the superoperator of `X ↦ A X B`.
    pub fn sandwich(a: &Mat2, b: &Mat2) -> Self {
        let bt = b.transpose();
        let mut m = [[ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[2 * i + k][2 * j + l] = bt.0[i][j] * a.0[k][l];
                    }
                }
            }
        }
        SuperOp4(m)
    }

    /// `X ↦ A X`.
    pub fn left(a: &Mat2) -> Self {
        Self::sandwich(a, &Mat2::identity())
    }

    /// `X ↦ X B`.
    pub fn right(b: &Mat2) -> Self {
        Self::sandwich(&Mat2::identity(), b)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.0;
        out.iter_mut().flatten().for_each(|z| *z *= s);
        SuperOp4(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Induced 1-norm (max absolute column sum).
    pub fn norm1(&self) -> f64 {
        (0..4)
            .map(|j| (0..4).map(|i| self.0[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply_vec(&self, v: [C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    pub fn apply(&self, m: &Mat2) -> Mat2 {
        Mat2::unvec(self.apply_vec(m.vec()))
    }

    /// `vec(I)† L`, which vanishes for a trace-preserving generator.
    pub fn trace_row(&self) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.0[0][j] + self.0[3][j];
        }
        out
    }
}

impl Add for SuperOp4 {
    type Output = SuperOp4;
    fn add(self, rhs: SuperOp4) -> SuperOp4 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *o += *r;
        }
        SuperOp4(out)
    }
}

impl AddAssign for SuperOp4 {
    fn add_assign(&mut self, rhs: SuperOp4) {
        *self = *self + rhs;
    }
}

impl Sub for SuperOp4 {
    type Output = SuperOp4;
    fn sub(self, rhs: SuperOp4) -> SuperOp4 {
        self + rhs.scale(C64::from(-1.0))
    }
}

impl Mul for SuperOp4 {
    type Output = SuperOp4;
    fn mul(self, rhs: SuperOp4) -> SuperOp4 {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        SuperOp4(out)
    }
}

// Scaled operand norm bound and the series order that keeps the Taylor
// remainder (0.5^15 / 15!) below 1e-17.
const EXPM_NORM_BOUND: f64 = 0.5;
const EXPM_SERIES_ORDER: usize = 14;

/// `exp(generator · dt)` by scaling and squaring around a truncated Taylor series.
pub fn mat_exp(generator: &SuperOp4, dt: f64) -> Result<SuperOp4> {
    if !dt.is_finite() || !generator.is_finite() {
        return Err(Error::NumericDomain(
            "matrix exponential of non-finite input".into(),
        ));
    }
    if dt < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "propagation interval must be non-negative, got {dt}"
        )));
    }
    let a = generator.scale(C64::from(dt));
    let norm = a.norm1();
    let squarings = if norm > EXPM_NORM_BOUND {
        (norm / EXPM_NORM_BOUND).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(C64::from(2f64.powi(-squarings)));

    let mut result = SuperOp4::identity();
    let mut term = SuperOp4::identity();
    for k in 1..=EXPM_SERIES_ORDER {
        term = (term * a).scale(C64::from(1.0 / k as f64));
        result += term;
    }
    for _ in 0..squarings {
        result = result * result;
    }
    if !result.is_finite() {
        return Err(Error::NumericDomain("matrix exponential overflowed".into()));
    }
    Ok(result)
}
