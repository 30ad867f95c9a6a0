//! Qubit states, effect matrices, projectors and rotations.
//!
//! Basis convention: |0⟩ = |+z⟩ with σ_z|0⟩ = +|0⟩; |1⟩ is the excited level.
//! The "+" outcome of a tilted measurement is the eigenvalue +1 and coincides
//! with |0⟩ at θ = 0.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, psd_check, Mat2, C64, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Zero,
    One,
}

impl Basis {
    pub fn index(self) -> usize {
        match self {
            Basis::Zero => 0,
            Basis::One => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Basis> {
        match i {
            0 => Some(Basis::Zero),
            1 => Some(Basis::One),
            _ => None,
        }
    }

    /// ⟨σ_z⟩ of the basis state.
    pub fn z(self) -> f64 {
        match self {
            Basis::Zero => 1.0,
            Basis::One => -1.0,
        }
    }
}

/// Outcome of a two-outcome projective measurement along a tilted axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn flipped(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

fn check_finite(m: &Mat2) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::NumericDomain("non-finite matrix entry".into()))
    }
}

fn check_density(m: &Mat2, what: &str) -> Result<()> {
    check_finite(m)?;
    if !m.is_hermitian(DEFAULT_TOL) {
        return Err(Error::ContractViolation(format!("{what} is not Hermitian")));
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::ContractViolation(format!(
            "{what} has trace {tr}, expected 1"
        )));
    }
    if !psd_check(m, DEFAULT_TOL)? {
        return Err(Error::ContractViolation(format!(
            "{what} is not positive semidefinite"
        )));
    }
    Ok(())
}

/// A density matrix ρ: Hermitian, trace one, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    mat: Mat2,
}

impl QubitState {
    pub fn new(mat: Mat2) -> Result<Self> {
        check_density(&mat, "density matrix")?;
        Ok(QubitState { mat })
    }

    pub fn pure(amp0: C64, amp1: C64) -> Result<Self> {
        let norm = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "zero or non-finite state vector".into(),
            ));
        }
        let (a, b) = (amp0 / norm, amp1 / norm);
        QubitState::new(Mat2::new(
            a * a.conj(),
            a * b.conj(),
            b * a.conj(),
            b * b.conj(),
        ))
    }

    pub fn maximally_mixed() -> Self {
        QubitState {
            mat: Mat2::diag(0.5, 0.5),
        }
    }

    pub fn basis(b: Basis) -> Self {
        match b {
            Basis::Zero => QubitState {
                mat: Mat2::diag(1.0, 0.0),
            },
            Basis::One => QubitState {
                mat: Mat2::diag(0.0, 1.0),
            },
        }
    }

    pub fn mat(&self) -> &Mat2 {
        &self.mat
    }

    pub fn rho00(&self) -> f64 {
        self.mat.get(0, 0).re
    }

    pub fn rho11(&self) -> f64 {
        self.mat.get(1, 1).re
    }

    pub fn coherence(&self) -> C64 {
        self.mat.get(0, 1)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.mat.get(0, 1).norm() < tol
    }

    pub fn expectation(&self, op: &Mat2) -> f64 {
        (self.mat * *op).trace().re
    }
}

/// Diagonal state `diag(p0, 1 − p0)`.
pub fn make_diagonal_state(p0: f64) -> Result<QubitState> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidArgument(format!(
            "population p0 = {p0} outside [0, 1]"
        )));
    }
    QubitState::new(Mat2::diag(p0, 1.0 - p0))
}

/// Retrodictive effect matrix E, stored with unit trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectMatrix {
    mat: Mat2,
}

impl EffectMatrix {
    pub fn new(mat: Mat2) -> Result<Self> {
        check_density(&mat, "effect matrix")?;
        Ok(EffectMatrix { mat })
    }

    /// Rescales a positive Hermitian matrix to unit trace.
    pub fn normalized(mat: Mat2) -> Result<Self> {
        check_finite(&mat)?;
        let tr = mat.trace().re;
        if !(tr > 0.0) {
            return Err(Error::NumericDomain(format!(
                "effect matrix trace {tr} is not positive"
            )));
        }
        EffectMatrix::new(mat.scale_re(1.0 / tr))
    }

    /// E = I/2, carrying no information about later data.
    pub fn uninformative() -> Self {
        EffectMatrix {
            mat: Mat2::diag(0.5, 0.5),
        }
    }

    pub fn diagonal(e00: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&e00) {
            return Err(Error::InvalidArgument(format!(
                "E00 = {e00} outside [0, 1]"
            )));
        }
        EffectMatrix::new(Mat2::diag(e00, 1.0 - e00))
    }

    pub fn mat(&self) -> &Mat2 {
        &self.mat
    }

    pub fn e00(&self) -> f64 {
        self.mat.get(0, 0).re
    }

    pub fn e11(&self) -> f64 {
        self.mat.get(1, 1).re
    }

    /// Retrodictive Bloch component Tr(Eσ_z)/Tr(E). Diagnostic only.
    pub fn sigma_z_expectation(&self) -> f64 {
        (self.mat * Mat2::sigma_z()).trace().re / self.mat.trace().re
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        hermitian_eigenvalues(&self.mat)
    }
}

/// A measurement operator Ω_m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmElement {
    mat: Mat2,
}

impl PovmElement {
    pub fn new(mat: Mat2) -> Result<Self> {
        check_finite(&mat)?;
        Ok(PovmElement { mat })
    }

    pub fn mat(&self) -> &Mat2 {
        &self.mat
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.mat.is_hermitian(tol) && (self.mat * self.mat).approx_eq(&self.mat, tol)
    }

    /// Ω† Ω.
    pub fn effect(&self) -> Mat2 {
        self.mat.adjoint() * self.mat
    }
}

/// Checks Σ Ω†Ω = I.
pub fn check_completeness(povm: &[PovmElement], tol: f64) -> Result<()> {
    if povm.is_empty() {
        return Err(Error::ContractViolation("empty measurement family".into()));
    }
    let sum = povm.iter().fold(Mat2::zero(), |acc, o| acc + o.effect());
    if sum.approx_eq(&Mat2::identity(), tol) {
        Ok(())
    } else {
        Err(Error::ContractViolation(format!(
            "measurement operators do not resolve the identity (deviation {:e})",
            (sum - Mat2::identity()).max_abs()
        )))
    }
}

/// Measurement axis on the Bloch sphere; the azimuth is fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngle {
    theta: f64,
    phi: f64,
}

impl BlochAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "polar angle {theta} outside [0, π]"
            )));
        }
        Ok(BlochAngle { theta, phi: 0.0 })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `exp(−i·angle·σ_y/2)`.
pub fn rotation_y(angle: f64) -> Mat2 {
    let (s, c) = (angle / 2.0).sin_cos();
    Mat2::from_real([[c, -s], [s, c]])
}

/// Projector onto the ± eigenstate of the axis tilted by θ from z toward +x.
///
/// The measurement is realized by rotating the state through −θ about y and
/// then measuring σ_z, so the projector on the pre-rotation state is
/// `R_y(θ) Π_{±,z} R_y(θ)†`.
pub fn projector_theta(sign: Outcome, angle: BlochAngle) -> PovmElement {
    let pz = match sign {
        Outcome::Plus => Mat2::diag(1.0, 0.0),
        Outcome::Minus => Mat2::diag(0.0, 1.0),
    };
    let r = rotation_y(angle.theta());
    PovmElement {
        mat: r * pz * r.adjoint(),
    }
}

/// `[Π_{+,θ}, Π_{−,θ}]`.
pub fn povm_theta(angle: BlochAngle) -> [PovmElement; 2] {
    [
        projector_theta(Outcome::Plus, angle),
        projector_theta(Outcome::Minus, angle),
    ]
}

/// `[Π_{+,z}, Π_{−,z}]`.
pub fn povm_z() -> [PovmElement; 2] {
    povm_theta(BlochAngle {
        theta: 0.0,
        phi: 0.0,
    })
}

/// Eigenstate amplitudes `(⟨0|±θ⟩, ⟨1|±θ⟩)` in the real phase convention of [`rotation_y`].
pub fn eigenstate_theta(sign: Outcome, theta: f64) -> (f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    match sign {
        Outcome::Plus => (c, s),
        Outcome::Minus => (-s, c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn rotation_examples() {
        assert!(rotation_y(0.0).approx_eq(&Mat2::identity(), 0.0));

        let r = rotation_y(PI);
        let ket = [r.get(0, 0), r.get(1, 0)];
        assert!(ket[0].norm() < 1e-15);
        assert!((ket[1].norm() - 1.0).abs() < 1e-15);

        let r = rotation_y(FRAC_PI_2);
        let rho = Mat2::new(
            r.get(0, 0) * r.get(0, 0).conj(),
            r.get(0, 0) * r.get(1, 0).conj(),
            r.get(1, 0) * r.get(0, 0).conj(),
            r.get(1, 0) * r.get(1, 0).conj(),
        );
        let sz = (rho * Mat2::sigma_z()).trace().re;
        let sx = (rho * Mat2::sigma_x()).trace().re;
        assert!(sz.abs() < 1e-15);
        assert!((sx.abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_is_unitary() {
        for k in 0..50 {
            let r = rotation_y(-7.0 + 0.3 * k as f64);
            assert!((r * r.adjoint()).approx_eq(&Mat2::identity(), 1e-12));
        }
    }

    #[test]
    fn projector_examples() {
        let a = |t| BlochAngle::new(t).unwrap();
        assert!(projector_theta(Outcome::Plus, a(0.0))
            .mat()
            .approx_eq(&Mat2::diag(1.0, 0.0), 1e-15));
        assert!(projector_theta(Outcome::Plus, a(PI))
            .mat()
            .approx_eq(&Mat2::diag(0.0, 1.0), 1e-15));
        let half = Mat2::from_real([[0.5, 0.5], [0.5, 0.5]]);
        assert!(projector_theta(Outcome::Plus, a(FRAC_PI_2))
            .mat()
            .approx_eq(&half, 1e-15));
        let p = projector_theta(Outcome::Minus, a(FRAC_PI_4));
        assert!(p.is_projector(1e-12));
    }

    #[test]
    fn eigenstate_amplitudes_match_projectors() {
        for k in 0..=20 {
            let theta = PI * k as f64 / 20.0;
            for sign in [Outcome::Plus, Outcome::Minus] {
                let (a, b) = eigenstate_theta(sign, theta);
                let outer = Mat2::from_real([[a * a, a * b], [b * a, b * b]]);
                let p = projector_theta(sign, BlochAngle::new(theta).unwrap());
                assert!(p.mat().approx_eq(&outer, 1e-14));
            }
        }
    }

    #[test]
    fn diagonal_state_examples() {
        let s = make_diagonal_state(0.91).unwrap();
        assert_eq!(s.rho00(), 0.91);
        assert!((s.rho11() - 0.09).abs() < 1e-15);
        assert!(make_diagonal_state(1.0)
            .unwrap()
            .mat()
            .approx_eq(&Mat2::diag(1.0, 0.0), 0.0));
        assert_eq!(
            make_diagonal_state(0.5).unwrap(),
            QubitState::maximally_mixed()
        );
        assert!(matches!(
            make_diagonal_state(1.2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            make_diagonal_state(-0.1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn state_validation() {
        assert!(QubitState::new(Mat2::diag(0.6, 0.6)).is_err());
        assert!(QubitState::new(Mat2::diag(1.2, -0.2)).is_err());
        assert!(QubitState::new(Mat2::from_real([[0.5, 0.6], [0.6, 0.5]])).is_err());
        let s = QubitState::pure(C64::from(1.0), C64::new(0.0, 1.0)).unwrap();
        assert!(!s.is_diagonal(1e-9));
        assert!((s.expectation(&Mat2::sigma_y()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn effect_normalization() {
        let e = EffectMatrix::normalized(Mat2::diag(3.0, 1.0)).unwrap();
        assert!((e.e00() - 0.75).abs() < 1e-15);
        assert!((e.sigma_z_expectation() - 0.5).abs() < 1e-15);
        assert!(EffectMatrix::normalized(Mat2::zero()).is_err());
        assert!(BlochAngle::new(3.5).is_err());
    }
}
