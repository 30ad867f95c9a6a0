//! Gaussian model of the dispersive readout signal and of projective
//! measurement infidelity.
//!
//! The integrated probe signal ξ is normalized to means +1 (|0⟩) and −1 (|1⟩)
//! with a common width σ. Its likelihood ratio then reduces to a logistic
//! function of 2ξ/σ², which is evaluated in log-odds form so that large |ξ|
//! saturates instead of overflowing.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, DEFAULT_TOL};
use crate::states::{Basis, EffectMatrix, Outcome, QubitState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutChannel {
    sigma: f64,
}

impl ReadoutChannel {
    pub const MEAN_PLUS: f64 = 1.0;
    pub const MEAN_MINUS: f64 = -1.0;

    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "readout width sigma = {sigma} must be positive and finite"
            )));
        }
        Ok(ReadoutChannel { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self, z: Basis) -> f64 {
        match z {
            Basis::Zero => Self::MEAN_PLUS,
            Basis::One => Self::MEAN_MINUS,
        }
    }

    /// ln P(ξ|z) up to the shared normalization constant.
    pub fn log_likelihood(&self, xi: f64, z: Basis) -> f64 {
        let d = xi - self.mean(z);
        -d * d / (2.0 * self.sigma * self.sigma)
    }

    /// ln[P(ξ|0)/P(ξ|1)] = 2ξ/σ².
    pub fn log_odds(&self, xi: f64) -> f64 {
        2.0 * xi / (self.sigma * self.sigma)
    }
}

/// Draws ξ for a qubit sitting in `true_z` during the probe.
pub fn sample_xi<R: Rng + ?Sized>(channel: &ReadoutChannel, true_z: Basis, rng: &mut R) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    channel.mean(true_z) + channel.sigma * n
}

/// Like [`sample_xi`], but an excited qubit may relax to |0⟩ partway through a
/// probe of length `probe_time`; the signal mean is the time-average of ±1.
pub fn sample_xi_with_decay<R: Rng + ?Sized>(
    channel: &ReadoutChannel,
    true_z: Basis,
    probe_time: f64,
    t1: f64,
    rng: &mut R,
) -> f64 {
    let mean = match true_z {
        Basis::Zero => ReadoutChannel::MEAN_PLUS,
        Basis::One => {
            let tau: f64 = Exp::new(1.0 / t1)
                .map(|d| d.sample(rng))
                .unwrap_or(f64::INFINITY);
            if tau < probe_time {
                1.0 - 2.0 * tau / probe_time
            } else {
                ReadoutChannel::MEAN_MINUS
            }
        }
    };
    let n: f64 = StandardNormal.sample(rng);
    mean + channel.sigma * n
}

/// `1 / (1 + e^{−x})` without overflow.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// E00 = P(ξ|0) / [P(ξ|0) + P(ξ|1)].
pub fn e00_from_xi(channel: &ReadoutChannel, xi: f64) -> f64 {
    logistic(channel.log_odds(xi))
}

/// Inverse of [`e00_from_xi`]: the signal value that yields a given E00.
pub fn xi_from_e00(channel: &ReadoutChannel, e00: f64) -> f64 {
    0.5 * channel.sigma * channel.sigma * (e00 / (1.0 - e00)).ln()
}

/// Diagonal, unit-trace effect matrix inferred from a single probe signal.
pub fn effect_from_xi(channel: &ReadoutChannel, xi: f64) -> Result<EffectMatrix> {
    if !xi.is_finite() {
        return Err(Error::NumericDomain(format!(
            "signal value {xi} is not finite"
        )));
    }
    let e00 = e00_from_xi(channel, xi);
    EffectMatrix::new(Mat2::diag(e00, 1.0 - e00))
}

/// Bayes update of a diagonal state by the QND back-action of a probe signal.
///
/// The populations are multiplied by the same normalized likelihoods that
/// define [`effect_from_xi`], then renormalized.
pub fn forward_qnd_update(
    state: &QubitState,
    channel: &ReadoutChannel,
    xi: f64,
) -> Result<QubitState> {
    if !state.is_diagonal(DEFAULT_TOL) {
        return Err(Error::ContractViolation(
            "QND update requires a diagonal state".into(),
        ));
    }
    let e = effect_from_xi(channel, xi)?;
    let w0 = state.rho00() * e.e00();
    let w1 = state.rho11() * e.e11();
    let total = w0 + w1;
    if !(total > 0.0) {
        return Err(Error::DegenerateRetrodiction);
    }
    QubitState::new(Mat2::diag(w0 / total, w1 / total))
}

/// How infidelity is distributed between the two outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorModel {
    /// Both outcomes flip with probability 1 − F_θ.
    Symmetric,
    /// Each outcome flips with the overlap error plus decay of the excited
    /// weight of its own eigenstate: sin²(θ/2) for "+", cos²(θ/2) for "−".
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityModel {
    base_fidelity: f64,
    t_m: f64,
    t1: f64,
    error_model: ErrorModel,
}

impl FidelityModel {
    pub const DEFAULT_BASE_FIDELITY: f64 = 0.99;
    pub const DEFAULT_MEASUREMENT_TIME: f64 = 400e-9;
    /// Relaxation probability during the measurement pulse, 1 − e^{−t_m/T₁},
    /// read off from F_π = 0.945 and F_0 = 0.99.
    pub const DEFAULT_DECAY_FRACTION: f64 = 0.045;

    pub fn new(base_fidelity: f64, t_m: f64, t1: f64, error_model: ErrorModel) -> Result<Self> {
        if !(base_fidelity > 0.5 && base_fidelity <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "base fidelity {base_fidelity} outside (0.5, 1]"
            )));
        }
        if !(t_m > 0.0) || !t_m.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "measurement time {t_m} must be positive"
            )));
        }
        if !(t1 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "T1 = {t1} must be positive"
            )));
        }
        Ok(FidelityModel {
            base_fidelity,
            t_m,
            t1,
            error_model,
        })
    }

    /// T₁ such that a pulse of length `t_m` relaxes with probability `decay_fraction`.
    pub fn t1_from_decay_fraction(t_m: f64, decay_fraction: f64) -> f64 {
        -t_m / (-decay_fraction).ln_1p()
    }

    pub fn perfect() -> Self {
        FidelityModel {
            base_fidelity: 1.0,
            t_m: Self::DEFAULT_MEASUREMENT_TIME,
            t1: f64::INFINITY,
            error_model: ErrorModel::Symmetric,
        }
    }

    pub fn with_error_model(mut self, error_model: ErrorModel) -> Self {
        self.error_model = error_model;
        self
    }

    pub fn base_fidelity(&self) -> f64 {
        self.base_fidelity
    }

    pub fn t_m(&self) -> f64 {
        self.t_m
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn error_model(&self) -> ErrorModel {
        self.error_model
    }

    /// 1 − e^{−t_m/T₁}.
    pub fn decay_fraction(&self) -> f64 {
        -(-self.t_m / self.t1).exp_m1()
    }

    /// Flip probabilities `(ε₊, ε₋)` for ideal outcomes "+" and "−".
    pub fn error_rates(&self, theta: f64) -> (f64, f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let overlap = 1.0 - self.base_fidelity;
        let d = self.decay_fraction();
        match self.error_model {
            ErrorModel::Symmetric => {
                let e = overlap + s * s * d;
                (e, e)
            }
            ErrorModel::Asymmetric => (overlap + s * s * d, overlap + c * c * d),
        }
    }
}

impl Default for FidelityModel {
    fn default() -> Self {
        FidelityModel {
            base_fidelity: Self::DEFAULT_BASE_FIDELITY,
            t_m: Self::DEFAULT_MEASUREMENT_TIME,
            t1: Self::t1_from_decay_fraction(
                Self::DEFAULT_MEASUREMENT_TIME,
                Self::DEFAULT_DECAY_FRACTION,
            ),
            error_model: ErrorModel::Symmetric,
        }
    }
}

/// F_θ = base − sin²(θ/2)(1 − e^{−t_m/T₁}).
pub fn fidelity(model: &FidelityModel, theta: f64) -> f64 {
    let s = (theta / 2.0).sin();
    model.base_fidelity - s * s * model.decay_fraction()
}

pub fn apply_readout_error<R: Rng + ?Sized>(
    ideal: Outcome,
    theta: f64,
    model: &FidelityModel,
    rng: &mut R,
) -> Outcome {
    let (ep, em) = model.error_rates(theta);
    let flip = match ideal {
        Outcome::Plus => ep,
        Outcome::Minus => em,
    };
    if flip > 0.0 && rng.random::<f64>() < flip {
        ideal.flipped()
    } else {
        ideal
    }
}

/// Inverts the readout confusion matrix:
/// `raw = (1 − ε₊) p + ε₋ (1 − p)`  ⟹  `p = (raw − ε₋) / (1 − ε₊ − ε₋)`.
pub fn correct_fidelity(raw_frequency: f64, theta: f64, model: &FidelityModel) -> Result<f64> {
    if !(0.0..=1.0).contains(&raw_frequency) {
        return Err(Error::InvalidArgument(format!(
            "raw frequency {raw_frequency} outside [0, 1]"
        )));
    }
    let (ep, em) = model.error_rates(theta);
    let gain = 1.0 - ep - em;
    if gain.abs() < 1e-9 {
        return Err(Error::IllConditioned(format!(
            "confusion matrix is singular at theta = {theta}"
        )));
    }
    Ok((raw_frequency - em) / gain)
}

/// Standard error of a corrected frequency: the raw standard error divided by
/// the confusion-matrix gain.
pub fn corrected_stderr(raw_stderr: f64, theta: f64, model: &FidelityModel) -> f64 {
    let (ep, em) = model.error_rates(theta);
    raw_stderr / (1.0 - ep - em).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn gaussian_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
        let d = (x - mean) / sigma;
        (-0.5 * d * d).exp() / (sigma * (2.0 * PI).sqrt())
    }

    #[test]
    fn narrow_channel_pins_signal() {
        let ch = ReadoutChannel::new(1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_abs_diff_eq!(sample_xi(&ch, Basis::Zero, &mut rng), 1.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn sample_moments() {
        let ch = ReadoutChannel::new(0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_xi(&ch, Basis::One, &mut rng))
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Standard error 0.4/√1e5 ≈ 1.3e-3.
        assert!((mean + 1.0).abs() < 0.004, "mean {mean}");
        assert!((var - 0.16).abs() < 0.16 * 0.05, "var {var}");
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        assert!(ReadoutChannel::new(0.0).is_err());
        assert!(ReadoutChannel::new(-1.0).is_err());
        assert!(ReadoutChannel::new(f64::NAN).is_err());
    }

    #[test]
    fn effect_examples() {
        let ch = ReadoutChannel::new(0.5).unwrap();
        assert_eq!(effect_from_xi(&ch, 0.0).unwrap().e00(), 0.5);
        assert_eq!(effect_from_xi(&ch, 1e6).unwrap().e00(), 1.0);
        assert_eq!(effect_from_xi(&ch, -1e6).unwrap().e00(), 0.0);
        let oracle = 1.0 / (1.0 + (-8.0f64).exp());
        assert_abs_diff_eq!(
            effect_from_xi(&ch, 1.0).unwrap().e00(),
            oracle,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(oracle, 0.99966, epsilon = 1e-5);
        assert!(effect_from_xi(&ch, f64::NAN).is_err());
    }

    #[test]
    fn logistic_matches_likelihood_ratio() {
        let ch = ReadoutChannel::new(0.4).unwrap();
        for k in -40..=40 {
            let xi = 0.025 * k as f64;
            let p0 = gaussian_pdf(xi, 1.0, 0.4);
            let p1 = gaussian_pdf(xi, -1.0, 0.4);
            assert_abs_diff_eq!(e00_from_xi(&ch, xi), p0 / (p0 + p1), epsilon = 1e-12);
            assert_abs_diff_eq!(xi_from_e00(&ch, e00_from_xi(&ch, xi)), xi, epsilon = 1e-9);
        }
    }

    #[test]
    fn qnd_update_examples() {
        let ch = ReadoutChannel::new(0.4).unwrap();
        let rho = crate::states::make_diagonal_state(0.91).unwrap();
        assert_eq!(forward_qnd_update(&rho, &ch, 0.0).unwrap(), rho);

        let flat = QubitState::maximally_mixed();
        for xi in [-0.7, -0.1, 0.2, 1.3] {
            let post = forward_qnd_update(&flat, &ch, xi).unwrap();
            assert_abs_diff_eq!(post.rho00(), e00_from_xi(&ch, xi), epsilon = 1e-15);
        }

        let xi = xi_from_e00(&ch, 0.25);
        let post = forward_qnd_update(&rho, &ch, xi).unwrap();
        let oracle = 0.91 * 0.25 / (0.91 * 0.25 + 0.09 * 0.75);
        assert_abs_diff_eq!(post.rho00(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(post.rho00(), 0.7712, epsilon = 1e-4);

        let coherent = QubitState::new(Mat2::from_real([[0.5, 0.5], [0.5, 0.5]])).unwrap();
        assert!(forward_qnd_update(&coherent, &ch, 0.1).is_err());

        let certain = crate::states::make_diagonal_state(1.0).unwrap();
        assert_eq!(
            forward_qnd_update(&certain, &ch, -1e6),
            Err(Error::DegenerateRetrodiction)
        );
    }

    #[test]
    fn fidelity_examples() {
        let m = FidelityModel::default();
        assert_abs_diff_eq!(fidelity(&m, 0.0), 0.99, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&m, PI), 0.945, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&m, FRAC_PI_2), 0.9675, epsilon = 1e-12);
        assert_abs_diff_eq!(m.t1(), 8.687e-6, epsilon = 1e-9);
        for k in 0..100 {
            let (a, b) = (PI * k as f64 / 100.0, PI * (k + 1) as f64 / 100.0);
            assert!(fidelity(&m, b) <= fidelity(&m, a));
        }
    }

    #[test]
    fn perfect_readout_never_flips() {
        let m = FidelityModel::perfect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..1000 {
            let theta = PI * (k % 17) as f64 / 16.0;
            assert_eq!(
                apply_readout_error(Outcome::Plus, theta, &m, &mut rng),
                Outcome::Plus
            );
            assert_eq!(
                apply_readout_error(Outcome::Minus, theta, &m, &mut rng),
                Outcome::Minus
            );
        }
    }

    fn flip_rate(theta: f64, model: &FidelityModel, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 100_000;
        let flips = (0..n)
            .filter(|_| {
                apply_readout_error(Outcome::Plus, theta, model, &mut rng) == Outcome::Minus
            })
            .count();
        flips as f64 / n as f64
    }

    #[test]
    fn flip_rates_follow_fidelity() {
        let m = FidelityModel::default();
        assert!((flip_rate(0.0, &m, 11) - 0.01).abs() < 0.001);
        assert!((flip_rate(PI, &m, 12) - 0.055).abs() < 0.002);
        let asym = m.with_error_model(ErrorModel::Asymmetric);
        assert!((flip_rate(0.0, &asym, 13) - 0.01).abs() < 0.001);
        assert!((flip_rate(PI, &asym, 14) - 0.055).abs() < 0.002);
        let (_, em) = asym.error_rates(0.0);
        assert_abs_diff_eq!(em, 0.055, epsilon = 1e-12);
    }

    #[test]
    fn correction_examples() {
        let perfect = FidelityModel::perfect();
        assert_eq!(correct_fidelity(0.37, 1.0, &perfect).unwrap(), 0.37);

        let m = FidelityModel::default();
        let f = fidelity(&m, FRAC_PI_2);
        let raw = f * 0.7 + (1.0 - f) * 0.3;
        assert_abs_diff_eq!(
            correct_fidelity(raw, FRAC_PI_2, &m).unwrap(),
            0.7,
            epsilon = 1e-12
        );
        for k in 0..=10 {
            let theta = PI * k as f64 / 10.0;
            assert_abs_diff_eq!(
                correct_fidelity(0.5, theta, &m).unwrap(),
                0.5,
                epsilon = 1e-12
            );
        }

        let asym = m.with_error_model(ErrorModel::Asymmetric);
        let (ep, em) = asym.error_rates(0.3);
        let raw = (1.0 - ep) * 0.8 + em * 0.2;
        assert_abs_diff_eq!(
            correct_fidelity(raw, 0.3, &asym).unwrap(),
            0.8,
            epsilon = 1e-12
        );

        let coin =
            FidelityModel::new(0.5 + 1e-12, 400e-9, f64::INFINITY, ErrorModel::Symmetric).unwrap();
        assert!(matches!(
            correct_fidelity(0.4, 0.0, &coin),
            Err(Error::IllConditioned(_))
        ));
        assert!(correct_fidelity(1.2, 0.0, &m).is_err());
    }

    #[test]
    fn decay_during_probe_pulls_excited_signal_up() {
        let ch = ReadoutChannel::new(0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 50_000;
        // Exaggerated T1 so the shift is visible above sampling noise.
        let mean = (0..n)
            .map(|_| sample_xi_with_decay(&ch, Basis::One, 30e-9, 60e-9, &mut rng))
            .sum::<f64>()
            / n as f64;
        // E[mean] = −1 + 2 ∫₀ᵀ (1 − s/T) γ e^{−γs} ds with γT = 0.5.
        let g = 0.5f64;
        let oracle = -1.0 + 2.0 * (1.0 - (1.0 - (-g).exp()) / g);
        assert!((mean - oracle).abs() < 0.01, "{mean} vs {oracle}");
    }
}
