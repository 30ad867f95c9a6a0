//! Predicted and retrodicted outcome probabilities.
//!
//! Every quantity exists in two forms: a generic trace expression over
//! arbitrary measurement operators, and a closed-form expression for diagonal
//! qubit states measured along a tilted axis. The tests cross-check them.

use crate::error::{Error, Result};
use crate::linalg::DEFAULT_TOL;
use crate::states::{check_completeness, EffectMatrix, PovmElement, QubitState};

/// Probabilities indexed in the order of the measurement operators that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NumericDomain("non-finite outcome weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateRetrodiction);
        }
        // Round-off can push a weight a hair below zero.
        let probs = weights
            .into_iter()
            .map(|w| (w / total).clamp(0.0, 1.0))
            .collect();
        Ok(OutcomeDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, m: usize) -> f64 {
        self.probs[m]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A normalized pair of diagonal entries `(p0, p1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    p0: f64,
    p1: f64,
}

impl Populations {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&p0)
            && (0.0..=1.0).contains(&p1)
            && (p0 + p1 - 1.0).abs() <= DEFAULT_TOL;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "({p0}, {p1}) is not a normalized probability pair"
            )));
        }
        Ok(Populations { p0, p1 })
    }

    pub fn from_p0(p0: f64) -> Result<Self> {
        Populations::new(p0, 1.0 - p0)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn swapped(&self) -> Self {
        Populations {
            p0: self.p1,
            p1: self.p0,
        }
    }

    pub fn of_state(state: &QubitState) -> Self {
        Populations {
            p0: state.rho00(),
            p1: state.rho11(),
        }
    }

    pub fn of_effect(effect: &EffectMatrix) -> Self {
        Populations {
            p0: effect.e00(),
            p1: effect.e11(),
        }
    }
}

/// Born rule `P(m) = Tr(Ω_m ρ Ω_m†)`.
pub fn born_probability(state: &QubitState, povm: &[PovmElement]) -> Result<OutcomeDistribution> {
    check_completeness(povm, DEFAULT_TOL)?;
    let weights = povm
        .iter()
        .map(|o| (*o.mat() * *state.mat() * o.mat().adjoint()).trace().re)
        .collect();
    OutcomeDistribution::from_weights(weights)
}

/// Outcome probabilities if the system occupied basis state `n` with probability `w_n`:
/// `P(m) = Σ_n w_n Tr(Ω_m |n⟩⟨n| Ω_m†)`.
pub fn classical_mixture_probability(
    weights: &[(f64, usize)],
    povm: &[PovmElement],
) -> Result<OutcomeDistribution> {
    check_completeness(povm, DEFAULT_TOL)?;
    let total: f64 = weights.iter().map(|(w, _)| w).sum();
    if weights.iter().any(|(w, _)| !(0.0..=1.0).contains(w)) || (total - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::InvalidArgument(format!(
            "mixture weights sum to {total}, expected 1"
        )));
    }
    let mut out = vec![0.0; povm.len()];
    for &(w, n) in weights {
        if n > 1 {
            return Err(Error::InvalidArgument(format!(
                "basis index {n} out of range"
            )));
        }
        for (slot, o) in out.iter_mut().zip(povm) {
            // Tr(Ω |n⟩⟨n| Ω†) = Σ_i |Ω_in|²
            *slot += w * (o.mat().get(0, n).norm_sqr() + o.mat().get(1, n).norm_sqr());
        }
    }
    OutcomeDistribution::from_weights(out)
}

/// Past-state probability `Tr(Ω_m ρ Ω_m† E) / Σ_m' Tr(Ω_m' ρ Ω_m'† E)`.
pub fn pqs_probability(
    state: &QubitState,
    effect: &EffectMatrix,
    povm: &[PovmElement],
) -> Result<OutcomeDistribution> {
    check_completeness(povm, DEFAULT_TOL)?;
    let weights = povm
        .iter()
        .map(|o| {
            (*o.mat() * *state.mat() * o.mat().adjoint() * *effect.mat())
                .trace()
                .re
        })
        .collect();
    OutcomeDistribution::from_weights(weights)
}

/// Forward-backward smoothing of diagonal populations: `P(n) ∝ ρ_nn E_nn`.
pub fn diagonal_smoothing(rho: Populations, e: Populations) -> Result<Populations> {
    let w0 = rho.p0 * e.p0;
    let w1 = rho.p1 * e.p1;
    let total = w0 + w1;
    if !(total > 0.0) {
        return Err(Error::DegenerateRetrodiction);
    }
    Ok(Populations {
        p0: w0 / total,
        p1: w1 / total,
    })
}

fn tilt_weights(theta: f64) -> (f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    (c * c, s * s)
}

/// Probability of "+" along the tilted axis for diagonal populations:
/// `p0 cos²(θ/2) + p1 sin²(θ/2)`.
pub fn p_rho_theta(rho: Populations, theta: f64) -> f64 {
    let (c2, s2) = tilt_weights(theta);
    rho.p0 * c2 + rho.p1 * s2
}

/// The same expression for the effect populations.
pub fn p_e_theta(e: Populations, theta: f64) -> f64 {
    p_rho_theta(e, theta)
}

/// Smoothed probability of "+" along the tilted axis for diagonal ρ and E.
pub fn p_past_theta(rho: Populations, e: Populations, theta: f64) -> Result<f64> {
    let (c2, s2) = tilt_weights(theta);
    let rp = rho.p0 * c2 + rho.p1 * s2;
    let rm = rho.p0 * s2 + rho.p1 * c2;
    let ep = e.p0 * c2 + e.p1 * s2;
    let em = e.p0 * s2 + e.p1 * c2;
    let plus = rp * ep;
    let total = plus + rm * em;
    if !(total > 0.0) {
        return Err(Error::DegenerateRetrodiction);
    }
    Ok(plus / total)
}

/// "+" probability if the smoothed populations described a classical mixture.
pub fn p_cm_theta(rho: Populations, e: Populations, theta: f64) -> Result<f64> {
    let smoothed = diagonal_smoothing(rho, e)?;
    Ok(p_rho_theta(smoothed, theta))
}
