//! Continuous dynamics of a driven, continuously monitored qubit.
//!
//! The unconditioned evolution is the Lindblad generator
//!
//! ```text
//! dρ/dt = −i[H, ρ] + k(σ_z ρ σ_z − ρ) + γ₁(σ₋ρσ₊ − ½{σ₊σ₋, ρ}),   H = Ω_R σ_x / 2
//! ```
//!
//! (ħ = 1). Two-time statistics follow from propagating the post-measurement
//! operator with the same generator. The effect matrix is integrated backward
//! from the final time with an explicit first-order step of
//!
//! ```text
//! dE = { i[H, E] + k(σ_z E σ_z − E) + 2ηk(σ_z E + E σ_z − Tr(σ_z E) E) V } dt
//! ```
//!
//! where V is the measurement record normalized to ±1 means. These equations
//! are reconstructed from unfinished working notes and implemented as written,
//! with a relaxation term added to the backward step as the adjoint of the
//! forward one.

use crate::error::{Error, Result};
use crate::linalg::{hermitize, mat_exp, psd_check, Mat2, SuperOp4, C64, DEFAULT_TOL};
use crate::retrodiction::{born_probability, OutcomeDistribution};
use crate::states::{check_completeness, EffectMatrix, PovmElement, QubitState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladSpec {
    /// Ω_R in rad/s.
    pub rabi_frequency: f64,
    /// Measurement (dephasing) rate in 1/s.
    pub k: f64,
    /// Detection efficiency in [0, 1].
    pub eta: f64,
    /// Relaxation rate 1/T₁ in 1/s; zero disables it.
    pub gamma1: f64,
}

impl LindbladSpec {
    pub fn new(rabi_frequency: f64, k: f64, eta: f64, gamma1: f64) -> Result<Self> {
        let spec = LindbladSpec {
            rabi_frequency,
            k,
            eta,
            gamma1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.rabi_frequency, self.k, self.eta, self.gamma1]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidArgument(
                "Lindblad parameters must be finite".into(),
            ));
        }
        if self.k < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "k = {} must be >= 0",
                self.k
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidArgument(format!(
                "eta = {} outside [0, 1]",
                self.eta
            )));
        }
        if self.gamma1 < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "gamma1 = {} must be >= 0",
                self.gamma1
            )));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Mat2 {
        Mat2::sigma_x().scale_re(0.5 * self.rabi_frequency)
    }
}

/// Uniform time grid `t0, t0 + dt, ..., t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    dt: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Result<Self> {
        if !(t1 > t0) || !(dt > 0.0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time grid needs t1 > t0 and dt > 0 (got t0={t0}, t1={t1}, dt={dt})"
            )));
        }
        let steps = (t1 - t0) / dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "dt = {dt} does not divide the interval {}",
                t1 - t0
            )));
        }
        Ok(TimeGrid { t0, t1, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        ((self.t1 - self.t0) / self.dt).round() as usize
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps()).map(move |i| self.t0 + i as f64 * self.dt)
    }
}

fn dissipator(l: &Mat2) -> SuperOp4 {
    let n = l.adjoint() * *l;
    SuperOp4::sandwich(l, &l.adjoint())
        - SuperOp4::left(&n).scale(C64::from(0.5))
        - SuperOp4::right(&n).scale(C64::from(0.5))
}

/// The 4×4 generator acting on column-stacked density matrices.
pub fn build_liouvillian(spec: &LindbladSpec) -> SuperOp4 {
    let h = spec.hamiltonian();
    let minus_i = C64::new(0.0, -1.0);
    let mut gen = (SuperOp4::left(&h) - SuperOp4::right(&h)).scale(minus_i);
    if spec.k != 0.0 {
        let sz = Mat2::sigma_z();
        gen += (SuperOp4::sandwich(&sz, &sz) - SuperOp4::identity()).scale(C64::from(spec.k));
    }
    if spec.gamma1 != 0.0 {
        gen += dissipator(&Mat2::lowering()).scale(C64::from(spec.gamma1));
    }
    gen
}

fn settle_state(m: &Mat2) -> Result<QubitState> {
    let h = hermitize(m);
    QubitState::new(h).map_err(|e| Error::NumericDomain(format!("propagated state invalid: {e}")))
}

/// `ρ ↦ exp(𝓛 dt)[ρ]`.
pub fn propagate_rho(state: &QubitState, spec: &LindbladSpec, dt: f64) -> Result<QubitState> {
    let prop = mat_exp(&build_liouvillian(spec), dt)?;
    settle_state(&prop.apply(state.mat()))
}

/// Joint outcome probabilities `P(V₁, V₂) = Tr(Ω_{V₂} e^{𝓛dt}[Ω_{V₁} ρ Ω_{V₁}†] Ω_{V₂}†)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    /// Indexed `[first][second]`.
    pub probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn first_marginal(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn second_marginal(&self) -> Vec<f64> {
        let n = self.probs.first().map_or(0, Vec::len);
        (0..n)
            .map(|j| self.probs.iter().map(|row| row[j]).sum())
            .collect()
    }

    /// `Σ v₁ v₂ P(v₁, v₂)` for outcome values attached to each family.
    pub fn correlation(&self, values1: &[f64], values2: &[f64]) -> f64 {
        self.probs
            .iter()
            .zip(values1)
            .map(|(row, v1)| {
                row.iter()
                    .zip(values2)
                    .map(|(p, v2)| p * v1 * v2)
                    .sum::<f64>()
            })
            .sum()
    }
}

pub fn joint_probability(
    state: &QubitState,
    spec: &LindbladSpec,
    povm1: &[PovmElement],
    povm2: &[PovmElement],
    dt: f64,
) -> Result<JointDistribution> {
    check_completeness(povm1, DEFAULT_TOL)?;
    check_completeness(povm2, DEFAULT_TOL)?;
    let prop = mat_exp(&build_liouvillian(spec), dt)?;
    let probs = povm1
        .iter()
        .map(|o1| {
            let post = prop.apply(&(*o1.mat() * *state.mat() * o1.mat().adjoint()));
            povm2
                .iter()
                .map(|o2| (*o2.mat() * post * o2.mat().adjoint()).trace().re)
                .collect()
        })
        .collect();
    Ok(JointDistribution { probs })
}

/// Marginal of the first measurement, for comparison with [`joint_probability`].
pub fn first_outcome_distribution(
    state: &QubitState,
    povm1: &[PovmElement],
) -> Result<OutcomeDistribution> {
    born_probability(state, povm1)
}

/// Symmetrized two-time correlation ⟨V₁V₂⟩ of the σ_z record, by quantum regression:
///
/// `Tr(σ_z/2 · X) + Tr(X · σ_z/2)`, `X = e^{𝓛dt}[σ_z/2 ρ + ρ σ_z/2]`.
pub fn symmetrized_correlation(state: &QubitState, spec: &LindbladSpec, dt: f64) -> Result<f64> {
    let half_sz = Mat2::sigma_z().scale_re(0.5);
    let seed = half_sz * *state.mat() + *state.mat() * half_sz;
    let prop = mat_exp(&build_liouvillian(spec), dt)?;
    let x = prop.apply(&seed);
    Ok((half_sz * x).trace().re + (x * half_sz).trace().re)
}

/// Backward increment of E for one step of length `dt` with record value `v`.
fn backward_increment(e: &Mat2, spec: &LindbladSpec, v: f64, dt: f64) -> Mat2 {
    let sz = Mat2::sigma_z();
    let i = C64::new(0.0, 1.0);
    let mut de = spec.hamiltonian().commutator(e).scale(i);
    de += (sz * *e * sz - *e).scale_re(spec.k);
    if spec.gamma1 != 0.0 {
        let lo = Mat2::lowering();
        let n = lo.adjoint() * lo;
        let adj = lo.adjoint() * *e * lo - n.anticommutator(e).scale_re(0.5);
        de += adj.scale_re(spec.gamma1);
    }
    let z = (sz * *e).trace().re;
    let innovation = sz.anticommutator(e) - e.scale_re(z);
    de += innovation.scale_re(2.0 * spec.eta * spec.k * v);
    de.scale_re(dt)
}

/// One explicit step of the backward effect equation, E(t) → E(t − dt),
/// followed by hermitization and trace renormalization.
pub fn backward_effect_step(
    effect: &EffectMatrix,
    spec: &LindbladSpec,
    record_value: f64,
    dt: f64,
) -> Result<EffectMatrix> {
    if !(dt > 0.0) || !record_value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "backward step needs dt > 0 and a finite record (dt={dt}, V={record_value})"
        )));
    }
    let stepped =
        hermitize(&(*effect.mat() + backward_increment(effect.mat(), spec, record_value, dt)));
    let step_error = || Error::StepSize {
        dt,
        suggested_dt: dt / 4.0,
    };
    let tr = stepped.trace().re;
    if !(tr > 0.0) || !stepped.is_finite() {
        return Err(step_error());
    }
    let normalized = stepped.scale_re(1.0 / tr);
    if !psd_check(&normalized, DEFAULT_TOL)? {
        return Err(step_error());
    }
    EffectMatrix::new(normalized)
}

/// Integrates E backward over a record, starting from E(T) = I/2.
///
/// `record[i]` is the signal on the interval `[t_i, t_i + dt)`. The returned
/// vector has `record.len() + 1` entries with `out[i]` = E(t_i); the last entry is I/2.
pub fn backward_effect_trajectory(
    spec: &LindbladSpec,
    record: &[f64],
    dt: f64,
) -> Result<Vec<EffectMatrix>> {
    let mut out = vec![EffectMatrix::uninformative(); record.len() + 1];
    for i in (0..record.len()).rev() {
        out[i] = backward_effect_step(&out[i + 1], spec, record[i], dt)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_diagonal_state, povm_z};
    use approx::assert_abs_diff_eq;

    fn spec(rabi: f64, k: f64, eta: f64, gamma1: f64) -> LindbladSpec {
        LindbladSpec::new(rabi, k, eta, gamma1).unwrap()
    }

    #[test]
    fn zero_spec_has_zero_generator() {
        assert_eq!(
            build_liouvillian(&spec(0.0, 0.0, 0.0, 0.0)),
            SuperOp4::zero()
        );
    }

    #[test]
    fn generators_are_trace_preserving() {
        for s in [spec(2.0, 0.3, 0.5, 0.1), spec(1e7, 2e6, 1.0, 1.15e5)] {
            let row = build_liouvillian(&s).trace_row();
            let scale = build_liouvillian(&s).max_abs();
            assert!(row.iter().all(|z| z.norm() <= 1e-12 * scale.max(1.0)));
        }
    }

    #[test]
    fn dephasing_decays_coherence() {
        let k = 0.7;
        let rho = QubitState::new(Mat2::from_real([[0.6, 0.3], [0.3, 0.4]])).unwrap();
        for t in [0.1, 0.5, 2.0] {
            let out = propagate_rho(&rho, &spec(0.0, k, 0.0, 0.0), t).unwrap();
            assert_abs_diff_eq!(
                out.coherence().re,
                0.3 * (-2.0 * k * t).exp(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(out.rho00(), 0.6, epsilon = 1e-12);
        }
    }

    #[test]
    fn rabi_oscillation() {
        let w = 2.3;
        let rho = make_diagonal_state(1.0).unwrap();
        for t in [0.0, 0.4, 1.0, 3.7] {
            let out = propagate_rho(&rho, &spec(w, 0.0, 0.0, 0.0), t).unwrap();
            assert_abs_diff_eq!(
                out.expectation(&Mat2::sigma_z()),
                (w * t).cos(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn propagate_examples() {
        let rho = make_diagonal_state(0.3).unwrap();
        let s = spec(1.0, 1.0, 1.0, 1.0);
        assert!(propagate_rho(&rho, &s, 0.0)
            .unwrap()
            .mat()
            .approx_eq(rho.mat(), 1e-15));

        let t1 = 8.687e-6;
        let excited = make_diagonal_state(0.0).unwrap();
        let out = propagate_rho(&excited, &spec(0.0, 0.0, 0.0, 1.0 / t1), t1).unwrap();
        assert_abs_diff_eq!(out.rho11(), (-1.0f64).exp(), epsilon = 1e-12);

        let out = propagate_rho(&rho, &spec(0.0, 5.0, 0.0, 0.0), 3.0).unwrap();
        assert!(out.mat().approx_eq(rho.mat(), 1e-12));

        assert!(propagate_rho(&rho, &s, -1.0).is_err());
    }

    #[test]
    fn joint_probability_examples() {
        let rho = make_diagonal_state(0.8).unwrap();
        let s = spec(0.0, 1.0, 0.0, 0.5);
        let j = joint_probability(&rho, &s, &povm_z(), &povm_z(), 0.0).unwrap();
        assert_abs_diff_eq!(j.probs[0][1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.probs[1][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.probs[0][0], 0.8, epsilon = 1e-15);

        // Long-time limit: the generator's fixed point is |0⟩⟨0| with relaxation on.
        let j =
            joint_probability(&rho, &spec(0.0, 5.0, 0.0, 2.0), &povm_z(), &povm_z(), 50.0).unwrap();
        assert_abs_diff_eq!(j.probs[0][0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(j.probs[1][0], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(j.probs[0][1] + j.probs[1][1], 0.0, epsilon = 1e-12);

        let mixed = QubitState::maximally_mixed();
        for dt in [0.0, 0.3, 10.0] {
            let j = joint_probability(&mixed, &spec(0.0, 2.0, 0.0, 0.0), &povm_z(), &povm_z(), dt)
                .unwrap();
            assert_abs_diff_eq!(j.probs[0][0], 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(j.probs[1][1], 0.5, epsilon = 1e-12);
        }
        let mut crooked = povm_z();
        crooked[1] = crooked[0];
        assert!(joint_probability(&mixed, &s, &crooked, &povm_z(), 1.0).is_err());
    }

    #[test]
    fn correlation_examples() {
        let rho = QubitState::new(Mat2::from_real([[0.7, 0.2], [0.2, 0.3]])).unwrap();
        let s = spec(3.0, 1.0, 0.5, 0.5);
        assert_abs_diff_eq!(
            symmetrized_correlation(&rho, &s, 0.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );

        let diag = make_diagonal_state(0.35).unwrap();
        for dt in [0.1, 1.0, 5.0] {
            let c = symmetrized_correlation(&diag, &spec(0.0, 1.5, 0.0, 0.0), dt).unwrap();
            assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);
        }

        let w = 1.7;
        for dt in [0.2, 1.0, 2.5] {
            let c = symmetrized_correlation(
                &QubitState::maximally_mixed(),
                &spec(w, 0.0, 0.0, 0.0),
                dt,
            )
            .unwrap();
            assert_abs_diff_eq!(c, (w * dt).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn backward_step_examples() {
        let e = EffectMatrix::diagonal(0.8).unwrap();
        let out = backward_effect_step(&e, &spec(0.0, 3.0, 0.0, 0.0), 0.7, 1e-3).unwrap();
        assert!(out.mat().approx_eq(e.mat(), 1e-15));

        let out = backward_effect_step(
            &EffectMatrix::uninformative(),
            &spec(0.0, 1.0, 1.0, 0.0),
            0.5,
            1e-3,
        )
        .unwrap();
        assert!(out.e00() > 0.5);

        let e = EffectMatrix::new(Mat2::from_real([[0.8, 0.1], [0.1, 0.2]])).unwrap();
        let (lo, hi) = e.eigenvalues();
        let dt = 1e-4;
        let out = backward_effect_step(&e, &spec(2.0, 0.0, 0.0, 0.0), 0.0, dt).unwrap();
        let (lo2, hi2) = out.eigenvalues();
        assert!((lo - lo2).abs() < 10.0 * dt * dt);
        assert!((hi - hi2).abs() < 10.0 * dt * dt);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let e = EffectMatrix::diagonal(0.5).unwrap();
        let err = backward_effect_step(&e, &spec(0.0, 1.0, 1.0, 0.0), -10.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }));
    }

    #[test]
    fn time_grid_validation() {
        let g = TimeGrid::new(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.steps(), 10);
        assert_eq!(g.times().count(), 11);
        assert!(TimeGrid::new(0.0, 1.0, 0.3).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(LindbladSpec::new(0.0, -1.0, 0.5, 0.0).is_err());
        assert!(LindbladSpec::new(0.0, 1.0, 1.5, 0.0).is_err());
        assert!(LindbladSpec::new(0.0, 1.0, 0.5, -0.1).is_err());
    }
}
