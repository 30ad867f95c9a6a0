//! Monte Carlo virtual experiments.
//!
//! Each shot prepares a diagonal state, measures it projectively along a
//! tilted axis, and then probes σ_z weakly to obtain ξ and E00. Two physics
//! oracles generate the data:
//!
//! * [`Oracle::Quantum`]: the tilted measurement collapses the qubit onto its
//!   eigenstate, so the later probe sees that eigenstate's z populations.
//! * [`Oracle::ClassicalMixture`]: the qubit stays in its hidden basis state
//!   and the measurement only reads it out.
//!
//! Shots are post-selected on E00 and compared with the forward, smoothed and
//! classical-mixture predictions.
//!
//! Every shot owns an independent ChaCha8 stream keyed by the master seed and
//! the θ index, with the shot index as stream number. Aggregation runs over
//! fixed-size chunks merged in chunk order, so results are bit-identical for
//! any thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::readout::{
    apply_readout_error, correct_fidelity, corrected_stderr, e00_from_xi, sample_xi,
    sample_xi_with_decay, FidelityModel, ReadoutChannel,
};
use crate::retrodiction::{p_cm_theta, p_past_theta, p_rho_theta, Populations};
use crate::states::{Basis, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    Quantum,
    ClassicalMixture,
}

/// How shots are grouped by their E00 value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PostSelection {
    /// Keep every shot in one bin.
    All,
    /// Keep shots with |E00 − center| ≤ half_width.
    Window { center: f64, half_width: f64 },
    /// Uniform bins of the given width covering [0, 1].
    Grid { width: f64 },
}

/// Relaxation of the excited level during the E probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeDecay {
    pub probe_time: f64,
    pub t1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub rho00_prep: f64,
    pub theta_grid: Vec<f64>,
    /// Shots per θ value.
    pub shots: u64,
    pub sigma_e: f64,
    pub fidelity: FidelityModel,
    pub post_selection: PostSelection,
    pub oracle: Oracle,
    pub master_seed: u64,
    /// `None` ignores decay during the probe.
    pub probe_decay: Option<ProbeDecay>,
}

impl ExperimentPlan {
    pub const DEFAULT_SIGMA_E: f64 = 0.4;
    pub const DEFAULT_HALF_WIDTH: f64 = 0.05;
    pub const DEFAULT_BIN_WIDTH: f64 = 0.1;

    pub fn new(rho00_prep: f64, theta_grid: Vec<f64>, shots: u64) -> Self {
        ExperimentPlan {
            rho00_prep,
            theta_grid,
            shots,
            sigma_e: Self::DEFAULT_SIGMA_E,
            fidelity: FidelityModel::default(),
            post_selection: PostSelection::All,
            oracle: Oracle::Quantum,
            master_seed: 0,
            probe_decay: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(0.0..=1.0).contains(&self.rho00_prep) {
            return bad(format!("rho00 = {} outside [0, 1]", self.rho00_prep));
        }
        if self.shots == 0 {
            return bad("shots must be >= 1".into());
        }
        if self.theta_grid.is_empty() {
            return bad("theta grid is empty".into());
        }
        if let Some(t) = self.theta_grid.iter().find(|t| !(0.0..=PI).contains(*t)) {
            return bad(format!("theta = {t} outside [0, π]"));
        }
        ReadoutChannel::new(self.sigma_e)?;
        match self.post_selection {
            PostSelection::All => {}
            PostSelection::Window { center, half_width } => {
                if !(0.0..=1.0).contains(&center) || !(0.0..=0.5).contains(&half_width) {
                    return bad(format!(
                        "post-selection window {center} ± {half_width} not within [0, 1]"
                    ));
                }
            }
            PostSelection::Grid { width } => {
                if !(width > 0.0 && width <= 1.0) {
                    return bad(format!("bin width {width} must lie in (0, 1]"));
                }
            }
        }
        if let Some(d) = self.probe_decay {
            if !(d.probe_time > 0.0) || !(d.t1 > 0.0) {
                return bad("probe decay needs positive probe time and T1".into());
            }
        }
        Ok(())
    }

    pub fn channel(&self) -> Result<ReadoutChannel> {
        ReadoutChannel::new(self.sigma_e)
    }

    pub fn bins(&self) -> Vec<Bin> {
        match self.post_selection {
            PostSelection::All => vec![Bin {
                lo: 0.0,
                hi: 1.0,
                closed_hi: true,
            }],
            PostSelection::Window { center, half_width } => vec![Bin {
                lo: (center - half_width).max(0.0),
                hi: (center + half_width).min(1.0),
                closed_hi: true,
            }],
            PostSelection::Grid { width } => {
                let n = (1.0 / width).round().max(1.0) as usize;
                (0..n)
                    .map(|i| Bin {
                        lo: i as f64 / n as f64,
                        hi: (i + 1) as f64 / n as f64,
                        closed_hi: i + 1 == n,
                    })
                    .collect()
            }
        }
    }
}

/// `n` equally spaced angles from 0 to π inclusive.
pub fn uniform_theta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect(),
    }
}

/// An E00 interval. Windows include both edges; grid bins are half-open
/// except the last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    closed_hi: bool,
}

impl Bin {
    pub fn window(center: f64, half_width: f64) -> Self {
        Bin {
            lo: center - half_width,
            hi: center + half_width,
            closed_hi: true,
        }
    }

    pub fn contains(&self, e00: f64) -> bool {
        e00 >= self.lo && (e00 < self.hi || (self.closed_hi && e00 <= self.hi))
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotRecord {
    pub prep_z: Basis,
    pub theta: f64,
    pub ideal_outcome: Outcome,
    pub reported_outcome: Outcome,
    pub xi: f64,
    pub e00: f64,
}

/// The RNG for one shot: key from (master seed, θ index), stream = shot index.
pub fn shot_rng(master_seed: u64, theta_index: usize, shot: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(theta_index as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(shot);
    rng
}

fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

fn prepare<R: Rng + ?Sized>(rho00: f64, rng: &mut R) -> Basis {
    if bernoulli(rho00, rng) {
        Basis::Zero
    } else {
        Basis::One
    }
}

/// Born probability of "+" along θ for a basis state.
fn plus_probability(z: Basis, theta: f64) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    match z {
        Basis::Zero => c * c,
        Basis::One => s * s,
    }
}

fn probe<R: Rng + ?Sized>(
    plan: &ExperimentPlan,
    channel: &ReadoutChannel,
    z: Basis,
    rng: &mut R,
) -> f64 {
    match plan.probe_decay {
        None => sample_xi(channel, z, rng),
        Some(d) => sample_xi_with_decay(channel, z, d.probe_time, d.t1, rng),
    }
}

fn finish_shot<R: Rng + ?Sized>(
    plan: &ExperimentPlan,
    channel: &ReadoutChannel,
    prep_z: Basis,
    theta: f64,
    ideal: Outcome,
    probed_z: Basis,
    rng: &mut R,
) -> ShotRecord {
    let reported = apply_readout_error(ideal, theta, &plan.fidelity, rng);
    let xi = probe(plan, channel, probed_z, rng);
    ShotRecord {
        prep_z,
        theta,
        ideal_outcome: ideal,
        reported_outcome: reported,
        xi,
        e00: e00_from_xi(channel, xi),
    }
}

fn measure<R: Rng + ?Sized>(z: Basis, theta: f64, rng: &mut R) -> Outcome {
    if bernoulli(plus_probability(z, theta), rng) {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// One shot with collapse onto the tilted eigenstate before the E probe.
pub fn run_shot_quantum<R: Rng + ?Sized>(
    plan: &ExperimentPlan,
    theta: f64,
    rng: &mut R,
) -> Result<ShotRecord> {
    let channel = plan.channel()?;
    Ok(quantum_shot(plan, &channel, theta, rng))
}

fn quantum_shot<R: Rng + ?Sized>(
    plan: &ExperimentPlan,
    channel: &ReadoutChannel,
    theta: f64,
    rng: &mut R,
) -> ShotRecord {
    let prep_z = prepare(plan.rho00_prep, rng);
    let ideal = measure(prep_z, theta, rng);
    // |+θ⟩ has z populations (cos², sin²); |−θ⟩ the reverse.
    let p_zero = match ideal {
        Outcome::Plus => plus_probability(Basis::Zero, theta),
        Outcome::Minus => plus_probability(Basis::One, theta),
    };
    let probed_z = if bernoulli(p_zero, rng) {
        Basis::Zero
    } else {
        Basis::One
    };
    finish_shot(plan, channel, prep_z, theta, ideal, probed_z, rng)
}

/// One shot in which the qubit keeps its hidden basis state throughout.
pub fn run_shot_classical<R: Rng + ?Sized>(
    plan: &ExperimentPlan,
    theta: f64,
    rng: &mut R,
) -> Result<ShotRecord> {
    let channel = plan.channel()?;
    Ok(classical_shot(plan, &channel, theta, rng))
}

fn classical_shot<R: Rng + ?Sized>(
    plan: &ExperimentPlan,
    channel: &ReadoutChannel,
    theta: f64,
    rng: &mut R,
) -> ShotRecord {
    let prep_z = prepare(plan.rho00_prep, rng);
    let ideal = measure(prep_z, theta, rng);
    finish_shot(plan, channel, prep_z, theta, ideal, prep_z, rng)
}

/// Running counts for one E00 bin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BinTally {
    pub n_plus: u64,
    pub n_minus: u64,
    pub e00_sum: f64,
}

impl BinTally {
    pub fn add(&mut self, rec: &ShotRecord) {
        match rec.reported_outcome {
            Outcome::Plus => self.n_plus += 1,
            Outcome::Minus => self.n_minus += 1,
        }
        self.e00_sum += rec.e00;
    }

    pub fn merge(&mut self, other: &BinTally) {
        self.n_plus += other.n_plus;
        self.n_minus += other.n_minus;
        self.e00_sum += other.e00_sum;
    }

    pub fn count(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    pub fn e00_mean(&self) -> Option<f64> {
        (self.count() > 0).then(|| self.e00_sum / self.count() as f64)
    }
}

/// Representative E00 of a post-selection bin: the mean over the shots it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentativeE00 {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn representative_e00(window: &Bin, records: &[ShotRecord]) -> Result<RepresentativeE00> {
    let mut tally = BinTally::default();
    records
        .iter()
        .filter(|r| window.contains(r.e00))
        .for_each(|r| tally.add(r));
    let mean = tally.e00_mean().ok_or(Error::EmptyBin {
        lo: window.lo,
        hi: window.hi,
    })?;
    Ok(RepresentativeE00 {
        mean,
        lo: window.lo,
        hi: window.hi,
    })
}

/// Statistics and predictions for one (θ, E00 bin) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub bin: Bin,
    pub n_plus: u64,
    pub n_minus: u64,
    pub e00_mean: Option<f64>,
    /// N₊ / (N₊ + N₋) of reported outcomes.
    pub p_tilde: Option<f64>,
    /// `p_tilde` after inverting the readout confusion matrix.
    pub p_tilde_corrected: Option<f64>,
    /// sqrt(p(1 − p)/N) of `p_tilde`.
    pub stderr: Option<f64>,
    pub stderr_corrected: Option<f64>,
    pub p_rho_pred: f64,
    pub p_past_pred: Option<f64>,
    /// Smoothed prediction at the two window edges, ordered (low, high).
    pub p_past_band: Option<(f64, f64)>,
    pub p_cm_pred: Option<f64>,
}

impl SweepRow {
    pub fn count(&self) -> u64 {
        self.n_plus + self.n_minus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rho00_prep: f64,
    pub oracle: Oracle,
    pub shots_per_theta: u64,
    /// Ordered by θ grid position, then by bin.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn rows_at(&self, theta: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.theta == theta)
    }
}

const CHUNK: u64 = 4096;

fn tally_theta(
    plan: &ExperimentPlan,
    channel: &ReadoutChannel,
    bins: &[Bin],
    theta_index: usize,
    theta: f64,
) -> Vec<BinTally> {
    let chunks = plan.shots.div_ceil(CHUNK);
    let partials: Vec<Vec<BinTally>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tallies = vec![BinTally::default(); bins.len()];
            let end = ((c + 1) * CHUNK).min(plan.shots);
            for shot in c * CHUNK..end {
                let mut rng = shot_rng(plan.master_seed, theta_index, shot);
                let rec = match plan.oracle {
                    Oracle::Quantum => quantum_shot(plan, channel, theta, &mut rng),
                    Oracle::ClassicalMixture => classical_shot(plan, channel, theta, &mut rng),
                };
                if let Some(i) = bins.iter().position(|b| b.contains(rec.e00)) {
                    tallies[i].add(&rec);
                }
            }
            tallies
        })
        .collect();
    partials
        .iter()
        .fold(vec![BinTally::default(); bins.len()], |mut acc, part| {
            acc.iter_mut().zip(part).for_each(|(a, p)| a.merge(p));
            acc
        })
}

fn predictions(rho: Populations, e00: f64, theta: f64) -> Option<(f64, f64)> {
    let e = Populations::from_p0(e00.clamp(0.0, 1.0)).ok()?;
    Some((
        p_past_theta(rho, e, theta).ok()?,
        p_cm_theta(rho, e, theta).ok()?,
    ))
}

fn build_row(
    plan: &ExperimentPlan,
    rho: Populations,
    theta: f64,
    bin: Bin,
    tally: &BinTally,
) -> SweepRow {
    let n = tally.count();
    let mut row = SweepRow {
        theta,
        bin,
        n_plus: tally.n_plus,
        n_minus: tally.n_minus,
        e00_mean: tally.e00_mean(),
        p_tilde: None,
        p_tilde_corrected: None,
        stderr: None,
        stderr_corrected: None,
        p_rho_pred: p_rho_theta(rho, theta),
        p_past_pred: None,
        p_past_band: None,
        p_cm_pred: None,
    };
    if n == 0 {
        return row;
    }
    let p = tally.n_plus as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    row.p_tilde = Some(p);
    row.stderr = Some(se);
    row.p_tilde_corrected = correct_fidelity(p, theta, &plan.fidelity).ok();
    row.stderr_corrected = Some(corrected_stderr(se, theta, &plan.fidelity));
    if let Some(e00) = row.e00_mean {
        if let Some((past, cm)) = predictions(rho, e00, theta) {
            row.p_past_pred = Some(past);
            row.p_cm_pred = Some(cm);
        }
        let edges = [bin.lo, bin.hi].map(|x| predictions(rho, x, theta).map(|(past, _)| past));
        if let [Some(a), Some(b)] = edges {
            row.p_past_band = Some((a.min(b), a.max(b)));
        }
    }
    row
}

/// Runs every θ of the plan and tabulates post-selected statistics.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<SweepResult> {
    plan.validate()?;
    let channel = plan.channel()?;
    let rho = Populations::from_p0(plan.rho00_prep)?;
    let bins = plan.bins();
    let mut rows = Vec::with_capacity(plan.theta_grid.len() * bins.len());
    for (ti, &theta) in plan.theta_grid.iter().enumerate() {
        let tallies = tally_theta(plan, &channel, &bins, ti, theta);
        rows.extend(
            bins.iter()
                .zip(&tallies)
                .map(|(bin, tally)| build_row(plan, rho, theta, *bin, tally)),
        );
    }
    Ok(SweepResult {
        rho00_prep: plan.rho00_prep,
        oracle: plan.oracle,
        shots_per_theta: plan.shots,
        rows,
    })
}

/// Per-shot records for one θ, for diagnostics and small runs.
pub fn collect_records(plan: &ExperimentPlan, theta_index: usize) -> Result<Vec<ShotRecord>> {
    plan.validate()?;
    let channel = plan.channel()?;
    let theta = *plan
        .theta_grid
        .get(theta_index)
        .ok_or_else(|| Error::InvalidArgument(format!("theta index {theta_index} out of range")))?;
    Ok((0..plan.shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = shot_rng(plan.master_seed, theta_index, shot);
            match plan.oracle {
                Oracle::Quantum => quantum_shot(plan, &channel, theta, &mut rng),
                Oracle::ClassicalMixture => classical_shot(plan, &channel, theta, &mut rng),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn record(e00: f64) -> ShotRecord {
        ShotRecord {
            prep_z: Basis::Zero,
            theta: 0.0,
            ideal_outcome: Outcome::Plus,
            reported_outcome: Outcome::Plus,
            xi: 0.0,
            e00,
        }
    }

    #[test]
    fn noiseless_z_chain() {
        let mut plan = ExperimentPlan::new(1.0, vec![0.0], 1);
        plan.sigma_e = 1e-6;
        plan.fidelity = FidelityModel::perfect();
        for shot in 0..200 {
            let mut rng = shot_rng(9, 0, shot);
            let r = run_shot_quantum(&plan, 0.0, &mut rng).unwrap();
            assert_eq!(r.reported_outcome, Outcome::Plus);
            assert!((r.xi - 1.0).abs() < 1e-4);
            assert!((r.e00 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unbiased_at_right_angle() {
        let mut plan = ExperimentPlan::new(0.5, vec![FRAC_PI_2], 100_000);
        plan.fidelity = FidelityModel::perfect();
        plan.master_seed = 21;
        for oracle in [Oracle::Quantum, Oracle::ClassicalMixture] {
            plan.oracle = oracle;
            let res = run_sweep(&plan).unwrap();
            let p = res.rows[0].p_tilde.unwrap();
            assert!((p - 0.5).abs() < 0.005, "{oracle:?}: {p}");
        }
    }

    #[test]
    fn record_e00_is_reproducible() {
        let plan = ExperimentPlan::new(0.7, vec![0.3], 500);
        let channel = plan.channel().unwrap();
        for r in collect_records(&plan, 0).unwrap() {
            assert_eq!(r.e00, e00_from_xi(&channel, r.xi));
        }
    }

    #[test]
    fn representative_examples() {
        let zero = Bin::window(0.5, 0.0);
        let recs = vec![record(0.5); 4];
        assert_eq!(representative_e00(&zero, &recs).unwrap().mean, 0.5);

        let w = Bin::window(0.6, 0.1);
        let recs: Vec<_> = [0.52, 0.55, 0.65, 0.68, 0.9]
            .into_iter()
            .map(record)
            .collect();
        let rep = representative_e00(&w, &recs).unwrap();
        assert!((rep.mean - 0.6).abs() < 1e-12);
        assert_eq!((rep.lo, rep.hi), (w.lo, w.hi));

        assert!(matches!(
            representative_e00(&Bin::window(0.1, 0.01), &recs),
            Err(Error::EmptyBin { .. })
        ));
    }

    #[test]
    fn grid_bins_partition_unit_interval() {
        let mut plan = ExperimentPlan::new(0.5, vec![0.0], 1);
        plan.post_selection = PostSelection::Grid { width: 0.1 };
        let bins = plan.bins();
        assert_eq!(bins.len(), 10);
        for k in 0..=1000 {
            let x = k as f64 / 1000.0;
            assert_eq!(bins.iter().filter(|b| b.contains(x)).count(), 1, "{x}");
        }
    }

    #[test]
    fn empty_bin_has_no_statistics() {
        let mut plan = ExperimentPlan::new(1.0, vec![0.0], 200);
        plan.sigma_e = 0.05;
        plan.post_selection = PostSelection::Window {
            center: 0.02,
            half_width: 0.01,
        };
        let res = run_sweep(&plan).unwrap();
        let row = res.rows[0];
        assert_eq!(row.count(), 0);
        assert!(row.p_tilde.is_none() && row.stderr.is_none() && row.p_past_pred.is_none());
    }

    #[test]
    fn plan_validation() {
        let ok = ExperimentPlan::new(0.5, vec![0.0, 1.0], 10);
        assert!(ok.validate().is_ok());
        let mut p = ok.clone();
        p.shots = 0;
        assert!(p.validate().is_err());
        let mut p = ok.clone();
        p.theta_grid = vec![4.0];
        assert!(p.validate().is_err());
        let mut p = ok.clone();
        p.sigma_e = 0.0;
        assert!(p.validate().is_err());
        let mut p = ok;
        p.post_selection = PostSelection::Window {
            center: 1.2,
            half_width: 0.05,
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn theta_grid_endpoints() {
        let g = uniform_theta_grid(11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[10], PI);
        assert!((g[5] - FRAC_PI_2).abs() < 1e-15);
    }
}
