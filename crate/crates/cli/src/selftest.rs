//! The `selftest` command: analytic identities plus Monte Carlo checks at the
//! configured shot count.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pastq::dynamics::{backward_effect_step, propagate_rho, symmetrized_correlation, LindbladSpec};
use pastq::lab::{run_sweep, Oracle, PostSelection, SweepRow};
use pastq::linalg::{Mat2, C64};
use pastq::readout::{
    corrected_stderr, effect_from_xi, fidelity, forward_qnd_update, FidelityModel, ReadoutChannel,
};
use pastq::retrodiction::{p_cm_theta, p_past_theta, Populations};
use pastq::states::{make_diagonal_state, Basis, EffectMatrix, QubitState};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::Output;

/// Standard errors allowed per Monte Carlo comparison. Above the nominal 3 so
/// that a suite of some dozens of comparisons has a family-wise false-alarm
/// rate under one percent.
pub const Z_TOLERANCE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Too few counts to test at this shot count.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: String) -> Check {
    let status = if pass { Status::Pass } else { Status::Fail };
    Check {
        name: name.into(),
        status,
        detail,
    }
}

fn worst<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn pops(p0: f64) -> Populations {
    Populations::from_p0(p0).expect("probability in range")
}

fn analytic_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let ex = &cfg.experiment;

    let gap = worst(ex.rho00.iter().zip(&ex.e00_centers).flat_map(|(&r, &e)| {
        [0.0, FRAC_PI_2, PI].map(|t| {
            (p_past_theta(pops(r), pops(e), t).unwrap_or(f64::NAN)
                - p_cm_theta(pops(r), pops(e), t).unwrap_or(f64::NAN))
            .abs()
        })
    }));
    out.push(check(
        "coincidence points",
        gap < 1e-12,
        format!("max |p_past - p_cm| = {gap:.3e}"),
    ));

    let model = cfg.fidelity_model()?;
    let f0 = fidelity(&model, 0.0);
    let fpi = fidelity(&model, PI);
    let expect_pi = cfg.fidelity.base - cfg.fidelity.decay_fraction;
    out.push(check(
        "fidelity endpoints",
        f0 == cfg.fidelity.base && (fpi - expect_pi).abs() < 1e-15,
        format!("F(0) = {f0}, F(pi) = {fpi}"),
    ));

    let channel = ReadoutChannel::new(cfg.readout.sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ex.seed);
    let mut qnd = 0.0f64;
    let mut lr = 0.0f64;
    for _ in 0..1000 {
        let xi = rng.random_range(-3.0..3.0);
        let e = effect_from_xi(&channel, xi)?;
        let p0 = rng.random_range(0.01..0.99);
        let post = forward_qnd_update(&make_diagonal_state(p0)?, &channel, xi)?;
        qnd = qnd.max((post.rho00() - p0 * e.e00() / (p0 * e.e00() + (1.0 - p0) * e.e11())).abs());
        let ratio = (channel.log_likelihood(xi, Basis::Zero)
            - channel.log_likelihood(xi, Basis::One))
        .exp();
        lr = lr.max((e.e00() - ratio / (1.0 + ratio)).abs());
    }
    out.push(check(
        "QND factors",
        qnd < 1e-12,
        format!("max deviation {qnd:.3e}"),
    ));
    out.push(check(
        "logistic vs likelihood ratio",
        lr < 1e-12,
        format!("max deviation {lr:.3e}"),
    ));

    let spec = cfg.lindblad()?;
    let mut corr0 = 0.0f64;
    for _ in 0..100 {
        let rho = random_state(&mut rng)?;
        corr0 = corr0.max((symmetrized_correlation(&rho, &spec, 0.0)? - 1.0).abs());
    }
    out.push(check(
        "correlation at zero delay",
        corr0 < 1e-9,
        format!("max |C(0) - 1| = {corr0:.3e}"),
    ));

    let t1_only = LindbladSpec::new(0.0, 0.0, 0.0, 0.5)?;
    let excited = make_diagonal_state(0.0)?;
    let decay = worst((1..=20).map(|i| {
        let t = 0.25 * i as f64;
        propagate_rho(&excited, &t1_only, t)
            .map_or(f64::NAN, |r| (r.rho11() - (-0.5 * t).exp()).abs())
    }));
    out.push(check(
        "T1 decay",
        decay < 1e-9,
        format!("max deviation {decay:.3e}"),
    ));

    let rabi = LindbladSpec::new(2.0, 0.0, 0.0, 0.0)?;
    let rho = random_state(&mut rng)?;
    let osc = worst((0..=40).map(|i| {
        let t = 0.1 * i as f64;
        symmetrized_correlation(&rho, &rabi, t).map_or(f64::NAN, |c| (c - (2.0 * t).cos()).abs())
    }));
    out.push(check(
        "Rabi correlation",
        osc < 1e-6,
        format!("max deviation {osc:.3e}"),
    ));

    let dephase = LindbladSpec::new(0.0, cfg.dynamics.k, 0.0, 0.0)?;
    let mut fixed = 0.0f64;
    for _ in 0..100 {
        let e = EffectMatrix::diagonal(rng.random_range(0.0..=1.0))?;
        let stepped =
            backward_effect_step(&e, &dephase, rng.random_range(-5.0..5.0), cfg.dynamics.dt)?;
        fixed = fixed.max((stepped.e00() - e.e00()).abs());
    }
    out.push(check(
        "eta = 0 backward step",
        fixed < 1e-9,
        format!("max deviation {fixed:.3e}"),
    ));
    Ok(out)
}

fn random_state<R: Rng>(rng: &mut R) -> Result<QubitState, CliError> {
    let p0: f64 = rng.random_range(0.0..=1.0);
    let bound = (p0 * (1.0 - p0)).sqrt();
    let c = C64::from_polar(
        bound * rng.random_range(0.0..=1.0),
        rng.random_range(0.0..2.0 * PI),
    );
    Ok(QubitState::new(Mat2::new(
        C64::from(p0),
        c,
        c.conj(),
        C64::from(1.0 - p0),
    ))?)
}

/// Fewest expected counts in the rarer outcome for the normal approximation.
const MIN_EXPECTED: f64 = 5.0;

/// Largest |observed − predicted| / allowance over the usable rows.
///
/// The standard error is taken under the prediction rather than the observed
/// frequency, so that sparse cells with all-"+" counts do not get zero width;
/// it is widened by the continuity correction 1/(2N).
fn sweep_check(
    name: String,
    rows: &[SweepRow],
    fidelity: &FidelityModel,
    predicted: impl Fn(&SweepRow) -> Option<(f64, f64)>,
) -> Check {
    let mut ratio = 0.0f64;
    let mut used = 0;
    for row in rows {
        let (Some(p), Some((pred, band))) = (row.p_tilde_corrected, predicted(row)) else {
            continue;
        };
        let n = row.count() as f64;
        // the raw frequency is what is binomial
        let (ep, em) = fidelity.error_rates(row.theta);
        let raw = (1.0 - ep) * pred + em * (1.0 - pred);
        if n * raw.min(1.0 - raw) < MIN_EXPECTED {
            continue;
        }
        let se = corrected_stderr(
            (raw * (1.0 - raw) / n).sqrt() + 0.5 / n,
            row.theta,
            fidelity,
        );
        ratio = ratio.max((p - pred).abs() / (Z_TOLERANCE * se).max(band));
        used += 1;
    }
    let skipped = rows.len() - used;
    if used == 0 {
        return Check {
            name,
            status: Status::Skip,
            detail: format!("all {skipped} cells too sparse"),
        };
    }
    check(
        name,
        ratio <= 1.0,
        format!("worst deviation {ratio:.3} of allowance over {used} cells ({skipped} too sparse)"),
    )
}

fn band_half(pred: f64, band: Option<(f64, f64)>) -> f64 {
    band.map_or(0.0, |(lo, hi)| (pred - lo).abs().max((hi - pred).abs()))
}

fn monte_carlo_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let ex = &cfg.experiment;
    let fid = cfg.fidelity_model()?;
    for &rho00 in &ex.rho00 {
        let sweep = run_sweep(&cfg.plan(rho00, PostSelection::All, Oracle::Quantum)?)?;
        out.push(sweep_check(
            format!("marginal rho00={rho00}"),
            &sweep.rows,
            &fid,
            |r| Some((r.p_rho_pred, 0.0)),
        ));
    }
    for (&rho00, &center) in ex.rho00.iter().zip(&ex.e00_centers) {
        let window = PostSelection::Window {
            center,
            half_width: ex.half_width,
        };
        let quantum = run_sweep(&cfg.plan(rho00, window, Oracle::Quantum)?)?;
        out.push(sweep_check(
            format!("quantum post-selected rho00={rho00} E00={center}"),
            &quantum.rows,
            &fid,
            |r| r.p_past_pred.map(|p| (p, band_half(p, r.p_past_band))),
        ));
        let classical = run_sweep(&cfg.plan(rho00, window, Oracle::ClassicalMixture)?)?;
        let (lo, hi) = (
            (center - ex.half_width).max(0.0),
            (center + ex.half_width).min(1.0),
        );
        out.push(sweep_check(
            format!("classical post-selected rho00={rho00} E00={center}"),
            &classical.rows,
            &fid,
            |r| {
                let pred = r.p_cm_pred?;
                let edges =
                    [lo, hi].map(|e| p_cm_theta(pops(rho00), pops(e), r.theta).unwrap_or(pred));
                Some((
                    pred,
                    band_half(pred, Some((edges[0].min(edges[1]), edges[0].max(edges[1])))),
                ))
            },
        ));
    }

    let mut small = cfg.plan(
        ex.rho00[0],
        PostSelection::Grid {
            width: ex.bin_width,
        },
        Oracle::Quantum,
    )?;
    small.shots = small.shots.min(2000);
    let same = run_sweep(&small)? == run_sweep(&small)?;
    out.push(check(
        "determinism",
        same,
        "repeated sweep is bit-identical".into(),
    ));
    Ok(out)
}

pub fn selftest(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut checks = analytic_checks(cfg)?;
    checks.extend(monte_carlo_checks(cfg)?);
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let failed = count(Status::Fail);
    let mut report = String::new();
    for c in &checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        let _ = writeln!(report, "{tag} {}: {}", c.name, c.detail);
    }
    let _ = writeln!(
        report,
        "selftest: {} passed, {failed} failed, {} skipped (shots = {}, seed = {}, z = {Z_TOLERANCE})",
        count(Status::Pass),
        count(Status::Skip),
        cfg.experiment.shots,
        cfg.experiment.seed
    );
    Ok(Output {
        body: crate::Body::Report(report),
        warnings: Vec::new(),
        failed,
    })
}
