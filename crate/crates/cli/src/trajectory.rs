//! The `dynamics` command: ensemble curves, regression correlation and a
//! backward effect trajectory over one measurement record.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use pastq::dynamics::{
    backward_effect_trajectory, build_liouvillian, propagate_rho, symmetrized_correlation,
    LindbladSpec, TimeGrid,
};
use pastq::linalg::{hermitize, mat_exp, Mat2};
use pastq::retrodiction::pqs_probability;
use pastq::states::{make_diagonal_state, povm_z, QubitState};

use crate::config::LoadedConfig;
use crate::error::CliError;
use crate::table::{num, Table};
use crate::Output;

/// Samples a record `V dt = ⟨σ_z⟩_c dt + dW / √(4ηk)` from the conditioned state.
///
/// The conditioning uses the Kraus factor `diag(e^{2ηkVdt}, e^{−2ηkVdt})`, which
/// keeps the state positive for any record value. With ηk = 0 the record carries
/// no information and is returned as the noiseless mean.
pub fn synthesize_record(
    spec: &LindbladSpec,
    rho0: &QubitState,
    dt: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<f64>, CliError> {
    let prop = mat_exp(&build_liouvillian(spec), dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = 4.0 * spec.eta * spec.k;
    let mut rho = *rho0.mat();
    let mut record = Vec::with_capacity(steps);
    for _ in 0..steps {
        let z = (Mat2::sigma_z() * rho).trace().re;
        let noise: f64 = StandardNormal.sample(&mut rng);
        let v = if rate > 0.0 {
            z + noise / (rate * dt).sqrt()
        } else {
            z
        };
        record.push(v);
        let a = 0.5 * rate * v * dt;
        let kraus = Mat2::diag(a.exp(), (-a).exp());
        let next = hermitize(&prop.apply(&(kraus * rho * kraus.adjoint())));
        rho = next.scale_re(1.0 / next.trace().re);
    }
    Ok(record)
}

fn read_record(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Validation(format!(
                        "{}:{}: not a finite number: {l:?}",
                        path.display(),
                        i + 1
                    ))
                })
        })
        .collect()
}

pub fn dynamics(loaded: &LoadedConfig) -> Result<Output, CliError> {
    let cfg = &loaded.config;
    let d = &cfg.dynamics;
    let spec = cfg.lindblad()?;
    let grid = TimeGrid::new(0.0, d.t_end, d.dt)
        .map_err(|e| CliError::Validation(format!("dynamics.dt: {e}")))?;
    let rho0 = make_diagonal_state(d.initial_rho00)?;

    let record = match loaded.record_path() {
        Some(path) => {
            let record = read_record(&path)?;
            if record.len() != grid.steps() {
                return Err(CliError::Validation(format!(
                    "dynamics.record: {} has {} values, the time grid needs {}",
                    path.display(),
                    record.len(),
                    grid.steps()
                )));
            }
            record
        }
        None => synthesize_record(&spec, &rho0, grid.dt(), grid.steps(), cfg.experiment.seed)?,
    };
    let effects = backward_effect_trajectory(&spec, &record, grid.dt())?;

    let mut table = Table::new(&[
        "t",
        "rho00",
        "rho11",
        "rho01_re",
        "rho01_im",
        "correlation",
        "record",
        "e00",
        "e11",
        "e01_re",
        "e01_im",
        "smoothed_p0",
    ]);
    for (i, t) in grid.times().enumerate() {
        let rho = propagate_rho(&rho0, &spec, t)?;
        let e = &effects[i];
        let smoothed = pqs_probability(&rho, e, &povm_z())?.get(0);
        let (r01, e01) = (rho.mat().get(0, 1), e.mat().get(0, 1));
        table.push(vec![
            num(t),
            num(rho.rho00()),
            num(rho.rho11()),
            num(r01.re),
            num(r01.im),
            num(symmetrized_correlation(&rho0, &spec, t)?),
            record.get(i).map(|&v| num(v)).unwrap_or_default(),
            num(e.e00()),
            num(e.e11()),
            num(e01.re),
            num(e01.im),
            num(smoothed),
        ]);
    }
    Ok(Output::table(table))
}
