//! Sweep tables: the marginal curve, post-selected windows and the θ × E00 map.

use pastq::lab::{run_sweep, Oracle, PostSelection, SweepRow};
use pastq::readout::{xi_from_e00, ReadoutChannel};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::{num, opt, Table};
use crate::Output;

fn status(row: &SweepRow) -> &'static str {
    if row.count() == 0 {
        "empty_bin"
    } else {
        "ok"
    }
}

/// Unconditioned quantum-oracle sweep for every prepared ρ00.
pub fn fig1c(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut rows = Vec::new();
    for &rho00 in &cfg.experiment.rho00 {
        let sweep = run_sweep(&cfg.plan(rho00, PostSelection::All, Oracle::Quantum)?)?;
        rows.extend(sweep.rows.into_iter().map(|r| (rho00, r)));
    }
    // stable: preparations keep their configured order within each θ
    rows.sort_by(|a, b| a.1.theta.total_cmp(&b.1.theta));

    let mut table = Table::new(&[
        "rho00",
        "theta",
        "n",
        "p_tilde_raw",
        "p_tilde_corrected",
        "stderr",
        "stderr_corrected",
        "p_rho_pred",
    ]);
    for (rho00, r) in rows {
        table.push(vec![
            num(rho00),
            num(r.theta),
            r.count().to_string(),
            opt(r.p_tilde),
            opt(r.p_tilde_corrected),
            opt(r.stderr),
            opt(r.stderr_corrected),
            num(r.p_rho_pred),
        ]);
    }
    Ok(Output::table(table))
}

/// Quantum-oracle sweeps post-selected on one E00 window per preparation.
pub fn fig4(cfg: &RunConfig) -> Result<Output, CliError> {
    let ex = &cfg.experiment;
    let mut table = Table::new(&[
        "rho00",
        "e00_center",
        "theta",
        "n_plus",
        "n_minus",
        "e00_mean",
        "p_tilde",
        "p_tilde_corrected",
        "stderr",
        "stderr_corrected",
        "p_past_pred",
        "p_past_band_lo",
        "p_past_band_hi",
        "p_cm_pred",
        "status",
    ]);
    let mut warnings = Vec::new();
    for (&rho00, &center) in ex.rho00.iter().zip(&ex.e00_centers) {
        let window = PostSelection::Window {
            center,
            half_width: ex.half_width,
        };
        let sweep = run_sweep(&cfg.plan(rho00, window, Oracle::Quantum)?)?;
        for r in &sweep.rows {
            if r.count() == 0 {
                warnings.push(format!(
                    "empty post-selection bin: rho00={rho00} E00={center}±{} theta={}",
                    ex.half_width, r.theta
                ));
            }
            table.push(vec![
                num(rho00),
                num(center),
                num(r.theta),
                r.n_plus.to_string(),
                r.n_minus.to_string(),
                opt(r.e00_mean),
                opt(r.p_tilde),
                opt(r.p_tilde_corrected),
                opt(r.stderr),
                opt(r.stderr_corrected),
                opt(r.p_past_pred),
                opt(r.p_past_band.map(|b| b.0)),
                opt(r.p_past_band.map(|b| b.1)),
                opt(r.p_cm_pred),
                status(r).into(),
            ]);
        }
    }
    Ok(Output {
        warnings,
        ..Output::table(table)
    })
}

/// Full θ × E00-bin map for every prepared ρ00.
pub fn fig3(cfg: &RunConfig) -> Result<Output, CliError> {
    let channel = ReadoutChannel::new(cfg.readout.sigma)?;
    let grid = PostSelection::Grid {
        width: cfg.experiment.bin_width,
    };
    let mut table = Table::new(&[
        "rho00",
        "theta",
        "e00_lo",
        "e00_hi",
        "e00_bin_center",
        "xi_equiv",
        "n",
        "n_plus",
        "e00_mean",
        "p_tilde",
        "p_tilde_corrected",
        "stderr",
        "stderr_corrected",
        "p_rho_pred",
        "p_past_pred",
        "p_cm_pred",
        "status",
    ]);
    for &rho00 in &cfg.experiment.rho00 {
        let sweep = run_sweep(&cfg.plan(rho00, grid, Oracle::Quantum)?)?;
        for r in &sweep.rows {
            let center = r.bin.center();
            table.push(vec![
                num(rho00),
                num(r.theta),
                num(r.bin.lo),
                num(r.bin.hi),
                num(center),
                num(xi_from_e00(&channel, center)),
                r.count().to_string(),
                r.n_plus.to_string(),
                opt(r.e00_mean),
                opt(r.p_tilde),
                opt(r.p_tilde_corrected),
                opt(r.stderr),
                opt(r.stderr_corrected),
                num(r.p_rho_pred),
                opt(r.p_past_pred),
                opt(r.p_cm_pred),
                status(r).into(),
            ]);
        }
    }
    Ok(Output::table(table))
}
