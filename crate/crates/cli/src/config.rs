//! TOML run configuration with field-precise validation.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pastq::dynamics::LindbladSpec;
use pastq::lab::{uniform_theta_grid, ExperimentPlan, Oracle, PostSelection, ProbeDecay};
use pastq::readout::{ErrorModel, FidelityModel};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub experiment: ExperimentSection,
    pub readout: ReadoutSection,
    pub fidelity: FidelitySection,
    pub dynamics: DynamicsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub seed: u64,
    /// Shots per θ value.
    pub shots: u64,
    /// Number of θ values, evenly spaced over [0, π].
    pub theta_points: usize,
    /// Prepared ground-state populations.
    pub rho00: Vec<f64>,
    /// Post-selection window centers, paired with `rho00` by position.
    pub e00_centers: Vec<f64>,
    pub half_width: f64,
    /// E00 bin width of the 2-D sweep.
    pub bin_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutSection {
    pub sigma: f64,
    /// Duration of the E probe, in the units of `probe_t1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_t1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorModelName {
    Symmetric,
    Asymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelitySection {
    pub base: f64,
    /// Projective pulse length in seconds.
    pub measurement_time: f64,
    /// Excited-state decay probability during the pulse.
    pub decay_fraction: f64,
    pub model: ErrorModelName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub rabi_frequency: f64,
    pub k: f64,
    pub eta: f64,
    pub gamma1: f64,
    pub initial_rho00: f64,
    pub t_end: f64,
    pub dt: f64,
    /// File with one record value per line; synthesized when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<PathBuf>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            seed: 20140101,
            shots: 50_000,
            theta_points: 11,
            rho00: vec![0.91, 0.535, 0.075],
            e00_centers: vec![0.916, 0.466, 0.068],
            half_width: ExperimentPlan::DEFAULT_HALF_WIDTH,
            bin_width: ExperimentPlan::DEFAULT_BIN_WIDTH,
        }
    }
}

impl Default for ReadoutSection {
    fn default() -> Self {
        ReadoutSection {
            sigma: ExperimentPlan::DEFAULT_SIGMA_E,
            probe_time: None,
            probe_t1: None,
        }
    }
}

impl Default for FidelitySection {
    fn default() -> Self {
        FidelitySection {
            base: FidelityModel::DEFAULT_BASE_FIDELITY,
            measurement_time: FidelityModel::DEFAULT_MEASUREMENT_TIME,
            decay_fraction: FidelityModel::DEFAULT_DECAY_FRACTION,
            model: ErrorModelName::Symmetric,
        }
    }
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            rabi_frequency: 1.0,
            k: 0.5,
            eta: 0.5,
            gamma1: 0.1,
            initial_rho00: 1.0,
            t_end: 10.0,
            dt: 0.01,
            record: None,
        }
    }
}

/// A loaded configuration together with the text it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    source: String,
    base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn defaults() -> Self {
        LoadedConfig {
            config: RunConfig::default(),
            source: String::new(),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let source = fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut loaded = Self::parse(&source)?;
        loaded.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(loaded)
    }

    pub fn parse(source: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(source).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        Ok(LoadedConfig {
            config,
            source: source.to_owned(),
            base_dir: PathBuf::from("."),
        })
    }

    pub fn record_path(&self) -> Option<PathBuf> {
        self.config
            .dynamics
            .record
            .as_ref()
            .map(|p| self.base_dir.join(p))
    }

    /// Field validation; messages name the field and, when the file sets it, the line.
    pub fn validate(&self) -> Result<(), CliError> {
        self.config
            .problems()
            .into_iter()
            .next()
            .map_or(Ok(()), |(section, key, msg)| {
                let at = line_of(&self.source, section, key)
                    .map(|l| format!(" (line {l})"))
                    .unwrap_or_default();
                Err(CliError::Validation(format!("{section}.{key}: {msg}{at}")))
            })
    }
}

/// 1-based line of `key = ...` inside `[section]`.
fn line_of(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim();
        } else if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn probability(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl RunConfig {
    fn problems(&self) -> Vec<(&'static str, &'static str, String)> {
        let mut out = Vec::new();
        let mut check = |ok: bool, section, key, msg: &str| {
            if !ok {
                out.push((section, key, msg.to_owned()));
            }
        };
        let ex = &self.experiment;
        check(ex.shots >= 1, "experiment", "shots", "must be at least 1");
        check(
            ex.theta_points >= 2,
            "experiment",
            "theta_points",
            "must be at least 2",
        );
        check(
            !ex.rho00.is_empty(),
            "experiment",
            "rho00",
            "needs at least one value",
        );
        check(
            ex.rho00.iter().all(|&p| probability(p)),
            "experiment",
            "rho00",
            "values must lie in [0, 1]",
        );
        check(
            ex.e00_centers.len() == ex.rho00.len(),
            "experiment",
            "e00_centers",
            "needs one center per rho00 value",
        );
        check(
            ex.e00_centers.iter().all(|&p| probability(p)),
            "experiment",
            "e00_centers",
            "values must lie in [0, 1]",
        );
        check(
            (0.0..=0.5).contains(&ex.half_width),
            "experiment",
            "half_width",
            "must lie in [0, 0.5]",
        );
        check(
            ex.bin_width > 0.0 && ex.bin_width <= 1.0,
            "experiment",
            "bin_width",
            "must lie in (0, 1]",
        );
        check(
            i64::try_from(ex.seed).is_ok(),
            "experiment",
            "seed",
            "must fit in a signed 64-bit integer",
        );

        let ro = &self.readout;
        check(
            positive(ro.sigma),
            "readout",
            "sigma",
            "must be positive and finite",
        );
        check(
            ro.probe_time.is_some() == ro.probe_t1.is_some(),
            "readout",
            "probe_time",
            "probe_time and probe_t1 must be set together",
        );
        check(
            ro.probe_time.is_none_or(positive),
            "readout",
            "probe_time",
            "must be positive and finite",
        );
        check(
            ro.probe_t1.is_none_or(positive),
            "readout",
            "probe_t1",
            "must be positive and finite",
        );

        let fi = &self.fidelity;
        check(
            fi.base > 0.5 && fi.base <= 1.0,
            "fidelity",
            "base",
            "must lie in (0.5, 1]",
        );
        check(
            positive(fi.measurement_time),
            "fidelity",
            "measurement_time",
            "must be positive and finite",
        );
        check(
            (0.0..1.0).contains(&fi.decay_fraction),
            "fidelity",
            "decay_fraction",
            "must lie in [0, 1)",
        );

        let dy = &self.dynamics;
        for (key, v) in [
            ("rabi_frequency", dy.rabi_frequency),
            ("k", dy.k),
            ("gamma1", dy.gamma1),
        ] {
            check(
                v.is_finite() && v >= 0.0,
                "dynamics",
                key,
                "must be finite and non-negative",
            );
        }
        check(probability(dy.eta), "dynamics", "eta", "must lie in [0, 1]");
        check(
            probability(dy.initial_rho00),
            "dynamics",
            "initial_rho00",
            "must lie in [0, 1]",
        );
        check(
            positive(dy.t_end),
            "dynamics",
            "t_end",
            "must be positive and finite",
        );
        check(
            positive(dy.dt) && dy.dt <= dy.t_end,
            "dynamics",
            "dt",
            "must be positive and at most t_end",
        );
        out
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        let mut grid = uniform_theta_grid(self.experiment.theta_points);
        // pin the last point so that θ = π compares exactly
        if let Some(last) = grid.last_mut() {
            *last = PI;
        }
        grid
    }

    pub fn fidelity_model(&self) -> Result<FidelityModel, CliError> {
        let f = &self.fidelity;
        let model = match f.model {
            ErrorModelName::Symmetric => ErrorModel::Symmetric,
            ErrorModelName::Asymmetric => ErrorModel::Asymmetric,
        };
        let t1 = FidelityModel::t1_from_decay_fraction(f.measurement_time, f.decay_fraction);
        Ok(FidelityModel::new(f.base, f.measurement_time, t1, model)?)
    }

    pub fn plan(
        &self,
        rho00: f64,
        post_selection: PostSelection,
        oracle: Oracle,
    ) -> Result<ExperimentPlan, CliError> {
        let mut plan = ExperimentPlan::new(rho00, self.theta_grid(), self.experiment.shots);
        plan.sigma_e = self.readout.sigma;
        plan.fidelity = self.fidelity_model()?;
        plan.post_selection = post_selection;
        plan.oracle = oracle;
        plan.master_seed = self.experiment.seed;
        plan.probe_decay = match (self.readout.probe_time, self.readout.probe_t1) {
            (Some(probe_time), Some(t1)) => Some(ProbeDecay { probe_time, t1 }),
            _ => None,
        };
        Ok(plan)
    }

    pub fn lindblad(&self) -> Result<LindbladSpec, CliError> {
        let d = &self.dynamics;
        Ok(LindbladSpec::new(d.rabi_frequency, d.k, d.eta, d.gamma1)?)
    }

    /// Canonical TOML text of the resolved configuration.
    pub fn resolved_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn fingerprint(&self) -> Result<String, CliError> {
        let digest = Sha256::digest(self.resolved_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}
