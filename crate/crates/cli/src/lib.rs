//! Command implementations behind the `pastq` binary.

pub mod config;
pub mod error;
pub mod figures;
pub mod selftest;
pub mod table;
pub mod trajectory;

use config::LoadedConfig;
use error::CliError;
use table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fig1c,
    Fig3,
    Fig4,
    Dynamics,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fig1c => "fig1c",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Dynamics => "dynamics",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Table(Table),
    Report(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: Body,
    /// Printed to stderr.
    pub warnings: Vec<String>,
    /// Failed selftest checks.
    pub failed: usize,
}

impl Output {
    pub fn table(table: Table) -> Self {
        Output {
            body: Body::Table(table),
            warnings: Vec::new(),
            failed: 0,
        }
    }
}

/// Validates the configuration, runs one command and renders its text.
pub fn execute(command: Command, loaded: &LoadedConfig) -> Result<(String, Output), CliError> {
    loaded.validate()?;
    let cfg = &loaded.config;
    let output = match command {
        Command::Fig1c => figures::fig1c(cfg)?,
        Command::Fig3 => figures::fig3(cfg)?,
        Command::Fig4 => figures::fig4(cfg)?,
        Command::Dynamics => trajectory::dynamics(loaded)?,
        Command::Selftest => selftest::selftest(cfg)?,
    };
    let text = match &output.body {
        Body::Table(t) => t.render(command.name(), cfg)?,
        Body::Report(r) => r.clone(),
    };
    Ok((text, output))
}
