//! CSV tables with `#` metadata lines.

use crate::config::RunConfig;
use crate::error::CliError;

/// `%.9g`-style formatting: 9 significant digits, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn num(x: f64) -> String {
    fmt_g(x)
}

/// Empty cell for a missing value.
pub fn opt(x: Option<f64>) -> String {
    x.map(fmt_g).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Full CSV text: metadata comments, header, rows.
    pub fn render(&self, command: &str, config: &RunConfig) -> Result<String, CliError> {
        let mut out = format!("# pastq {command}\n");
        out += &format!("# seed = {}\n", config.experiment.seed);
        out += &format!("# config_sha256 = {}\n", config.fingerprint()?);
        for line in config.resolved_toml()?.lines() {
            out += if line.is_empty() {
                "#\n".to_owned()
            } else {
                format!("# {line}\n")
            }
            .as_str();
        }
        out += &self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out += &row.join(",");
            out.push('\n');
        }
        Ok(out)
    }
}
