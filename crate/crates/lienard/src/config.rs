//! Fully resolved run configuration. Every report embeds it.

use std::path::PathBuf;

use lienard_core::classify::{Coefficient, VerifyOptions};
use lienard_core::integrals::LimitOptions;
use lienard_core::quad::Tolerance;
use lienard_core::relation::{DirectionChoice, OrbitOptions};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::system::SystemDesc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Classify,
    Orbit,
    Dim,
    Portrait,
    Verify,
    Sweep,
    Balance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Format {
    #[serde(rename = "csv")]
    #[value(name = "csv")]
    Csv,
    #[serde(rename = "json")]
    #[value(name = "json")]
    Json,
    #[serde(rename = "svg")]
    #[value(name = "svg")]
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Direction {
    #[serde(rename = "auto")]
    #[value(name = "auto")]
    Auto,
    #[serde(rename = "S")]
    #[value(name = "S")]
    Forward,
    #[serde(rename = "Sinv")]
    #[value(name = "Sinv")]
    Inverse,
}

impl From<Direction> for DirectionChoice {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Auto => DirectionChoice::Auto,
            Direction::Forward => DirectionChoice::ForwardS,
            Direction::Inverse => DirectionChoice::InverseS,
        }
    }
}

/// Numeric knobs shared by all commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Knobs {
    /// relative quadrature tolerance
    pub tol: f64,
    pub max_iter: usize,
    pub r_floor: f64,
    pub y0: f64,
    pub delta_decades: Option<f64>,
    pub direction: Direction,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs { tol: 1e-12, max_iter: 10_000, r_floor: 1e-8, y0: 1e3, delta_decades: None, direction: Direction::Auto }
    }
}

impl Knobs {
    pub fn limit_options(&self) -> LimitOptions {
        // the extrapolation ladder runs one decade tighter than the orbit
        let base = LimitOptions::default();
        LimitOptions { quad: Tolerance { abs: base.quad.abs, rel: (0.1 * self.tol).max(1e-15) }, ..base }
    }

    pub fn orbit_options(&self) -> OrbitOptions {
        OrbitOptions {
            quad: Tolerance { abs: 0.0, rel: self.tol },
            max_iter: self.max_iter,
            r_floor: self.r_floor,
            limit: self.limit_options(),
            ..OrbitOptions::default()
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions { orbit: self.orbit_options(), y0: self.y0, delta_decades: self.delta_decades, ..VerifyOptions::default() }
    }

    pub fn check(&self) -> Result<(), CliError> {
        let bad = |what: &str| Err(CliError::Input(format!("{what} out of range")));
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol");
        }
        if !(self.r_floor > 0.0 && self.r_floor < 1.0) {
            return bad("r-floor");
        }
        if !(self.y0 > 0.0 && self.y0.is_finite()) {
            return bad("y0");
        }
        if self.max_iter == 0 {
            return bad("max-iter");
        }
        if let Some(d) = self.delta_decades {
            if !(d > 0.0) {
                return bad("delta-decades");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemDesc>,
    /// JSON-lines file of systems for `sweep`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<PathBuf>,
    /// one-column CSV of points for `dim`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub knobs: Knobs,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// orbit in the chart variable `r` (or `ĥr`) instead of `y`
    #[serde(default)]
    pub compactified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

pub fn default_jobs() -> usize {
    4
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            system: None,
            batch: None,
            input: None,
            knobs: Knobs::default(),
            format: default_format(command),
            out: None,
            compactified: false,
            coefficient: None,
            bracket: None,
            jobs: default_jobs(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn system(&self) -> Result<&SystemDesc, CliError> {
        self.system.as_ref().ok_or_else(|| CliError::Input("--system is required".into()))
    }
}

pub fn default_format(command: Command) -> Format {
    match command {
        Command::Orbit | Command::Dim | Command::Verify | Command::Sweep => Format::Csv,
        _ => Format::Json,
    }
}

/// `a3` or `b2`.
pub fn parse_coefficient(s: &str) -> Result<Coefficient, CliError> {
    let err = || CliError::Input(format!("coefficient must look like a3 or b2, got {s:?}"));
    let (kind, idx) = s.split_at(1.min(s.len()));
    let k: usize = idx.parse().map_err(|_| err())?;
    match kind {
        "a" => Ok(Coefficient::A(k)),
        "b" => Ok(Coefficient::B(k)),
        _ => Err(err()),
    }
}
