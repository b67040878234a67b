//! Command-line parsing into a [`RunConfig`].

use std::path::PathBuf;

use clap::Parser;

use crate::config::{default_format, Command, Direction, Format, Knobs, RunConfig};
use crate::error::CliError;
use crate::system::{self, SystemDesc};

#[derive(Debug, Parser)]
#[command(name = "lienard", version, about = "Slow relation orbits and their box dimension for slow-fast Lienard systems")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// system as a JSON file or inline JSON
    #[arg(long)]
    pub system: Option<String>,
    /// full run configuration as JSON; other flags are then rejected
    #[arg(long, conflicts_with_all = ["system", "tol", "y0", "max_iter", "r_floor", "delta_decades", "direction", "format", "input", "batch", "compactified", "coefficient", "bracket", "jobs"])]
    pub config: Option<PathBuf>,
    /// relative quadrature tolerance [default: 1e-12]
    #[arg(long)]
    pub tol: Option<f64>,
    /// start of the orbit in the finite plane [default: 1000]
    #[arg(long)]
    pub y0: Option<f64>,
    /// orbit length budget [default: 10000]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// smallest chart value before an orbit stops [default: 1e-8]
    #[arg(long)]
    pub r_floor: Option<f64>,
    /// decades of δ spanned by the fit and the nondegeneracy check [default: whole window]
    #[arg(long)]
    pub delta_decades: Option<f64>,
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// write the artifact here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// one-column CSV of decreasing points (dim)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON-lines file of systems (sweep)
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// orbit in the chart variable instead of y (orbit)
    #[arg(long)]
    pub compactified: bool,
    /// coefficient to tune, such as a2 (balance)
    #[arg(long)]
    pub coefficient: Option<String>,
    /// bracket for the tuned coefficient (balance)
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub bracket: Option<Vec<f64>>,
    /// worker threads (sweep) [default: 4]
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Args {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.config {
            let mut cfg: RunConfig =
                serde_json::from_str(&system::read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            if cfg.command != self.command {
                return Err(CliError::Input(format!("config is for {:?}, not {:?}", cfg.command, self.command)));
            }
            if self.out.is_some() {
                cfg.out = self.out;
            }
            return Ok(cfg);
        }
        let d = Knobs::default();
        let knobs = Knobs {
            tol: self.tol.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            r_floor: self.r_floor.unwrap_or(d.r_floor),
            y0: self.y0.unwrap_or(d.y0),
            delta_decades: self.delta_decades,
            direction: self.direction.unwrap_or(d.direction),
        };
        let mut cfg = RunConfig::new(self.command);
        cfg.system = self.system.as_deref().map(SystemDesc::load).transpose()?;
        cfg.knobs = knobs;
        cfg.format = self.format.unwrap_or(default_format(self.command));
        cfg.out = self.out;
        cfg.input = self.input;
        cfg.batch = self.batch;
        cfg.compactified = self.compactified;
        cfg.coefficient = self.coefficient;
        cfg.bracket = self.bracket.map(|b| (b[0], b[1]));
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        Args::try_parse_from(std::iter::once("lienard").chain(args.iter().copied())).unwrap().into_config()
    }

    #[test]
    fn defaults_are_resolved() {
        let c = parse(&["verify", "--system", r#"{"n": 1, "m": 3, "a": [0, 1]}"#]).unwrap();
        assert_eq!(c.knobs, Knobs::default());
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.jobs, 4);
    }

    #[test]
    fn flags_override() {
        let c = parse(&["balance", "--system", r#"{"n": 1, "m": 5}"#, "--coefficient", "a2", "--bracket", "-0.5", "0", "--direction", "Sinv", "--tol", "1e-10"])
            .unwrap();
        assert_eq!(c.bracket, Some((-0.5, 0.0)));
        assert_eq!(c.knobs.direction, Direction::Inverse);
        assert_eq!(c.knobs.tol, 1e-10);
    }

    #[test]
    fn bad_system_is_input_error() {
        assert_eq!(parse(&["classify", "--system", r#"{"n": 1, "m": 3, "q": 1}"#]).unwrap_err().exit_code(), 1);
    }
}
