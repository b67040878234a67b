//! JSON description of a system.
//!
//! ```json
//! {"id": "t11a", "n": 3, "m": 1, "b": {"2": 1.0, "3": -0.5}}
//! ```
//! Coefficients are given either densely (`"a": [0, 1, 0.3]`) or as an
//! index map. `A` defaults to 1. Unlisted coefficients are zero.

use std::collections::BTreeMap;
use std::path::Path;

use lienard_core::model::LienardSystem;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    Dense(Vec<f64>),
    /// keys are decimal indices; untagged maps cannot carry integer keys
    Sparse(BTreeMap<String, f64>),
}

impl Default for Coefficients {
    fn default() -> Self {
        Coefficients::Sparse(BTreeMap::new())
    }
}

impl Coefficients {
    fn pairs(&self) -> Result<Vec<(usize, f64)>, CliError> {
        match self {
            Coefficients::Dense(v) => Ok(v.iter().copied().enumerate().collect()),
            Coefficients::Sparse(m) => m
                .iter()
                .map(|(k, &v)| k.parse().map(|k| (k, v)).map_err(|_| CliError::Input(format!("coefficient index {k:?} is not a number"))))
                .collect(),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A", default = "one")]
    pub lead: f64,
    #[serde(default)]
    pub b: Coefficients,
    #[serde(default)]
    pub a: Coefficients,
}

impl SystemDesc {
    pub fn build(&self) -> Result<LienardSystem, CliError> {
        LienardSystem::sparse(self.n, self.m, self.lead, &self.b.pairs()?, &self.a.pairs()?)
            .map_err(|e| CliError::Input(format!("system {}: {e}", self.label())))
    }

    pub fn from_system(sys: &LienardSystem, id: Option<String>) -> Self {
        let sparse = |c: &[f64]| Coefficients::Sparse(c.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, v)| (k.to_string(), *v)).collect());
        SystemDesc { id, n: sys.n(), m: sys.m(), lead: sys.lead(), b: sparse(sys.b()), a: sparse(sys.a()) }
    }

    pub fn label(&self) -> String {
        self.id.clone().unwrap_or_else(|| format!("n{}m{}", self.n, self.m))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid system JSON: {e}")))
    }

    /// `source` is inline JSON when it starts with `{`, a path otherwise.
    pub fn load(source: &str) -> Result<Self, CliError> {
        if source.trim_start().starts_with('{') {
            return Self::parse(source);
        }
        Self::parse(&read(Path::new(source))?)
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// One system per non-empty line; `#` starts a comment line.
pub fn parse_batch(text: &str) -> Result<Vec<SystemDesc>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| SystemDesc::parse(l).map_err(|e| CliError::Input(format!("line {}: {e}", i + 1))))
        .collect()
}
