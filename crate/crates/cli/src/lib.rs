//! Configuration, report rendering and the built-in verification matrix for
//! the `finslerlab` command-line tool.

pub mod matrix;
pub mod output;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use finslerlab_core::catalog::{FieldSpec, MetricSpec};
use finslerlab_core::verify::{Suite, VerifyConfig};

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    pub format: Format,
}

/// One full verification run, serializable losslessly; unknown keys are
/// rejected on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricSpec,
    pub change: FieldSpec,
    #[serde(default = "all_suite_names")]
    pub suites: Vec<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_order")]
    pub jet_order: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

pub fn all_suite_names() -> Vec<String> {
    Suite::ALL.iter().map(|s| s.name().to_string()).collect()
}

fn default_samples() -> usize {
    50
}

fn default_seed() -> u64 {
    0xf1a5_1e55
}

fn default_order() -> usize {
    finslerlab_core::DEFAULT_ORDER
}

impl RunConfig {
    pub fn new(metric: MetricSpec, change: FieldSpec) -> Self {
        RunConfig {
            metric,
            change,
            suites: all_suite_names(),
            samples: default_samples(),
            seed: default_seed(),
            jet_order: default_order(),
            tolerances: BTreeMap::new(),
            output: None,
        }
    }

    /// Resolves suite names, rejecting unknown ones by name.
    pub fn resolve_suites(&self) -> Result<Vec<Suite>, String> {
        let mut out = Vec::with_capacity(self.suites.len());
        for name in &self.suites {
            match Suite::parse(name) {
                Some(s) => out.push(s),
                None => return Err(format!("unknown suite `{name}`")),
            }
        }
        Ok(out)
    }

    pub fn to_verify_config(&self) -> VerifyConfig {
        let mut vc = VerifyConfig::new(self.metric.clone(), self.change.clone());
        vc.samples = self.samples;
        vc.seed = self.seed;
        vc.order = self.jet_order;
        vc.tolerance_overrides =
            self.tolerances.iter().map(|(id, tol)| (id.clone(), *tol)).collect();
        vc
    }
}
