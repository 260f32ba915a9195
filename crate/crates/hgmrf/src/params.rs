//! Command parameters from flags and JSON configuration files.
//!
//! A configuration file is a JSON object whose keys are flag names without
//! the leading dashes (`snr-db`; `snr_db` and `snrdb` are accepted too).
//! Flags given on the command line override file values. Keys that the
//! CLI itself writes into JSON output (`command`, `result`, `fits`, ...)
//! are ignored, so an output file can be fed back as a configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use hgmrf_core::experiments::FitWindow;
use hgmrf_core::oracle::Boundary;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Keys that JSON output adds next to the parameters.
pub const OUTPUT_KEYS: &[&str] = &[
    "command", "kind", "result", "table", "fits", "trends", "summary", "notes",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Torus,
    Free,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Torus => Boundary::Torus,
            BoundaryArg::Free => Boundary::Free,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioArg {
    /// Sweep sensing energy at fixed n and spacing.
    #[value(alias = "a")]
    #[serde(alias = "a")]
    FixedAreaSensingSweep,
    /// Sweep n at fixed spacing and sensing energy.
    #[value(alias = "b")]
    #[serde(alias = "b")]
    FixedSensingAreaSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Fit window: `all`, `top-decade` or `LO:HI`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WindowArg(pub FitWindow);

impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Self(FitWindow::All)),
            "top-decade" => Ok(Self(FitWindow::TopDecade)),
            _ => {
                let (lo, hi) = s.split_once(':').ok_or_else(|| {
                    format!("invalid window '{s}': expected all, top-decade or LO:HI")
                })?;
                let lo: f64 = lo
                    .parse()
                    .map_err(|_| format!("invalid window bound '{lo}'"))?;
                let hi: f64 = hi
                    .parse()
                    .map_err(|_| format!("invalid window bound '{hi}'"))?;
                if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                    return Err(format!("window '{s}' is empty"));
                }
                Ok(Self(FitWindow::Range(lo, hi)))
            }
        }
    }
}

impl TryFrom<String> for WindowArg {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<WindowArg> for String {
    fn from(w: WindowArg) -> String {
        w.to_string()
    }
}

impl fmt::Display for WindowArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            FitWindow::All => f.write_str("all"),
            FitWindow::TopDecade => f.write_str("top-decade"),
            FitWindow::Range(lo, hi) => write!(f, "{lo:?}:{hi:?}"),
        }
    }
}

/// Every parameter any command accepts. `None` means not given.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Edge dependence factor in [0, 1/4].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// Signal-to-noise ratio, linear.
    #[arg(long, conflicts_with = "snr_db")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    /// Signal-to-noise ratio in dB.
    #[arg(long = "snr-db")]
    #[serde(
        skip_serializing_if = "Option::is_none",
        alias = "snr_db",
        alias = "snrdb"
    )]
    pub snr_db: Option<f64>,
    /// Field diffusion rate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Sensor spacing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Lattice side.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryArg>,
    /// Monte Carlo replicates.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Covered area for the density sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioArg>,
    /// Propagation loss exponent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Communication energy per hop at unit spacing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    /// Sensing energy per node.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub es: Option<f64>,
    /// SNR per Joule of sensing energy.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Measurement noise variance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    /// Initial quadrature points per axis.
    #[arg(long = "quad-points")]
    #[serde(
        skip_serializing_if = "Option::is_none",
        alias = "quad_points",
        alias = "quadpoints"
    )]
    pub quad_points: Option<usize>,
    /// Quadrature relative tolerance.
    #[arg(long = "quad-rtol")]
    #[serde(
        skip_serializing_if = "Option::is_none",
        alias = "quad_rtol",
        alias = "quadrtol"
    )]
    pub quad_rtol: Option<f64>,
    /// Comma-separated sweep values for experiments.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Fit window: all, top-decade or LO:HI.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowArg>,
    /// Output file; standard output when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),* $(,)?) => {
        Params { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Params {
    /// `self` where given, `base` otherwise.
    pub fn over(self, base: Params) -> Params {
        overlay!(
            self,
            base,
            zeta,
            snr,
            snr_db,
            alpha,
            spacing,
            n,
            boundary,
            replicates,
            seed,
            area,
            scenario,
            nu,
            e0,
            es,
            beta,
            sigma2,
            quad_points,
            quad_rtol,
            values,
            window,
            out,
            format,
        )
    }

    /// Names of the parameters that are set, as flag names.
    pub fn given(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub command: Option<String>,
    pub kind: Option<String>,
    pub params: Params,
}

pub fn parse_config(text: &str) -> Result<FileConfig, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("configuration is not valid JSON: {e}")))?;
    let serde_json::Value::Object(mut map) = value else {
        return Err(CliError::Usage(
            "configuration must be a JSON object".into(),
        ));
    };
    let text_key =
        |map: &mut serde_json::Map<String, serde_json::Value>, key: &str| match map.remove(key) {
            None => Ok(None),
            Some(serde_json::Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(CliError::Usage(format!(
                "configuration key '{key}' must be a string, found {other}"
            ))),
        };
    let command = text_key(&mut map, "command")?;
    let kind = text_key(&mut map, "kind")?;
    for key in OUTPUT_KEYS {
        map.remove(*key);
    }
    let params: Params = serde_json::from_value(serde_json::Value::Object(map))
        .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
    Ok(FileConfig {
        command,
        kind,
        params,
    })
}
