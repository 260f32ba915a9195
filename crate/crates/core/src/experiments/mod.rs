//! Scaling-law sweeps and asymptote fits.
//!
//! Every runner returns an [`ExperimentOutput`]: a sweep table, the fits
//! made on it and, where relevant, qualitative trend labels. All runners are
//! deterministic.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

mod fit;
mod limits;
mod scaling;

pub use fit::{
    fit_affine_origin, fit_exponential_with_sqrt_prefactor, fit_logarithmic, fit_power_law,
};
pub use limits::{exp_snr_limits, exp_zeta_limits, SnrLimitsConfig, ZetaLimitsConfig};
pub use scaling::{
    exp_area_scaling, exp_density_scaling, exp_energy_scaling, exp_spacing_convergence,
    DensityScalingConfig, EnergyScenario,
};

/// Minimum number of sweep points for any fitted experiment.
pub const MIN_SWEEP_POINTS: usize = 4;

/// Relative change below which the last step of a sequence counts as
/// converged.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub parameter: f64,
    pub values: Vec<f64>,
}

/// Table of outputs against a strictly increasing swept parameter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub parameter_name: String,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn new(parameter_name: &str, columns: &[&str]) -> Self {
        Self {
            parameter_name: parameter_name.into(),
            columns: columns.iter().map(|&c| c.into()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, parameter: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::InvalidModel(
                "row width differs from the column count",
            ));
        }
        if let Some(last) = self.rows.last() {
            if !(parameter > last.parameter) {
                return Err(Error::invalid(
                    "parameter",
                    parameter,
                    "sweep values must be strictly increasing",
                ));
            }
        }
        self.rows.push(SweepRow { parameter, values });
        Ok(())
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.parameter).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitModel {
    /// `log y = log c + p·log x`; estimates `exponent`, `log_intercept`.
    PowerLaw,
    /// `log(y/√x) = log c − r·x`; estimates `decay_rate`, `log_prefactor`,
    /// `prefactor`.
    ExponentialWithSqrtPrefactor,
    /// `y = a + b·log x`; estimates `slope`, `intercept`.
    Logarithmic,
    /// `y = b·x`; estimates `slope`, `intercept` (always 0).
    Affine,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    /// What was fitted, e.g. `efficiency_kli_vs_area`.
    pub name: String,
    pub model: FitModel,
    pub estimates: BTreeMap<String, f64>,
    pub r_squared: f64,
    /// Abscissa range actually used.
    pub window: (f64, f64),
    pub points: usize,
}

impl FitResult {
    pub fn estimate(&self, key: &str) -> Option<f64> {
        self.estimates.get(key).copied()
    }

    pub(crate) fn named(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }
}

/// Which sweep points a fit uses.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitWindow {
    All,
    /// Abscissas within a factor 10 of the largest.
    TopDecade,
    Range(f64, f64),
}

impl FitWindow {
    pub(crate) fn select(&self, points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = match *self {
            FitWindow::All => (f64::NEG_INFINITY, f64::INFINITY),
            // small slack so that an exact decade keeps its lower end
            FitWindow::TopDecade => (max / 10.0 * (1.0 - 1e-12), f64::INFINITY),
            FitWindow::Range(lo, hi) => (lo, hi),
        };
        points
            .iter()
            .copied()
            .filter(|&(x, _)| x >= lo && x <= hi)
            .collect()
    }
}

/// Qualitative behaviour of the tail of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Trend {
    Decreasing,
    Converging,
    Increasing,
    Mixed,
}

/// Classifies the last three values: converging when the final step
/// changes the value by less than [`CONVERGENCE_TOLERANCE`] relative,
/// otherwise by the signs of the two final steps.
pub fn classify_trend(values: &[f64]) -> Result<Trend> {
    if values.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: values.len(),
        });
    }
    let tail = &values[values.len() - 3..];
    let (a, b, c) = (tail[0], tail[1], tail[2]);
    if ((c - b) / b).abs() < CONVERGENCE_TOLERANCE {
        return Ok(Trend::Converging);
    }
    Ok(if b > a && c > b {
        Trend::Increasing
    } else if b < a && c < b {
        Trend::Decreasing
    } else {
        Trend::Mixed
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentOutput {
    pub sweep: SweepResult,
    pub fits: Vec<FitResult>,
    pub trends: Vec<(String, Trend)>,
    /// Scalar diagnostics that are not fits, e.g. relative spreads.
    pub summary: BTreeMap<String, f64>,
    /// Warnings and caveats attached to the run.
    pub notes: Vec<String>,
}

impl ExperimentOutput {
    pub fn fit(&self, name: &str) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn trend(&self, name: &str) -> Option<Trend> {
        self.trends.iter().find(|t| t.0 == name).map(|t| t.1)
    }

    pub(crate) fn new(sweep: SweepResult) -> Self {
        Self {
            sweep,
            fits: Vec::new(),
            trends: Vec::new(),
            summary: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn fit_column<F>(
        &mut self,
        name: &str,
        x: &[f64],
        y: &[f64],
        window: FitWindow,
        fitter: F,
    ) -> Result<()>
    where
        F: Fn(&[(f64, f64)]) -> Result<FitResult>,
    {
        let points: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
        let fit = fitter(&window.select(&points))?.named(name);
        self.fits.push(fit);
        Ok(())
    }
}

/// `(max − min)/|mean|` of a slice.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean.abs()
}

/// `count` points spaced evenly in `log10` from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (libm::log10(lo), libm::log10(hi));
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                libm::pow(10.0, a + (b - a) * i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Integers `round(lo·(hi/lo)^(i/(count − 1)))`, deduplicated.
pub fn geometric_sides(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = log_grid(lo as f64, hi as f64, count)
        .into_iter()
        .map(|x| libm::round(x) as usize)
        .collect();
    out.dedup();
    out
}

pub(crate) fn check_increasing(name: &'static str, values: &[f64]) -> Result<()> {
    if values.len() < MIN_SWEEP_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_SWEEP_POINTS,
            got: values.len(),
        });
    }
    for w in values.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid(
                name,
                w[1],
                "sweep values must be strictly increasing",
            ));
        }
    }
    Ok(())
}
