//! Limit behaviour of the SFCAR rates in SNR and in `ζ`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{fit_logarithmic, fit_power_law, log_grid, ExperimentOutput, FitWindow, SweepResult};
use crate::error::{Error, Result};
use crate::rates::sfcar_rates;
use crate::specfun::QuadratureSpec;

/// SNR sweep on a grid with a whole number of points per decade.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SnrLimitsConfig {
    pub zetas: Vec<f64>,
    /// Grid runs from `10^min_decade` to `10^max_decade`.
    pub min_decade: i32,
    pub max_decade: i32,
    pub points_per_decade: usize,
    pub low_window: (f64, f64),
    /// Smallest `S` at which `𝒦(100·S) − 𝒦(S)` is compared to `½ log 100`.
    pub high_snr_from: f64,
}

impl Default for SnrLimitsConfig {
    fn default() -> Self {
        Self {
            zetas: vec![0.0, 0.1, 0.2, 0.24],
            min_decade: -4,
            max_decade: 6,
            points_per_decade: 5,
            low_window: (1e-4, 1e-2),
            high_snr_from: 1e3,
        }
    }
}

fn zeta_label(zeta: f64) -> String {
    format!("{zeta}")
}

/// Low-SNR power laws and high-SNR logarithmic growth of both rates.
///
/// For each `ζ` the sweep holds `kli_zeta_*` and `mi_zeta_*`. Fits:
/// power laws on `low_window` and logarithmic fits from `high_snr_from`
/// upwards. The summary holds the largest deviation of
/// `(𝒦(100·S) − 𝒦(S))/(½ log 100)` from 1.
pub fn exp_snr_limits(config: &SnrLimitsConfig, spec: &QuadratureSpec) -> Result<ExperimentOutput> {
    if config.max_decade - config.min_decade < 3 || config.points_per_decade == 0 {
        return Err(Error::InvalidModel(
            "SNR grid must span at least three decades",
        ));
    }
    let decades = (config.max_decade - config.min_decade) as usize;
    let count = decades * config.points_per_decade + 1;
    let grid = log_grid(
        libm::pow(10.0, config.min_decade as f64),
        libm::pow(10.0, config.max_decade as f64),
        count,
    );
    let mut columns = Vec::new();
    for &z in &config.zetas {
        columns.push(format!("kli_zeta_{}", zeta_label(z)));
        columns.push(format!("mi_zeta_{}", zeta_label(z)));
    }
    let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut sweep = SweepResult::new("snr", &refs);
    let mut notes = Vec::new();
    for &snr in &grid {
        let mut row = Vec::with_capacity(columns.len());
        for &z in &config.zetas {
            let r = sfcar_rates(z, snr, spec)?;
            if !r.converged {
                notes.push(format!(
                    "quadrature did not converge at snr {snr}, zeta {z}"
                ));
            }
            row.push(r.kli_rate);
            row.push(r.mi_rate);
        }
        sweep.push(snr, row)?;
    }
    let mut out = ExperimentOutput::new(sweep);
    out.notes = notes;
    let lag = 2 * config.points_per_decade;
    let half_log_100 = 0.5 * libm::log(100.0);
    for &z in &config.zetas {
        for measure in ["kli", "mi"] {
            let name = format!("{measure}_zeta_{}", zeta_label(z));
            let y = out.sweep.column(&name).unwrap();
            out.fit_column(
                &format!("low_snr_{name}"),
                &grid,
                &y,
                FitWindow::Range(config.low_window.0, config.low_window.1),
                fit_power_law,
            )?;
            out.fit_column(
                &format!("high_snr_{name}"),
                &grid,
                &y,
                FitWindow::Range(config.high_snr_from, f64::INFINITY),
                fit_logarithmic,
            )?;
            let mut worst: f64 = 0.0;
            for i in 0..grid.len().saturating_sub(lag) {
                if grid[i] >= config.high_snr_from * (1.0 - 1e-12) {
                    let ratio = (y[i + lag] - y[i]) / half_log_100;
                    worst = worst.max((ratio - 1.0).abs());
                }
            }
            out.summary
                .insert(format!("high_snr_increment_deviation_{name}"), worst);
        }
    }
    Ok(out)
}

/// Edge-dependence probes near both ends of `[0, 1/4]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZetaLimitsConfig {
    pub snr: f64,
    /// Forward-difference steps from `ζ = 0`.
    pub zero_steps: Vec<f64>,
    /// Points approaching `1/4`.
    pub quarter_points: Vec<f64>,
}

impl Default for ZetaLimitsConfig {
    fn default() -> Self {
        Self {
            snr: 10.0,
            zero_steps: vec![1e-4, 1e-3, 1e-2],
            quarter_points: vec![0.2499, 0.24999],
        }
    }
}

/// Tabulates `𝒦(ζ)`, `𝒦(ζ)/(1/4 − ζ)` and `(𝒦(ζ) − 𝒦(0))/ζ` (and the same
/// for MI) at the configured points.
///
/// Summary entries: relative spread of the forward-difference slopes and
/// relative change of the `1/(1/4 − ζ)`-scaled rate between the outermost
/// points near `1/4`.
pub fn exp_zeta_limits(
    config: &ZetaLimitsConfig,
    spec: &QuadratureSpec,
) -> Result<ExperimentOutput> {
    let mut zetas = vec![0.0];
    zetas.extend_from_slice(&config.zero_steps);
    zetas.extend_from_slice(&config.quarter_points);
    let base = sfcar_rates(0.0, config.snr, spec)?;
    let mut sweep = SweepResult::new(
        "zeta",
        &[
            "kli",
            "mi",
            "kli_over_quarter_gap",
            "mi_over_quarter_gap",
            "kli_slope_from_zero",
            "mi_slope_from_zero",
        ],
    );
    let mut notes = Vec::new();
    for &z in &zetas {
        let r = sfcar_rates(z, config.snr, spec)?;
        if !r.converged {
            notes.push(format!("quadrature did not converge at zeta {z}"));
        }
        let quarter_gap = 0.25 - z;
        let (kli_slope, mi_slope) = if z > 0.0 {
            (
                (r.kli_rate - base.kli_rate) / z,
                (r.mi_rate - base.mi_rate) / z,
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        sweep.push(
            z,
            vec![
                r.kli_rate,
                r.mi_rate,
                r.kli_rate / quarter_gap,
                r.mi_rate / quarter_gap,
                kli_slope,
                mi_slope,
            ],
        )?;
    }
    let mut out = ExperimentOutput::new(sweep);
    out.notes = notes;
    let steps = 1..=config.zero_steps.len();
    let quarter = config.zero_steps.len() + 1..zetas.len();
    for measure in ["kli", "mi"] {
        let slopes = out
            .sweep
            .column(&format!("{measure}_slope_from_zero"))
            .unwrap();
        let used: Vec<f64> = slopes[steps.clone()].to_vec();
        out.summary.insert(
            format!("{measure}_slope_relative_spread"),
            super::relative_spread(&used),
        );
        let scaled = out
            .sweep
            .column(&format!("{measure}_over_quarter_gap"))
            .unwrap();
        if quarter.len() >= 2 {
            let first = scaled[quarter.start];
            let last = scaled[quarter.end - 1];
            out.summary.insert(
                format!("{measure}_over_quarter_gap_relative_change"),
                (last - first) / first,
            );
        }
    }
    Ok(out)
}
