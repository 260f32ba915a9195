//! Network scaling sweeps: area, spacing, density and energy.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    check_increasing, classify_trend, fit_affine_origin, fit_exponential_with_sqrt_prefactor,
    fit_logarithmic, fit_power_law, relative_spread, ExperimentOutput, FitWindow, SweepResult,
};
use crate::error::{Error, Result};
use crate::network::{
    communication_energy, density, evaluate_network, hop_count_total, total_energy, NetworkConfig,
};
use crate::physmap::{rho_from_dependence, zeta_from_spacing, PhysicalField};
use crate::rates::{kli_integrand, mi_integrand, sfcar_rates_for, RateResult};
use crate::specfun::QuadratureSpec;

/// Quadrature tolerance for the spacing sweep, where the quantity of
/// interest is a small difference of two rates.
pub const SPACING_TOLERANCE: f64 = 1e-11;

/// Minimum span of total energy, in decades, for the energy sweeps.
pub const MIN_ENERGY_DECADES: f64 = 2.0;

fn sides_as_f64(n_values: &[usize]) -> Vec<f64> {
    n_values.iter().map(|&n| n as f64).collect()
}

fn rates_at(
    alpha: f64,
    spacing: f64,
    snr: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, RateResult)> {
    let dependence = zeta_from_spacing(&PhysicalField::new(alpha, spacing)?)?;
    Ok((dependence.zeta(), sfcar_rates_for(dependence, snr, spec)?))
}

fn unconverged_note(out: &mut ExperimentOutput, parameter: f64) {
    out.notes.push(format!(
        "quadrature did not converge at parameter {parameter}"
    ));
}

/// Sweeps the grid side `n` at fixed spacing.
///
/// Fits efficiency against area as a power law over `window` and total
/// information against area through the origin over all rows.
pub fn exp_area_scaling(
    base: &NetworkConfig,
    n_values: &[usize],
    window: FitWindow,
    spec: &QuadratureSpec,
) -> Result<ExperimentOutput> {
    check_increasing("n", &sides_as_f64(n_values))?;
    let mut sweep = SweepResult::new(
        "area",
        &[
            "n",
            "density",
            "per_node_kli",
            "per_node_mi",
            "total_kli",
            "total_mi",
            "total_energy",
            "efficiency_kli",
            "efficiency_mi",
            "kli_per_area",
            "mi_per_area",
        ],
    );
    let mut unconverged = Vec::new();
    for &n in n_values {
        let config = NetworkConfig { n, ..*base };
        let r = evaluate_network(&config, spec)?;
        if !r.converged {
            unconverged.push(r.area);
        }
        sweep.push(
            r.area,
            vec![
                n as f64,
                r.density,
                r.per_node_kli,
                r.per_node_mi,
                r.total_kli,
                r.total_mi,
                r.total_energy,
                r.efficiency_kli,
                r.efficiency_mi,
                r.total_kli / r.area,
                r.total_mi / r.area,
            ],
        )?;
    }
    let mut out = ExperimentOutput::new(sweep);
    for area in unconverged {
        unconverged_note(&mut out, area);
    }
    let area = out.sweep.parameters();
    for measure in ["kli", "mi"] {
        let eff = out.sweep.column(&format!("efficiency_{measure}")).unwrap();
        out.fit_column(
            &format!("efficiency_{measure}_vs_area"),
            &area,
            &eff,
            window,
            fit_power_law,
        )?;
        let total = out.sweep.column(&format!("total_{measure}")).unwrap();
        out.fit_column(
            &format!("total_{measure}_vs_area"),
            &area,
            &total,
            FitWindow::All,
            fit_affine_origin,
        )?;
        let per_area = out.sweep.column(&format!("{measure}_per_area")).unwrap();
        out.summary.insert(
            format!("{measure}_per_area_relative_spread"),
            relative_spread(&per_area),
        );
    }
    Ok(out)
}

/// Sweeps the spacing and fits the gap `Δ(d) = 𝒦(ζ = 0) − 𝒦(d)` to
/// `c·√d·e^{−r·d}`.
///
/// Rows with a nonpositive gap are kept in the table but excluded from the
/// fit, with a note.
pub fn exp_spacing_convergence(
    alpha: f64,
    snr: f64,
    d_values: &[f64],
    spec: &QuadratureSpec,
) -> Result<ExperimentOutput> {
    check_increasing("spacing", d_values)?;
    let spec = spec.with_tolerance(spec.relative_tolerance().min(SPACING_TOLERANCE))?;
    let kli0 = kli_integrand(snr);
    let mi0 = mi_integrand(snr);
    let mut sweep = SweepResult::new(
        "spacing",
        &[
            "alpha_d",
            "rho",
            "zeta",
            "per_node_kli",
            "per_node_mi",
            "gap_kli",
            "gap_mi",
        ],
    );
    let mut unconverged = Vec::new();
    for &d in d_values {
        let field = PhysicalField::new(alpha, d)?;
        let dependence = zeta_from_spacing(&field)?;
        let r = sfcar_rates_for(dependence, snr, &spec)?;
        if !r.converged {
            unconverged.push(d);
        }
        sweep.push(
            d,
            vec![
                alpha * d,
                rho_from_dependence(dependence),
                dependence.zeta(),
                r.kli_rate,
                r.mi_rate,
                kli0 - r.kli_rate,
                mi0 - r.mi_rate,
            ],
        )?;
    }
    let mut out = ExperimentOutput::new(sweep);
    for d in unconverged {
        unconverged_note(&mut out, d);
    }
    let d = out.sweep.parameters();
    for measure in ["kli", "mi"] {
        let gap = out.sweep.column(&format!("gap_{measure}")).unwrap();
        let mut points = Vec::new();
        for (&x, &y) in d.iter().zip(&gap) {
            if y > 0.0 {
                points.push((x, y));
            } else {
                out.notes.push(format!(
                    "gap_{measure} at spacing {x} is not positive ({y:e}); excluded from the fit"
                ));
            }
        }
        let fit =
            fit_exponential_with_sqrt_prefactor(&points)?.named(&format!("gap_{measure}_decay"));
        out.summary.insert(
            format!("gap_{measure}_decay_rate_over_alpha"),
            fit.estimate("decay_rate").unwrap() / alpha,
        );
        out.fits.push(fit);
    }
    Ok(out)
}

/// Inputs of the fixed-area density sweep.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityScalingConfig {
    pub area: f64,
    pub alpha: f64,
    pub snr: f64,
    pub n_values: Vec<usize>,
    /// `E_s` per node for the efficiency with sensing energy counted.
    pub sensing_energy: f64,
    pub comm_energy_coeff: f64,
    /// `ν` for the efficiency with sensing energy counted.
    pub loss_exponent: f64,
    /// `ν` values for the efficiency with the sensing term zeroed.
    pub zeroed_loss_exponents: Vec<f64>,
    pub window: FitWindow,
}

impl DensityScalingConfig {
    pub fn new(area: f64, alpha: f64, snr: f64, n_values: Vec<usize>) -> Self {
        Self {
            area,
            alpha,
            snr,
            n_values,
            sensing_energy: 1.0,
            comm_energy_coeff: 1.0,
            loss_exponent: 2.0,
            zeroed_loss_exponents: vec![2.5, 3.0, 3.5],
            window: FitWindow::TopDecade,
        }
    }
}

fn nu_label(nu: f64) -> String {
    format!("{nu}")
}

/// Sweeps density at fixed area, with spacing `√area/(n − 1)`.
pub fn exp_density_scaling(
    config: &DensityScalingConfig,
    spec: &QuadratureSpec,
) -> Result<ExperimentOutput> {
    check_increasing("n", &sides_as_f64(&config.n_values))?;
    if !(config.area > 0.0 && config.area.is_finite()) {
        return Err(Error::invalid("area", config.area, "must be positive"));
    }
    let side = libm::sqrt(config.area);
    let mut columns: Vec<String> = [
        "n",
        "spacing",
        "zeta",
        "per_node_kli",
        "per_node_mi",
        "kli_per_area",
        "mi_per_area",
        "total_energy",
        "efficiency_kli",
        "efficiency_mi",
    ]
    .iter()
    .map(|&c| c.into())
    .collect();
    for &nu in &config.zeroed_loss_exponents {
        columns.push(format!("comm_only_efficiency_kli_nu_{}", nu_label(nu)));
        columns.push(format!("comm_only_efficiency_mi_nu_{}", nu_label(nu)));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut sweep = SweepResult::new("density", &column_refs);
    let mut unconverged = Vec::new();
    for &n in &config.n_values {
        let spacing = side / (n - 1) as f64;
        let net = NetworkConfig {
            n,
            spacing,
            sensing_energy: config.sensing_energy,
            comm_energy_coeff: config.comm_energy_coeff,
            loss_exponent: config.loss_exponent,
            snr_per_joule: config.snr / config.sensing_energy,
            alpha: config.alpha,
            noise_sigma2: 1.0,
        };
        net.validate()?;
        let (zeta, r) = rates_at(config.alpha, spacing, config.snr, spec)?;
        let mu = density(&net);
        if !r.converged {
            unconverged.push(mu);
        }
        let nodes = (n * n) as f64;
        let (total_kli, total_mi) = (nodes * r.kli_rate, nodes * r.mi_rate);
        let energy = total_energy(&net);
        let mut row = vec![
            n as f64,
            spacing,
            zeta,
            r.kli_rate,
            r.mi_rate,
            total_kli / config.area,
            total_mi / config.area,
            energy,
            total_kli / energy,
            total_mi / energy,
        ];
        for &nu in &config.zeroed_loss_exponents {
            let comm = communication_energy(&NetworkConfig {
                loss_exponent: nu,
                ..net
            });
            row.push(total_kli / comm);
            row.push(total_mi / comm);
        }
        sweep.push(mu, row)?;
    }
    let mut out = ExperimentOutput::new(sweep);
    for mu in unconverged {
        unconverged_note(&mut out, mu);
    }
    out.notes.push(String::from(
        "communication energy E0*d^nu is a far-field model and may not hold at small spacing",
    ));
    let mu = out.sweep.parameters();
    let top: Vec<usize> = {
        let pts: Vec<(f64, f64)> = mu.iter().map(|&m| (m, 0.0)).collect();
        let kept = config.window.select(&pts);
        mu.iter()
            .enumerate()
            .filter(|(_, m)| kept.iter().any(|k| k.0 == **m))
            .map(|(i, _)| i)
            .collect()
    };
    for measure in ["kli", "mi"] {
        let per_node = out.sweep.column(&format!("per_node_{measure}")).unwrap();
        out.fit_column(
            &format!("per_node_{measure}_vs_density"),
            &mu,
            &per_node,
            config.window,
            fit_power_law,
        )?;
        let eff = out.sweep.column(&format!("efficiency_{measure}")).unwrap();
        out.fit_column(
            &format!("efficiency_{measure}_vs_density"),
            &mu,
            &eff,
            config.window,
            fit_power_law,
        )?;
        let per_area = out.sweep.column(&format!("{measure}_per_area")).unwrap();
        out.fit_column(
            &format!("{measure}_per_area_vs_density"),
            &mu,
            &per_area,
            config.window,
            fit_power_law,
        )?;
        let windowed: Vec<f64> = top.iter().map(|&i| per_area[i]).collect();
        out.summary.insert(
            format!("{measure}_per_area_relative_spread"),
            relative_spread(&windowed),
        );
        out.summary
            .insert(format!("c5_{measure}"), *per_area.last().unwrap());
        for &nu in &config.zeroed_loss_exponents {
            let name = format!("comm_only_efficiency_{measure}_nu_{}", nu_label(nu));
            let values = out.sweep.column(&name).unwrap();
            let last = values.len() - 1;
            out.summary.insert(
                format!("{name}_last_step_relative_change"),
                (values[last] - values[last - 1]) / values[last - 1],
            );
            out.trends.push((name, classify_trend(&values)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnergyScenario {
    /// Fixed `n` and spacing, sensing energy swept.
    FixedAreaSensingSweep,
    /// Fixed spacing and sensing energy, `n` swept.
    FixedSensingAreaSweep,
}

/// Total information against total energy.
///
/// For [`EnergyScenario::FixedAreaSensingSweep`] the swept values are `E_s`
/// and the fit is logarithmic in total energy; the ratio of total
/// information to `n²·½ log E_s` is tabulated. For
/// [`EnergyScenario::FixedSensingAreaSweep`] the swept values are grid
/// sides and the fit is a power law in total energy.
pub fn exp_energy_scaling(
    base: &NetworkConfig,
    scenario: EnergyScenario,
    sweep_values: &[f64],
    window: FitWindow,
    spec: &QuadratureSpec,
) -> Result<ExperimentOutput> {
    check_increasing("sweep", sweep_values)?;
    let configs: Vec<NetworkConfig> = match scenario {
        EnergyScenario::FixedAreaSensingSweep => sweep_values
            .iter()
            .map(|&es| NetworkConfig {
                sensing_energy: es,
                ..*base
            })
            .collect(),
        EnergyScenario::FixedSensingAreaSweep => sweep_values
            .iter()
            .map(|&n| {
                if libm::trunc(n) != n || n < 2.0 {
                    Err(Error::invalid(
                        "n",
                        n,
                        "grid sides must be integers of at least 2",
                    ))
                } else {
                    Ok(NetworkConfig {
                        n: n as usize,
                        ..*base
                    })
                }
            })
            .collect::<Result<_>>()?,
    };
    let first = total_energy(&configs[0]);
    let last = total_energy(configs.last().unwrap());
    if !(libm::log10(last / first) >= MIN_ENERGY_DECADES) {
        return Err(Error::invalid(
            "sweep",
            libm::log10(last / first),
            "total energy must span at least two decades",
        ));
    }
    let parameter = match scenario {
        EnergyScenario::FixedAreaSensingSweep => "sensing_energy",
        EnergyScenario::FixedSensingAreaSweep => "n",
    };
    let mut sweep = SweepResult::new(
        parameter,
        &[
            "n",
            "sensing_energy",
            "snr",
            "total_energy",
            "comm_energy_over_n3",
            "total_kli",
            "total_mi",
            "kli_over_half_log_es",
            "mi_over_half_log_es",
            "kli_over_half_log_energy",
            "mi_over_half_log_energy",
        ],
    );
    let mut unconverged = Vec::new();
    for (c, &value) in configs.iter().zip(sweep_values) {
        let r = evaluate_network(c, spec)?;
        if !r.converged {
            unconverged.push(value);
        }
        let nodes = r.node_count as f64;
        let half_log_es = 0.5 * libm::log(c.sensing_energy);
        let half_log_e = 0.5 * libm::log(r.total_energy);
        let n3 = libm::pow(c.n as f64, 3.0);
        sweep.push(
            value,
            vec![
                c.n as f64,
                c.sensing_energy,
                r.snr,
                r.total_energy,
                c.comm_energy_coeff
                    * libm::pow(c.spacing, c.loss_exponent)
                    * hop_count_total(c.n as u64) as f64
                    / n3,
                r.total_kli,
                r.total_mi,
                r.total_kli / (nodes * half_log_es),
                r.total_mi / (nodes * half_log_es),
                r.total_kli / (nodes * half_log_e),
                r.total_mi / (nodes * half_log_e),
            ],
        )?;
    }
    let mut out = ExperimentOutput::new(sweep);
    for v in unconverged {
        unconverged_note(&mut out, v);
    }
    let energy = out.sweep.column("total_energy").unwrap();
    for measure in ["kli", "mi"] {
        let total = out.sweep.column(&format!("total_{measure}")).unwrap();
        match scenario {
            EnergyScenario::FixedAreaSensingSweep => {
                out.fit_column(
                    &format!("total_{measure}_vs_energy"),
                    &energy,
                    &total,
                    window,
                    fit_logarithmic,
                )?;
                let ratio = out
                    .sweep
                    .column(&format!("{measure}_over_half_log_es"))
                    .unwrap();
                let pts: Vec<(f64, f64)> = sweep_values.iter().copied().zip(ratio).collect();
                let top: Vec<f64> = window.select(&pts).into_iter().map(|p| p.1).collect();
                out.summary.insert(
                    format!("{measure}_over_half_log_es_relative_spread"),
                    relative_spread(&top),
                );
            }
            EnergyScenario::FixedSensingAreaSweep => {
                out.fit_column(
                    &format!("total_{measure}_vs_energy"),
                    &energy,
                    &total,
                    window,
                    fit_power_law,
                )?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{geometric_sides, log_grid};

    fn base() -> NetworkConfig {
        NetworkConfig {
            n: 32,
            spacing: 2.0,
            sensing_energy: 1.0,
            comm_energy_coeff: 1.0,
            loss_exponent: 2.0,
            snr_per_joule: 10.0,
            alpha: 1.0,
            noise_sigma2: 1.0,
        }
    }

    #[test]
    fn comm_free_area_sweep_has_flat_efficiency() {
        let b = NetworkConfig {
            comm_energy_coeff: 0.0,
            ..base()
        };
        let out = exp_area_scaling(
            &b,
            &[8, 16, 32, 64],
            FitWindow::All,
            &QuadratureSpec::default(),
        )
        .unwrap();
        let p = out
            .fit("efficiency_kli_vs_area")
            .unwrap()
            .estimate("exponent")
            .unwrap();
        // information and energy are both proportional to n²
        assert!(p.abs() < 1e-12, "{p}");
    }

    #[test]
    fn rejects_short_or_unsorted_sweeps() {
        let spec = QuadratureSpec::default();
        assert!(exp_area_scaling(&base(), &[8, 16, 32], FitWindow::All, &spec).is_err());
        assert!(exp_area_scaling(&base(), &[8, 32, 16, 64], FitWindow::All, &spec).is_err());
        let narrow = log_grid(1e2, 1e3, 5);
        assert!(exp_energy_scaling(
            &base(),
            EnergyScenario::FixedAreaSensingSweep,
            &narrow,
            FitWindow::All,
            &spec
        )
        .is_err());
        assert!(exp_energy_scaling(
            &base(),
            EnergyScenario::FixedSensingAreaSweep,
            &[4.0, 8.5, 16.0, 200.0],
            FitWindow::All,
            &spec
        )
        .is_err());
    }

    #[test]
    fn spacing_gaps_are_positive_and_decreasing() {
        let d: Vec<f64> = (0..6).map(|i| 3.0 + i as f64).collect();
        let out = exp_spacing_convergence(1.0, 10.0, &d, &QuadratureSpec::default()).unwrap();
        let gaps = out.sweep.column("gap_kli").unwrap();
        assert!(gaps.iter().all(|&g| g > 0.0));
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert!(out.notes.is_empty());
    }

    #[test]
    fn density_sweep_reports_trends() {
        let cfg = DensityScalingConfig::new(400.0, 1.0, 10.0, geometric_sides(16, 64, 5));
        let out = exp_density_scaling(&cfg, &QuadratureSpec::default()).unwrap();
        assert_eq!(out.trends.len(), 6);
        assert!(out.fit("per_node_kli_vs_density").is_some());
        assert!(out.summary.contains_key("c5_kli"));
    }
}
