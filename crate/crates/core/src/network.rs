//! Energy and information accounting for an `n × n` sensor grid.
//!
//! Every sensor spends `E_s` on sensing and routes its measurement to the
//! fusion centre at `(⌊n/2⌋, ⌊n/2⌋)` over minimum-hop paths, paying
//! `E₀·dᵛ` per hop. Sensing SNR is `β·E_s`.

use crate::car::NoiseModel;
use crate::error::{Error, Result};
use crate::physmap::{zeta_from_spacing, PhysicalField};
use crate::rates::sfcar_rates_for;
use crate::specfun::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkConfig {
    pub n: usize,
    /// Sensor spacing `d` in meters.
    pub spacing: f64,
    /// `E_s`, Joules per node.
    pub sensing_energy: f64,
    /// `E₀`, Joules per hop at unit spacing.
    pub comm_energy_coeff: f64,
    /// Propagation loss exponent `ν ≥ 2`.
    pub loss_exponent: f64,
    /// `β`, SNR per Joule of sensing energy.
    pub snr_per_joule: f64,
    /// Field diffusion rate `α`.
    pub alpha: f64,
    pub noise_sigma2: f64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(
                "n",
                self.n as f64,
                "grid side must be at least 2",
            ));
        }
        positive("spacing", self.spacing)?;
        if !(self.sensing_energy >= 0.0 && self.sensing_energy.is_finite()) {
            return Err(Error::invalid(
                "sensing_energy",
                self.sensing_energy,
                "must be nonnegative",
            ));
        }
        if !(self.comm_energy_coeff >= 0.0 && self.comm_energy_coeff.is_finite()) {
            return Err(Error::invalid(
                "comm_energy_coeff",
                self.comm_energy_coeff,
                "must be nonnegative",
            ));
        }
        if !(self.loss_exponent >= 2.0 && self.loss_exponent.is_finite()) {
            return Err(Error::invalid(
                "loss_exponent",
                self.loss_exponent,
                "must be at least 2",
            ));
        }
        positive("snr_per_joule", self.snr_per_joule)?;
        positive("alpha", self.alpha)?;
        positive("noise_sigma2", self.noise_sigma2)?;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    /// Side length `(n − 1)·d` of the covered square.
    pub fn side(&self) -> f64 {
        (self.n - 1) as f64 * self.spacing
    }

    pub fn area(&self) -> f64 {
        let side = self.side();
        side * side
    }

    pub fn snr(&self) -> f64 {
        self.snr_per_joule * self.sensing_energy
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, value, "must be positive"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkReport {
    pub node_count: usize,
    /// `μ = n²/((n − 1)d)²`, nodes per square meter.
    pub density: f64,
    pub area: f64,
    pub snr: f64,
    pub zeta: f64,
    pub per_node_kli: f64,
    pub per_node_mi: f64,
    pub total_kli: f64,
    pub total_mi: f64,
    pub sensing_energy_total: f64,
    pub communication_energy_total: f64,
    pub total_energy: f64,
    pub efficiency_kli: f64,
    pub efficiency_mi: f64,
    pub converged: bool,
}

/// Node density `n²/((n − 1)d)²`.
pub fn density(config: &NetworkConfig) -> f64 {
    let n = config.n as f64;
    n * n / config.area()
}

/// `Σᵢ Σⱼ (|i − c| + |j − c|)` over the grid with `c = ⌊n/2⌋`.
pub fn hop_count_total(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let c = n / 2;
    let right = n - 1 - c;
    let per_axis = c * (c + 1) / 2 + right * (right + 1) / 2;
    2 * n * per_axis
}

/// `E₀·dᵛ·hop_count_total(n)`.
pub fn communication_energy(config: &NetworkConfig) -> f64 {
    config.comm_energy_coeff
        * libm::pow(config.spacing, config.loss_exponent)
        * hop_count_total(config.n as u64) as f64
}

/// `n²·E_s`.
pub fn sensing_energy(config: &NetworkConfig) -> f64 {
    config.node_count() as f64 * config.sensing_energy
}

pub fn total_energy(config: &NetworkConfig) -> f64 {
    sensing_energy(config) + communication_energy(config)
}

/// Rates, totals and efficiencies for one network.
pub fn evaluate_network(config: &NetworkConfig, spec: &QuadratureSpec) -> Result<NetworkReport> {
    config.validate()?;
    if config.sensing_energy == 0.0 {
        return Err(Error::ZeroSnrNetwork);
    }
    let snr = config.snr();
    let dependence = zeta_from_spacing(&PhysicalField::new(config.alpha, config.spacing)?)?;
    NoiseModel::new(config.noise_sigma2)?;
    let rates = sfcar_rates_for(dependence, snr, spec)?;
    let nodes = config.node_count() as f64;
    let total_kli = nodes * rates.kli_rate;
    let total_mi = nodes * rates.mi_rate;
    let sensing = sensing_energy(config);
    let communication = communication_energy(config);
    let energy = sensing + communication;
    Ok(NetworkReport {
        node_count: config.node_count(),
        density: density(config),
        area: config.area(),
        snr,
        zeta: dependence.zeta(),
        per_node_kli: rates.kli_rate,
        per_node_mi: rates.mi_rate,
        total_kli,
        total_mi,
        sensing_energy_total: sensing,
        communication_energy_total: communication,
        total_energy: energy,
        efficiency_kli: total_kli / energy,
        efficiency_mi: total_mi / energy,
        converged: rates.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, spacing: f64) -> NetworkConfig {
        NetworkConfig {
            n,
            spacing,
            sensing_energy: 1.0,
            comm_energy_coeff: 1.0,
            loss_exponent: 2.0,
            snr_per_joule: 1.0,
            alpha: 1.0,
            noise_sigma2: 1.0,
        }
    }

    fn brute_hops(n: u64) -> u64 {
        let c = (n / 2) as i64;
        let mut total = 0;
        for i in 0..n as i64 {
            for j in 0..n as i64 {
                total += ((i - c).abs() + (j - c).abs()) as u64;
            }
        }
        total
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&config(3, 0.5)), 9.0);
        assert_eq!(density(&config(2, 1.0)), 4.0);
        assert!((density(&config(100_000, 1.0)) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn hop_counts() {
        assert_eq!(hop_count_total(3), 12);
        assert_eq!(hop_count_total(5), 60);
        assert_eq!(hop_count_total(2), 4);
        assert_eq!(hop_count_total(1), 0);
        for n in 1..=300 {
            assert_eq!(hop_count_total(n), brute_hops(n), "n={n}");
        }
    }

    #[test]
    fn energy_examples() {
        assert_eq!(total_energy(&config(3, 1.0)), 21.0);
        let c = NetworkConfig {
            sensing_energy: 0.0,
            comm_energy_coeff: 2.0,
            ..config(3, 0.5)
        };
        assert_eq!(total_energy(&c), 6.0);
        let ratio = |n: usize| communication_energy(&config(n, 1.0)) / (n as f64).powi(3);
        assert!((ratio(101) / ratio(201) - 1.0).abs() < 0.2);
        for n in [128, 256, 512] {
            assert!((ratio(n) / ratio(2 * n) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn energy_is_increasing() {
        let base = config(10, 1.5);
        let e = total_energy(&base);
        assert!(
            total_energy(&NetworkConfig {
                sensing_energy: 1.1,
                ..base
            }) > e
        );
        assert!(
            total_energy(&NetworkConfig {
                comm_energy_coeff: 1.1,
                ..base
            }) > e
        );
        assert!(
            total_energy(&NetworkConfig {
                spacing: 1.6,
                ..base
            }) > e
        );
        assert!(total_energy(&NetworkConfig { n: 11, ..base }) > e);
    }

    #[test]
    fn sparse_network_is_iid() {
        let c = config(32, 50.0);
        let r = evaluate_network(&c, &QuadratureSpec::default()).unwrap();
        assert!((r.per_node_mi - 0.5 * core::f64::consts::LN_2).abs() < 1e-6);
        assert_eq!(r.total_kli, 1024.0 * r.per_node_kli);
        assert_eq!(r.total_mi, 1024.0 * r.per_node_mi);
    }

    #[test]
    fn efficiency_uses_exact_hop_sum() {
        let c = NetworkConfig {
            snr_per_joule: 10.0,
            ..config(64, 1.0)
        };
        let r = evaluate_network(&c, &QuadratureSpec::default()).unwrap();
        let energy = 4096.0 + brute_hops(64) as f64;
        assert_eq!(r.total_energy, energy);
        assert_eq!(r.efficiency_mi, r.total_mi / energy);
    }

    #[test]
    fn comm_free_rescaling() {
        let base = NetworkConfig {
            comm_energy_coeff: 0.0,
            snr_per_joule: 4.0,
            ..config(8, 1.0)
        };
        let scaled = NetworkConfig {
            sensing_energy: 4.0,
            snr_per_joule: 1.0,
            ..base
        };
        let spec = QuadratureSpec::default();
        let a = evaluate_network(&base, &spec).unwrap();
        let b = evaluate_network(&scaled, &spec).unwrap();
        assert_eq!(b.efficiency_kli, a.efficiency_kli / 4.0);
    }

    #[test]
    fn rejects_invalid() {
        let spec = QuadratureSpec::default();
        let zero = NetworkConfig {
            sensing_energy: 0.0,
            ..config(4, 1.0)
        };
        assert!(matches!(
            evaluate_network(&zero, &spec),
            Err(Error::ZeroSnrNetwork)
        ));
        let low_nu = NetworkConfig {
            loss_exponent: 1.5,
            ..config(4, 1.0)
        };
        assert!(evaluate_network(&low_nu, &spec).is_err());
        assert!(evaluate_network(&config(1, 1.0), &spec).is_err());
    }
}
