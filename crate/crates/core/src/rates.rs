//! Asymptotic per-node information rates.
//!
//! With the spectral SNR ratio `s(ω) = 4π²f(ω)/σ²`,
//!
//! ```text
//! KLI = (1/4π²) ∬ [½ log(1 + s) + ½/(1 + s) − ½] dω
//! MI  = (1/4π²) ∬  ½ log(1 + s)                  dω
//! ```
//!
//! For the SFCAR field `s(ω) = SNR / ((2/π)K(4ζ)·(1 − 2ζ cos ω₁ − 2ζ cos ω₂))`.
//! Two evaluation routes exist: the periodic midpoint rule on the square,
//! and a one-dimensional integral against the density of states of the
//! square lattice, which stays accurate as `ζ → 1/4`.

use core::f64::consts::PI;

use crate::car::{sin_half_sq, CarCoefficients, EdgeDependence, NoiseModel};
use crate::error::{Error, Result};
use crate::physmap::{zeta_from_spacing, PhysicalField};
use crate::specfun::{agm, integrate_2d_periodic_multi, tanh_sinh_unit, QuadratureSpec};

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// Below this `1 − 4ζ` the midpoint grid cannot resolve the spectral peak
/// at the origin and the density-of-states route is used.
pub const GRID_GAP_LIMIT: f64 = 1e-4;

/// Spectral ratio above which the integrands are evaluated from `log s`.
const LARGE_SPECTRAL_RATIO: f64 = 1e15;

/// Above this `ζ` the midpoint grid starts at no fewer than 1024 points.
const NEAR_CRITICAL_ZETA: f64 = 0.2499;
const NEAR_CRITICAL_MIN_POINTS: usize = 1024;

/// Relative tolerance floor for the density-of-states route.
const DOS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RateMethod {
    /// Closed-form limit, no quadrature.
    Exact,
    /// Doubling midpoint rule on `(−π, π]²`.
    Midpoint2d,
    /// Tanh-sinh rule against the lattice density of states.
    DensityOfStates,
}

/// Per-node rates in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateResult {
    pub kli_rate: f64,
    pub mi_rate: f64,
    /// Grid side for [`RateMethod::Midpoint2d`], node count otherwise.
    pub quadrature_points: usize,
    pub converged: bool,
    pub method: RateMethod,
}

impl RateResult {
    fn exact(kli_rate: f64, mi_rate: f64) -> Self {
        Self {
            kli_rate,
            mi_rate,
            quadrature_points: 0,
            converged: true,
            method: RateMethod::Exact,
        }
    }
}

/// `½ log(1 + s) + ½/(1 + s) − ½ = D(N(0,1) ‖ N(0,1+s))`.
pub fn kli_integrand(s: f64) -> f64 {
    if s < 1e-3 {
        // Σ_{k≥2} (−1)ᵏ (k−1)/k · sᵏ, halved
        let mut term = s * s;
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 2..12 {
            let kf = k as f64;
            sum += sign * (kf - 1.0) / kf * term;
            term *= s;
            sign = -sign;
        }
        0.5 * sum
    } else {
        0.5 * (libm::log1p(s) - s / (1.0 + s))
    }
}

/// `½ log(1 + s)`.
pub fn mi_integrand(s: f64) -> f64 {
    0.5 * libm::log1p(s)
}

/// Rates of a general CAR field observed in `noise`.
pub fn kli_rate_car(
    coeffs: &CarCoefficients,
    noise: &NoiseModel,
    spec: &QuadratureSpec,
) -> Result<RateResult> {
    let sigma2 = noise.sigma2();
    let mut bad_symbol = None;
    let out = integrate_2d_periodic_multi(
        |w| w,
        |&w1, &w2| {
            let symbol = coeffs.symbol(w1, w2);
            if symbol <= 0.0 {
                bad_symbol.get_or_insert((w1, w2));
                return [0.0, 0.0];
            }
            let s = 1.0 / (sigma2 * symbol);
            [kli_integrand(s), mi_integrand(s)]
        },
        spec,
    )?;
    if bad_symbol.is_some() {
        return Err(Error::InvalidModel("spectral denominator is not positive"));
    }
    Ok(RateResult {
        kli_rate: out.values[0] / FOUR_PI_SQ,
        mi_rate: out.values[1] / FOUR_PI_SQ,
        quadrature_points: out.points_per_axis,
        converged: out.converged,
        method: RateMethod::Midpoint2d,
    })
}

/// SFCAR rates for `0 ≤ zeta ≤ 1/4` and `snr > 0`. At `zeta = 1/4` the
/// exact limit `(0, 0)` is returned.
pub fn sfcar_rates(zeta: f64, snr: f64, spec: &QuadratureSpec) -> Result<RateResult> {
    check_snr(snr)?;
    if zeta == 0.25 {
        return Ok(RateResult::exact(0.0, 0.0));
    }
    sfcar_rates_for(EdgeDependence::new(zeta)?, snr, spec)
}

/// SFCAR rates for an edge dependence given with full precision.
///
/// Uses the midpoint grid unless `1 − 4ζ` is below [`GRID_GAP_LIMIT`].
pub fn sfcar_rates_for(
    dependence: EdgeDependence,
    snr: f64,
    spec: &QuadratureSpec,
) -> Result<RateResult> {
    check_snr(snr)?;
    if dependence.log_gap() == 0.0 {
        return Ok(RateResult::exact(kli_integrand(snr), mi_integrand(snr)));
    }
    if dependence.gap() < GRID_GAP_LIMIT {
        return sfcar_rates_density_of_states(dependence, snr, spec.relative_tolerance());
    }
    let spec = if dependence.zeta() > NEAR_CRITICAL_ZETA {
        spec.with_min_points(NEAR_CRITICAL_MIN_POINTS)
    } else {
        *spec
    };
    sfcar_rates_midpoint(dependence, snr, &spec)
}

/// SFCAR rates on the doubling midpoint grid, whatever the edge dependence.
pub fn sfcar_rates_midpoint(
    dependence: EdgeDependence,
    snr: f64,
    spec: &QuadratureSpec,
) -> Result<RateResult> {
    check_snr(snr)?;
    let gap = dependence.gap();
    let scale = snr / dependence.lattice_gain();
    let out = integrate_2d_periodic_multi(
        sin_half_sq,
        |&a1, &a2| {
            let s = scale / EdgeDependence::spectral_denominator(gap, a1, a2);
            [kli_integrand(s), mi_integrand(s)]
        },
        spec,
    )?;
    Ok(RateResult {
        kli_rate: out.values[0] / FOUR_PI_SQ,
        mi_rate: out.values[1] / FOUR_PI_SQ,
        quadrature_points: out.points_per_axis,
        converged: out.converged,
        method: RateMethod::Midpoint2d,
    })
}

/// SFCAR rates as a one-dimensional integral.
///
/// The integrand depends on `ω` only through `u = 1 − (cos ω₁ + cos ω₂)/2`,
/// whose density on `[0, 2]` is `(2/π²)·K(√(u(2 − u)))`. Folding `u ↦ 2 − u`
/// gives an integral over `[0, 1]` with logarithmic endpoint singularities,
/// which the tanh-sinh rule integrates to near machine precision.
pub fn sfcar_rates_density_of_states(
    dependence: EdgeDependence,
    snr: f64,
    rtol: f64,
) -> Result<RateResult> {
    check_snr(snr)?;
    let gap = dependence.gap();
    let scale = snr / dependence.lattice_gain();
    let log_scale = libm::log(scale);
    // both integrands at s = scale/denominator, through log s once s is
    // large enough that it may overflow
    let integrands = |denominator: f64| {
        if scale > LARGE_SPECTRAL_RATIO * denominator {
            let log_s = log_scale - libm::log(denominator);
            let inv_s = libm::exp(-log_s);
            [0.5 * log_s - 0.5 + inv_s, 0.5 * log_s + 0.5 * inv_s]
        } else {
            let s = scale / denominator;
            [kli_integrand(s), mi_integrand(s)]
        }
    };
    let out = tanh_sinh_unit(
        |u, v| {
            // v = 1 − u; density 1/(π·AGM(1, |1 − u|))
            let density = 1.0 / (PI * agm(1.0, v));
            let near = integrands(u + gap * v);
            let far = integrands(1.0 + v - gap * v);
            [density * (near[0] + far[0]), density * (near[1] + far[1])]
        },
        rtol.min(DOS_TOLERANCE),
    )?;
    Ok(RateResult {
        kli_rate: out.values[0],
        mi_rate: out.values[1],
        quadrature_points: out.nodes,
        converged: out.converged,
        method: RateMethod::DensityOfStates,
    })
}

/// Rates for the edge dependence induced by a physical sensor spacing.
pub fn sfcar_rates_at_spacing(
    field: &PhysicalField,
    snr: f64,
    spec: &QuadratureSpec,
) -> Result<RateResult> {
    sfcar_rates_for(zeta_from_spacing(field)?, snr, spec)
}

fn check_snr(snr: f64) -> Result<()> {
    if snr > 0.0 && snr.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("snr", snr, "must be positive"))
    }
}
