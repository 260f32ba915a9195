//! Physical correlation model.
//!
//! A Whittle field (the continuous-space counterpart of the SFCAR model)
//! sampled at spacing `d` has lag-one correlation
//!
//! ```text
//! ρ = α d · K₁(α d)
//! ```
//!
//! and an SFCAR field with edge dependence `ζ` has lag-one correlation
//!
//! ```text
//! ρ = ((2/π)K(4ζ) − 1) / (4ζ · (2/π)K(4ζ))
//! ```
//!
//! Inverting the second relation maps a spacing to an edge dependence.

use crate::car::EdgeDependence;
use crate::error::{Error, Result};
use crate::specfun::{bessel_k1, one_minus_x_k1};

/// Below this `ζ` the correlation uses the series `ρ = ζ + 5ζ³`.
const SERIES_ZETA: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalField {
    alpha: f64,
    spacing: f64,
}

impl PhysicalField {
    /// `alpha` is the diffusion rate (inverse length), `spacing` the sensor
    /// spacing; both must be positive.
    pub fn new(alpha: f64, spacing: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", alpha, "must be positive"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("spacing", spacing, "must be positive"));
        }
        Ok(Self { alpha, spacing })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn scaled_distance(&self) -> f64 {
        self.alpha * self.spacing
    }
}

/// `ρ = αd·K₁(αd)`. Underflows to zero for `αd` beyond about 700.
pub fn edge_correlation(field: &PhysicalField) -> f64 {
    let x = field.scaled_distance();
    bessel_k1(x).map(|k| x * k).unwrap_or(0.0)
}

/// `1 − ρ`, accurate for closely spaced sensors.
pub fn edge_decorrelation(field: &PhysicalField) -> f64 {
    one_minus_x_k1(field.scaled_distance()).unwrap_or(1.0)
}

/// Lag-one correlation of an SFCAR field with edge dependence `zeta`.
pub fn rho_from_zeta(zeta: f64) -> Result<f64> {
    Ok(correlation(EdgeDependence::new(zeta)?).rho)
}

/// Lag-one correlation of an SFCAR field.
pub fn rho_from_dependence(dependence: EdgeDependence) -> f64 {
    correlation(dependence).rho
}

/// `1 − ρ` for an SFCAR field, accurate as `ζ → 1/4`.
pub fn decorrelation_from_dependence(dependence: EdgeDependence) -> f64 {
    correlation(dependence).one_minus_rho
}

#[derive(Debug, Clone, Copy)]
struct Correlation {
    rho: f64,
    one_minus_rho: f64,
}

fn correlation(dependence: EdgeDependence) -> Correlation {
    let zeta = dependence.zeta();
    if zeta < SERIES_ZETA {
        // removable singularity at ζ = 0
        let rho = zeta + 5.0 * zeta * zeta * zeta;
        return Correlation {
            rho,
            one_minus_rho: 1.0 - rho,
        };
    }
    let gain = dependence.lattice_gain();
    let excess = dependence.lattice_gain_excess();
    let four_zeta = 4.0 * zeta;
    let rho = excess / (four_zeta * gain);
    // 1 − ρ = (1 − (1 − 4ζ)·gain) / (4ζ·gain)
    let one_minus_rho = if rho > 0.5 {
        (1.0 - dependence.gap() * gain) / (four_zeta * gain)
    } else {
        1.0 - rho
    };
    Correlation { rho, one_minus_rho }
}

/// Inverse of [`rho_from_zeta`]: the edge dependence whose lag-one
/// correlation is `rho`, for `0 ≤ rho < 1`.
///
/// The result keeps full precision near `ζ = 1/4`, so correlations that
/// would need `ζ` closer to 1/4 than an `f64` can express still round-trip.
pub fn zeta_from_rho(rho: f64) -> Result<EdgeDependence> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid("rho", rho, "must lie in [0, 1)"));
    }
    if rho == 0.0 {
        return Ok(EdgeDependence::ZERO);
    }
    if rho < SERIES_ZETA {
        // invert ρ = ζ + 5ζ³
        return EdgeDependence::new(rho - 5.0 * rho * rho * rho);
    }
    solve(Target::Rho(rho))
}

/// Edge dependence from `1 − ρ` given directly, for `0 < decorrelation ≤ 1`.
pub fn zeta_from_decorrelation(decorrelation: f64) -> Result<EdgeDependence> {
    if !(decorrelation > 0.0 && decorrelation <= 1.0) {
        return Err(Error::invalid(
            "decorrelation",
            decorrelation,
            "must lie in (0, 1]",
        ));
    }
    if decorrelation > 0.5 {
        return zeta_from_rho(1.0 - decorrelation);
    }
    solve(Target::Decorrelation(decorrelation))
}

/// `ζ = g(ρ(d))` for a physical field.
pub fn zeta_from_spacing(field: &PhysicalField) -> Result<EdgeDependence> {
    let delta = edge_decorrelation(field);
    if delta < 0.5 {
        zeta_from_decorrelation(delta)
    } else {
        zeta_from_rho(edge_correlation(field))
    }
}

/// Checks that `ζ ↦ ρ` is strictly increasing on `points` equally spaced
/// values in `[0, 1/4)`. The bisection in [`zeta_from_rho`] relies on it.
pub fn check_correlation_map_monotone(points: usize) -> Result<()> {
    let mut previous = -1.0;
    for i in 0..points {
        let zeta = 0.25 * i as f64 / points as f64;
        let rho = rho_from_zeta(zeta)?;
        if rho <= previous {
            return Err(Error::RootNotFound("rho(zeta) is not strictly increasing"));
        }
        previous = rho;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Rho(f64),
    Decorrelation(f64),
}

/// Bisection on `t = −ln(1 − 4ζ) ∈ (0, ∞)`, along which `ρ` increases.
fn solve(target: Target) -> Result<EdgeDependence> {
    // residual > 0 means t is too large
    let residual = |t: f64| -> f64 {
        let c = correlation(dependence_at(t));
        match target {
            Target::Rho(r) => c.rho - r,
            Target::Decorrelation(d) => d - c.one_minus_rho,
        }
    };
    let mut lo = 0.0_f64;
    let mut hi = match target {
        Target::Rho(r) if r < 0.5 => 8.0 * r + 1.0,
        Target::Rho(r) => core::f64::consts::PI / (1.0 - r) + 10.0,
        Target::Decorrelation(d) => core::f64::consts::PI / d + 10.0,
    };
    let mut grow = 0;
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 64 || !hi.is_finite() {
            return Err(Error::RootNotFound("could not bracket the edge dependence"));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = if libm::fabs(residual(lo)) <= libm::fabs(residual(hi)) {
        lo
    } else {
        hi
    };
    if libm::fabs(residual(t)) > RESIDUAL_TOL {
        return Err(Error::RootNotFound("residual tolerance not reached"));
    }
    Ok(dependence_at(t))
}

fn dependence_at(t: f64) -> EdgeDependence {
    EdgeDependence::from_log_gap(-t).unwrap_or(EdgeDependence::ZERO)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(alpha: f64, d: f64) -> PhysicalField {
        PhysicalField::new(alpha, d).unwrap()
    }

    #[test]
    fn correlation_at_unit_distance() {
        assert!((edge_correlation(&field(1.0, 1.0)) - 0.601_907_230_197_234_6).abs() < 1e-15);
    }

    #[test]
    fn correlation_is_flat_at_zero_spacing() {
        let rho = edge_correlation(&field(1.0, 1e-8));
        assert!(rho < 1.0 && 1.0 - rho < 1e-6);
    }

    #[test]
    fn correlation_tail_matches_asymptote() {
        let x: f64 = 20.0;
        let asym = libm::sqrt(core::f64::consts::PI * x / 2.0) * libm::exp(-x);
        assert!((edge_correlation(&field(2.0, 10.0)) / asym - 1.0).abs() < 0.05);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_from_zeta(0.0).unwrap(), 0.0);
        let strong = rho_from_zeta(0.2499).unwrap();
        assert!((strong - 0.683_109_443_727_124_8).abs() < 1e-12, "{strong}");
        assert!(rho_from_zeta(0.249_99).unwrap() > strong);
        let r = rho_from_zeta(0.1).unwrap();
        assert!((r - 0.105_493_208_429_524_4).abs() < 1e-13, "{r}");
        assert!(rho_from_zeta(0.25).is_err());
    }

    #[test]
    fn small_zeta_linearization() {
        for &z in &[1e-4, 1e-5] {
            let ratio = rho_from_zeta(z).unwrap() / z;
            assert!((ratio - 1.0).abs() < 10.0 * z * z + 1e-9, "{z}: {ratio}");
        }
        // the closed form just above the threshold agrees with the series
        let z = SERIES_ZETA * (1.0 + 1e-9);
        let closed = rho_from_zeta(z).unwrap();
        assert!((closed - (z + 5.0 * z * z * z)).abs() < 1e-13 * z);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(zeta_from_rho(0.0).unwrap().zeta(), 0.0);
        let z = zeta_from_rho(0.105_493_208_429_524_4).unwrap().zeta();
        assert!((z - 0.1).abs() < 1e-9);
        let z = zeta_from_rho(0.9999).unwrap();
        assert!((z.zeta() - 0.25).abs() < 1e-3);
        assert!(zeta_from_rho(1.0).is_err());
        assert!(zeta_from_rho(-0.1).is_err());
    }

    #[test]
    fn round_trip_up_to_strong_correlation() {
        for i in 0..100 {
            let rho = 0.999 * i as f64 / 99.0;
            let back = rho_from_dependence(zeta_from_rho(rho).unwrap());
            assert!((back - rho).abs() < 1e-10, "{rho} -> {back}");
        }
    }

    #[test]
    fn decorrelation_path_reaches_underflowed_gaps() {
        let d = zeta_from_decorrelation(1e-6).unwrap();
        assert_eq!(d.gap(), 0.0);
        let back = decorrelation_from_dependence(d);
        assert!((back / 1e-6 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spacing_examples() {
        assert!(zeta_from_spacing(&field(1.0, 50.0)).unwrap().zeta() < 1e-9);
        assert!((zeta_from_spacing(&field(1.0, 1e-8)).unwrap().zeta() - 0.25).abs() < 1e-3);
        let a = zeta_from_spacing(&field(1.0, 1.0)).unwrap().zeta();
        let b = zeta_from_rho(0.601_907_230_197_234_6).unwrap().zeta();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_spacing() {
        let mut prev_rho = 2.0;
        let mut prev_zeta = 1.0;
        for i in 0..120 {
            let d = libm::pow(10.0, -6.0 + (6.0 + libm::log10(50.0)) * i as f64 / 119.0);
            let f = field(1.0, d);
            let rho = edge_correlation(&f);
            let zeta = zeta_from_spacing(&f).unwrap();
            assert!(rho < prev_rho);
            // compare through the gap so the ordering survives ζ → 1/4
            let key = -zeta.log_gap();
            assert!(key < prev_zeta || i == 0);
            prev_rho = rho;
            prev_zeta = key;
        }
    }

    #[test]
    fn scale_invariance() {
        for &c in &[2.0, 4.0, 0.5] {
            assert_eq!(
                edge_correlation(&field(1.3, 0.7)),
                edge_correlation(&field(1.3 * c, 0.7 / c))
            );
        }
        let a = edge_correlation(&field(1.3, 0.7));
        let b = edge_correlation(&field(3.9, 0.7 / 3.0));
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn map_is_monotone() {
        check_correlation_map_monotone(1000).unwrap();
    }
}
