//! CAR field models and their spectral densities.
//!
//! A CAR field is described by symmetric precision taps `θᵢⱼ`; its spectral
//! density is
//!
//! ```text
//! f(ω₁, ω₂) = (1/4π²) / Σᵢⱼ θᵢⱼ cos(iω₁ + jω₂)
//! ```
//!
//! The SFCAR specialization has `θ₀₀ = κ` and `−λ` on the four nearest
//! neighbours, with edge dependence `ζ = λ/κ ∈ [0, 1/4)`.

use alloc::collections::BTreeMap;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{agm, lattice_gain_excess};

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// Grid side used to check positivity of the CAR symbol.
pub const VALIDATION_GRID: usize = 256;

/// Precision taps `θᵢⱼ` of a CAR model.
///
/// Both `(i, j)` and `(−i, −j)` are stored. The constructor fills in missing
/// mirror entries and rejects mismatched ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CarCoefficients {
    taps: BTreeMap<(i32, i32), f64>,
}

impl CarCoefficients {
    /// Validated coefficients: symmetric, `θ₀₀ > 0` and a positive symbol on
    /// a [`VALIDATION_GRID`]² grid.
    pub fn new<I>(taps: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((i32, i32), f64)>,
    {
        let coeffs = Self::symmetric(taps)?;
        coeffs.check_positive()?;
        Ok(coeffs)
    }

    /// Symmetric coefficients with `θ₀₀ > 0`, without the positivity scan.
    /// [`car_spectrum`] still rejects points where the symbol is not
    /// positive.
    pub fn symmetric<I>(taps: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((i32, i32), f64)>,
    {
        let mut map = BTreeMap::new();
        for ((i, j), theta) in taps {
            if !theta.is_finite() {
                return Err(Error::InvalidModel("coefficients must be finite"));
            }
            if theta == 0.0 {
                continue;
            }
            if let Some(old) = map.insert((i, j), theta) {
                if old != theta {
                    return Err(Error::InvalidModel(
                        "duplicate offset with different values",
                    ));
                }
            }
        }
        let offsets: alloc::vec::Vec<_> = map.iter().map(|(&k, &v)| (k, v)).collect();
        for ((i, j), theta) in offsets {
            let mirror = (-i, -j);
            match map.get(&mirror) {
                Some(&m) if m != theta => {
                    return Err(Error::InvalidModel("coefficients are not symmetric"))
                }
                Some(_) => {}
                None => {
                    map.insert(mirror, theta);
                }
            }
        }
        match map.get(&(0, 0)) {
            Some(&t) if t > 0.0 => {}
            _ => return Err(Error::InvalidModel("theta_00 must be positive")),
        }
        Ok(Self { taps: map })
    }

    /// The five SFCAR taps for the given parameters.
    pub fn sfcar(params: &SfcarParams) -> Result<Self> {
        let lambda = params.lambda();
        Self::new([
            ((0, 0), params.kappa()),
            ((1, 0), -lambda),
            ((-1, 0), -lambda),
            ((0, 1), -lambda),
            ((0, -1), -lambda),
        ])
    }

    pub fn theta(&self, i: i32, j: i32) -> f64 {
        self.taps.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn theta_00(&self) -> f64 {
        self.theta(0, 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i32, i32), f64)> + '_ {
        self.taps.iter().map(|(&k, &v)| (k, v))
    }

    /// Number of stored nonzero taps (mirrors counted separately).
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `Σ θᵢⱼ cos(iω₁ + jω₂)`, the denominator of `4π²·f`.
    pub fn symbol(&self, w1: f64, w2: f64) -> f64 {
        self.taps
            .iter()
            .map(|(&(i, j), &theta)| {
                if i == 0 && j == 0 {
                    theta
                } else {
                    theta * libm::cos(i as f64 * w1 + j as f64 * w2)
                }
            })
            .sum()
    }

    /// Scans the symbol on the validation grid (which contains `0` and `π`
    /// on both axes).
    pub fn check_positive(&self) -> Result<()> {
        let n = VALIDATION_GRID;
        for k in 0..n {
            let w1 = -PI + 2.0 * PI * k as f64 / n as f64;
            for l in 0..n {
                let w2 = -PI + 2.0 * PI * l as f64 / n as f64;
                if self.symbol(w1, w2) <= 0.0 {
                    return Err(Error::InvalidModel(
                        "spectral denominator is not positive on the validation grid",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Spectral density of a CAR field.
pub fn car_spectrum(coeffs: &CarCoefficients, w1: f64, w2: f64) -> Result<f64> {
    let denom = coeffs.symbol(w1, w2);
    if denom > 0.0 {
        Ok(1.0 / (FOUR_PI_SQ * denom))
    } else {
        Err(Error::InvalidModel("spectral denominator is not positive"))
    }
}

/// Edge dependence factor `ζ ∈ [0, 1/4)`.
///
/// Stored as `ln(1 − 4ζ)` so fields arbitrarily close to perfect correlation
/// (where `1 − 4ζ` underflows) keep their exact spectral shape.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeDependence {
    log_gap: f64,
}

/// Below this `ln(1 − 4ζ)` the logarithmic form of `K` is exact in double
/// precision.
const LOG_GAP_ASYMPTOTIC: f64 = -60.0;
const LN_8: f64 = 2.079_441_541_679_835_8;

impl EdgeDependence {
    pub const ZERO: Self = Self { log_gap: 0.0 };

    pub fn new(zeta: f64) -> Result<Self> {
        if !(0.0..0.25).contains(&zeta) {
            return Err(Error::invalid("zeta", zeta, "must lie in [0, 1/4)"));
        }
        Ok(Self {
            log_gap: libm::log1p(-4.0 * zeta),
        })
    }

    /// From `ln(1 − 4ζ)`, which must be finite and nonpositive.
    pub fn from_log_gap(log_gap: f64) -> Result<Self> {
        if !(log_gap <= 0.0 && log_gap.is_finite()) {
            return Err(Error::invalid(
                "log_gap",
                log_gap,
                "must be finite and nonpositive",
            ));
        }
        Ok(Self { log_gap })
    }

    pub fn zeta(&self) -> f64 {
        -0.25 * libm::expm1(self.log_gap)
    }

    /// `1 − 4ζ`; may underflow to zero.
    pub fn gap(&self) -> f64 {
        libm::exp(self.log_gap)
    }

    pub fn log_gap(&self) -> f64 {
        self.log_gap
    }

    /// `(2/π)·K(4ζ)`, the SFCAR variance at unit `κ`.
    pub fn lattice_gain(&self) -> f64 {
        if self.log_gap > -0.5 {
            1.0 + self.lattice_gain_excess()
        } else if self.log_gap > LOG_GAP_ASYMPTOTIC {
            let gap = self.gap();
            1.0 / agm(1.0, libm::sqrt(gap * (2.0 - gap)))
        } else {
            (LN_8 - self.log_gap) / PI
        }
    }

    /// `(2/π)·K(4ζ) − 1`, accurate for small `ζ`.
    pub fn lattice_gain_excess(&self) -> f64 {
        if self.log_gap > -0.5 {
            lattice_gain_excess(4.0 * self.zeta()).unwrap_or(f64::INFINITY)
        } else {
            self.lattice_gain() - 1.0
        }
    }

    /// `1 − 2ζ(cos ω₁ + cos ω₂)` written in terms of `aᵢ = sin²(ωᵢ/2)`:
    /// `a₁ + a₂ + (1 − 4ζ)(1 − a₁ − a₂)`.
    #[inline]
    pub(crate) fn spectral_denominator(gap: f64, a1: f64, a2: f64) -> f64 {
        let u = a1 + a2;
        u + gap * (1.0 - u)
    }
}

impl TryFrom<f64> for EdgeDependence {
    type Error = Error;

    fn try_from(zeta: f64) -> Result<Self> {
        Self::new(zeta)
    }
}

/// Measurement noise `W ~ N(0, σ²)`, i.i.d. over the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if sigma2 > 0.0 && sigma2.is_finite() {
            Ok(Self { sigma2 })
        } else {
            Err(Error::invalid("sigma2", sigma2, "must be positive"))
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { sigma2: 1.0 }
    }
}

/// Symmetric first-order CAR field.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SfcarParams {
    kappa: f64,
    dependence: EdgeDependence,
}

impl SfcarParams {
    pub fn new(kappa: f64, zeta: f64) -> Result<Self> {
        Self::with_dependence(kappa, EdgeDependence::new(zeta)?)
    }

    pub fn with_dependence(kappa: f64, dependence: EdgeDependence) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid("kappa", kappa, "must be positive"));
        }
        Ok(Self { kappa, dependence })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn zeta(&self) -> f64 {
        self.dependence.zeta()
    }

    pub fn lambda(&self) -> f64 {
        self.zeta() * self.kappa
    }

    pub fn dependence(&self) -> EdgeDependence {
        self.dependence
    }
}

/// `1 / (4π²κ(1 − 2ζ cos ω₁ − 2ζ cos ω₂))`.
pub fn sfcar_spectrum(params: &SfcarParams, w1: f64, w2: f64) -> f64 {
    let a1 = sin_half_sq(w1);
    let a2 = sin_half_sq(w2);
    let denom = EdgeDependence::spectral_denominator(params.dependence.gap(), a1, a2);
    1.0 / (FOUR_PI_SQ * params.kappa * denom)
}

/// Signal power `γ₀₀ = 2K(4ζ)/(πκ)`.
pub fn sfcar_power(params: &SfcarParams) -> f64 {
    params.dependence.lattice_gain() / params.kappa
}

pub fn sfcar_snr(params: &SfcarParams, noise: &NoiseModel) -> f64 {
    sfcar_power(params) / noise.sigma2
}

/// Chooses `κ` so that the field has the requested SNR against `noise`.
pub fn sfcar_from_snr(snr: f64, zeta: f64, noise: &NoiseModel) -> Result<SfcarParams> {
    sfcar_from_snr_with(snr, EdgeDependence::new(zeta)?, noise)
}

pub fn sfcar_from_snr_with(
    snr: f64,
    dependence: EdgeDependence,
    noise: &NoiseModel,
) -> Result<SfcarParams> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::invalid("snr", snr, "must be positive"));
    }
    SfcarParams::with_dependence(dependence.lattice_gain() / (snr * noise.sigma2), dependence)
}

/// `sin²(ω/2) = (1 − cos ω)/2` without cancellation near zero.
#[inline]
pub(crate) fn sin_half_sq(w: f64) -> f64 {
    let s = libm::sin(0.5 * w);
    s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::elliptic_k;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn white_field_is_flat() {
        let c = CarCoefficients::new([((0, 0), 1.0)]).unwrap();
        for &(a, b) in &[(0.0, 0.0), (1.0, -2.0), (PI, PI)] {
            assert!(close(
                car_spectrum(&c, a, b).unwrap(),
                1.0 / FOUR_PI_SQ,
                1e-15
            ));
        }
    }

    #[test]
    fn one_dimensional_taps_at_pi() {
        let taps = [((0, 0), 1.0), ((1, 0), -0.6)];
        let c = CarCoefficients::symmetric(taps).unwrap();
        assert_eq!(c.theta(-1, 0), -0.6);
        let f = car_spectrum(&c, PI, 0.0).unwrap();
        assert!(close(f, 1.0 / (8.8 * PI * PI), 1e-14));
        // 1 − 1.2 cos ω₁ is negative at the origin
        assert!(car_spectrum(&c, 0.0, 0.0).is_err());
        assert!(CarCoefficients::new(taps).is_err());
    }

    #[test]
    fn rejects_bad_coefficient_maps() {
        assert!(CarCoefficients::new([((0, 0), 1.0), ((1, 0), -0.3), ((-1, 0), -0.2)]).is_err());
        assert!(CarCoefficients::new([((0, 0), -1.0)]).is_err());
        assert!(CarCoefficients::new([((1, 0), -1.0)]).is_err());
        // 1 - 1.2 cos ω₁ goes negative at the origin
        assert!(CarCoefficients::new([((0, 0), 1.0), ((1, 0), -0.6), ((0, 1), -0.1)]).is_err());
        assert!(CarCoefficients::new([((0, 0), f64::NAN)]).is_err());
    }

    #[test]
    fn sfcar_examples() {
        let p = SfcarParams::new(1.0, 0.0).unwrap();
        assert!(close(sfcar_spectrum(&p, 0.3, 2.0), 1.0 / FOUR_PI_SQ, 1e-15));
        let p = SfcarParams::new(1.0, 0.2).unwrap();
        assert!(close(sfcar_spectrum(&p, 0.0, 0.0), 5.0 / FOUR_PI_SQ, 1e-14));
        let p = SfcarParams::new(2.0, 0.2).unwrap();
        assert!(close(
            sfcar_spectrum(&p, PI, PI),
            1.0 / (8.0 * PI * PI * 1.8),
            1e-14
        ));
    }

    #[test]
    fn power_and_snr() {
        let noise = NoiseModel::new(1.0).unwrap();
        let p = SfcarParams::new(1.0, 0.0).unwrap();
        assert!(close(sfcar_power(&p), 1.0, 1e-15));
        assert!(close(
            sfcar_power(&SfcarParams::new(4.0, 0.0).unwrap()),
            0.25,
            1e-15
        ));
        let p = SfcarParams::new(1.0, 0.125).unwrap();
        let expected = 2.0 / PI * elliptic_k(0.5).unwrap();
        assert!(close(sfcar_power(&p), expected, 1e-14));
        assert!(close(sfcar_power(&p), 1.073_182_007_149_364_5, 1e-13));
        assert!(close(sfcar_snr(&p, &noise), expected, 1e-14));
        let quiet = NoiseModel::new(0.1).unwrap();
        assert!(close(
            sfcar_snr(&SfcarParams::new(1.0, 0.0).unwrap(), &quiet),
            10.0,
            1e-14
        ));
    }

    #[test]
    fn from_snr_examples() {
        let noise = NoiseModel::default();
        assert!(close(
            sfcar_from_snr(1.0, 0.0, &noise).unwrap().kappa(),
            1.0,
            1e-15
        ));
        assert!(close(
            sfcar_from_snr(10.0, 0.0, &noise).unwrap().kappa(),
            0.1,
            1e-15
        ));
        assert!(sfcar_from_snr(0.0, 0.1, &noise).is_err());
    }

    #[test]
    fn gain_is_continuous_across_branches() {
        for &lg in &[-0.5, LOG_GAP_ASYMPTOTIC] {
            let below = EdgeDependence::from_log_gap(lg * (1.0 + 1e-15)).unwrap();
            let above = EdgeDependence::from_log_gap(lg * (1.0 - 1e-15)).unwrap();
            assert!(
                close(below.lattice_gain(), above.lattice_gain(), 1e-12),
                "{lg}"
            );
        }
        let d = EdgeDependence::new(0.2).unwrap();
        let direct = 2.0 / PI * elliptic_k(0.8).unwrap();
        assert!(close(d.lattice_gain(), direct, 1e-14));
    }

    #[test]
    fn dependence_bounds() {
        assert!(EdgeDependence::new(0.25).is_err());
        assert!(EdgeDependence::new(-1e-3).is_err());
        assert!(EdgeDependence::from_log_gap(f64::NEG_INFINITY).is_err());
        let d = EdgeDependence::new(0.1).unwrap();
        assert!(close(d.zeta(), 0.1, 1e-15));
        assert!(close(d.gap(), 0.6, 1e-15));
    }
}
