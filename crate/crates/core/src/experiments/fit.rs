//! Least-squares fits of the asymptotic models.

use alloc::collections::BTreeMap;
use alloc::string::String;

use super::{FitModel, FitResult, MIN_SWEEP_POINTS};
use crate::error::{Error, Result};

struct Line {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

/// Ordinary least squares of `v` on `u`.
fn ols<I: Iterator<Item = (f64, f64)> + Clone>(pairs: I) -> Result<Line> {
    let count = pairs.clone().count();
    if count < MIN_SWEEP_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_SWEEP_POINTS,
            got: count,
        });
    }
    let n = count as f64;
    let (mut su, mut sv) = (0.0, 0.0);
    for (u, v) in pairs.clone() {
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::DegenerateFit("non-finite point"));
        }
        su += u;
        sv += v;
    }
    let (mu, mv) = (su / n, sv / n);
    let (mut suu, mut suv, mut svv) = (0.0, 0.0, 0.0);
    for (u, v) in pairs {
        let (du, dv) = (u - mu, v - mv);
        suu += du * du;
        suv += du * dv;
        svv += dv * dv;
    }
    if !(suu > 0.0) {
        return Err(Error::DegenerateFit("abscissa has zero variance"));
    }
    let slope = suv / suu;
    let r_squared = if svv > 0.0 {
        (suv * suv / (suu * svv)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(Line {
        slope,
        intercept: mv - slope * mu,
        r_squared,
    })
}

fn window(points: &[(f64, f64)]) -> (f64, f64) {
    points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        })
}

fn result(
    model: FitModel,
    estimates: &[(&str, f64)],
    r_squared: f64,
    points: &[(f64, f64)],
) -> FitResult {
    FitResult {
        name: String::new(),
        model,
        estimates: estimates
            .iter()
            .map(|&(k, v)| (String::from(k), v))
            .collect::<BTreeMap<_, _>>(),
        r_squared,
        window: window(points),
        points: points.len(),
    }
}

fn require_positive(points: &[(f64, f64)], need_y: bool) -> Result<()> {
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0) || (need_y && !(y > 0.0)))
    {
        return Err(Error::DegenerateFit("values must be positive"));
    }
    Ok(())
}

/// `log y = log_intercept + exponent·log x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    require_positive(points, true)?;
    let line = ols(points.iter().map(|&(x, y)| (libm::log(x), libm::log(y))))?;
    Ok(result(
        FitModel::PowerLaw,
        &[("exponent", line.slope), ("log_intercept", line.intercept)],
        line.r_squared,
        points,
    ))
}

/// `log(y/√x) = log_prefactor − decay_rate·x`.
pub fn fit_exponential_with_sqrt_prefactor(points: &[(f64, f64)]) -> Result<FitResult> {
    require_positive(points, true)?;
    let line = ols(points
        .iter()
        .map(|&(x, y)| (x, libm::log(y / libm::sqrt(x)))))?;
    Ok(result(
        FitModel::ExponentialWithSqrtPrefactor,
        &[
            ("decay_rate", -line.slope),
            ("log_prefactor", line.intercept),
            ("prefactor", libm::exp(line.intercept)),
        ],
        line.r_squared,
        points,
    ))
}

/// `y = intercept + slope·log x`.
pub fn fit_logarithmic(points: &[(f64, f64)]) -> Result<FitResult> {
    require_positive(points, false)?;
    let line = ols(points.iter().map(|&(x, y)| (libm::log(x), y)))?;
    Ok(result(
        FitModel::Logarithmic,
        &[("slope", line.slope), ("intercept", line.intercept)],
        line.r_squared,
        points,
    ))
}

/// `y = slope·x`, with `r²` measured against the mean of `y`.
pub fn fit_affine_origin(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < MIN_SWEEP_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_SWEEP_POINTS,
            got: points.len(),
        });
    }
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissa is identically zero"));
    }
    let slope = sxy / sxx;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - slope * p.0;
            r * r
        })
        .sum();
    let ss_tot: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - mean;
            r * r
        })
        .sum();
    let r_squared: f64 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(result(
        FitModel::Affine,
        &[("slope", slope), ("intercept", 0.0)],
        r_squared,
        points,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = (1..=10).map(|i| (i as f64, 3.0 * (i * i) as f64)).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.estimate("exponent").unwrap() - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.estimate("log_intercept").unwrap() - 3f64.ln()).abs() < 1e-12);
        assert_eq!(f.window, (1.0, 10.0));
    }

    #[test]
    fn inverse_and_perturbed() {
        let pts: Vec<_> = (0..10)
            .map(|i| {
                let x = libm::pow(10.0, i as f64 / 9.0);
                (x, 5.0 / x)
            })
            .collect();
        assert!((fit_power_law(&pts).unwrap().estimate("exponent").unwrap() + 1.0).abs() < 1e-12);

        let pts: Vec<_> = (1..=50)
            .map(|i| {
                let x = i as f64;
                (x, libm::pow(x, 2.0 / 3.0) * (1.0 + 0.01 * libm::sin(x)))
            })
            .collect();
        let p = fit_power_law(&pts).unwrap().estimate("exponent").unwrap();
        assert!((p - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn other_models() {
        let pts: Vec<_> = (0..8)
            .map(|i| {
                let x = 3.0 + 0.5 * i as f64;
                (x, 0.7 * libm::sqrt(x) * libm::exp(-1.3 * x))
            })
            .collect();
        let f = fit_exponential_with_sqrt_prefactor(&pts).unwrap();
        assert!((f.estimate("decay_rate").unwrap() - 1.3).abs() < 1e-12);
        assert!((f.estimate("prefactor").unwrap() - 0.7).abs() < 1e-12);

        let pts: Vec<_> = (1..6)
            .map(|i| (i as f64, 2.0 + 0.5 * libm::log(i as f64)))
            .collect();
        let f = fit_logarithmic(&pts).unwrap();
        assert!((f.estimate("slope").unwrap() - 0.5).abs() < 1e-12);

        let pts: Vec<_> = (1..6).map(|i| (i as f64, 4.0 * i as f64)).collect();
        let f = fit_affine_origin(&pts).unwrap();
        assert!((f.estimate("slope").unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn rejects_degenerate() {
        let pts = [(1.0, 1.0); 5];
        assert!(matches!(fit_power_law(&pts), Err(Error::DegenerateFit(_))));
        assert!(matches!(
            fit_power_law(&pts[..3]),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }
}
