//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Below [`BESSEL_CROSSOVER`] the ascending series is used; above it the
//! Steed/Temme continued fraction for `K₀` and `K₁` (the CF2 form of
//! Numerical Recipes' `bessik`).

use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Argument at which evaluation switches from the series to the continued
/// fraction.
pub const BESSEL_CROSSOVER: f64 = 2.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX_TERMS: usize = 60;
const CF_MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-17;

/// `K₁(x)` for `x > 0`.
///
/// Relative accuracy is close to machine precision on both branches. For
/// `x` beyond roughly 705 the value underflows to zero.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_domain("bessel_k1", x)?;
    if x <= BESSEL_CROSSOVER {
        let s = series(x);
        Ok(1.0 / x + libm::log(0.5 * x) * s.i1 - 0.25 * x * s.psi_sum)
    } else {
        Ok(continued_fraction(x).1)
    }
}

/// `K₀(x)` for `x > 0`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_domain("bessel_k0", x)?;
    if x <= BESSEL_CROSSOVER {
        // K0 = -(ln(x/2) + γ) I0 + Σ H_k (x²/4)^k / (k!)²
        let y = 0.25 * x * x;
        let (mut term, mut harmonic) = (1.0_f64, 0.0_f64);
        let (mut i0, mut tail) = (1.0_f64, 0.0_f64);
        for k in 1..SERIES_MAX_TERMS {
            let kf = k as f64;
            term *= y / (kf * kf);
            harmonic += 1.0 / kf;
            i0 += term;
            tail += harmonic * term;
            if term < EPS * i0 {
                break;
            }
        }
        Ok(-(libm::log(0.5 * x) + EULER_GAMMA) * i0 + tail)
    } else {
        Ok(continued_fraction(x).0)
    }
}

/// `1 − x·K₁(x)`, accurate when `x·K₁(x)` is close to one (small `x`).
pub fn one_minus_x_k1(x: f64) -> Result<f64> {
    check_domain("one_minus_x_k1", x)?;
    if x <= BESSEL_CROSSOVER {
        let s = series(x);
        Ok(0.25 * x * x * s.psi_sum - x * libm::log(0.5 * x) * s.i1)
    } else {
        Ok(1.0 - x * continued_fraction(x).1)
    }
}

fn check_domain(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { function, value: x })
    }
}

struct Series {
    /// I₁(x)
    i1: f64,
    /// Σₖ [ψ(k+1) + ψ(k+2)] (x²/4)ᵏ / (k!(k+1)!)
    psi_sum: f64,
}

fn series(x: f64) -> Series {
    let y = 0.25 * x * x;
    let mut coeff = 1.0_f64;
    let mut psi_a = -EULER_GAMMA; // ψ(k+1)
    let mut psi_b = 1.0 - EULER_GAMMA; // ψ(k+2)
    let mut plain = 0.0_f64;
    let mut weighted = 0.0_f64;
    for k in 0..SERIES_MAX_TERMS {
        plain += coeff;
        weighted += (psi_a + psi_b) * coeff;
        let kf = k as f64;
        psi_a += 1.0 / (kf + 1.0);
        psi_b += 1.0 / (kf + 2.0);
        coeff *= y / ((kf + 1.0) * (kf + 2.0));
        if coeff < EPS * plain {
            break;
        }
    }
    Series {
        i1: 0.5 * x * plain,
        psi_sum: weighted,
    }
}

/// Returns `(K₀(x), K₁(x))` for `x ≥ 2`.
fn continued_fraction(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let (mut q1, mut q2) = (0.0_f64, 1.0_f64);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..CF_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if libm::fabs(dels / s) < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = libm::sqrt(PI / (2.0 * x)) * libm::exp(-x) / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
