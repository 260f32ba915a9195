//! Complete elliptic integral of the first kind via the arithmetic-geometric
//! mean.
//!
//! The argument is the modulus `k`, so `K(0) = π/2` and `K(k) → ∞` as
//! `k → 1`:
//!
//! ```text
//! K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ) = π / (2 · AGM(1, √(1 − k²)))
//! ```

use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Relative stopping threshold on `|aₙ − gₙ|`.
const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;

/// Arithmetic-geometric mean of two nonnegative numbers.
pub fn agm(a: f64, g: f64) -> f64 {
    let (mut a, mut g) = (a, g);
    for _ in 0..AGM_MAX_ITER {
        if libm::fabs(a - g) <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + g);
        g = libm::sqrt(a * g);
        a = next;
    }
    0.5 * (a + g)
}

/// `K(k)` for modulus `0 ≤ k < 1`.
pub fn elliptic_k(modulus: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&modulus) {
        return Err(Error::Domain {
            function: "elliptic_k",
            value: modulus,
        });
    }
    // (1 - k)(1 + k) keeps the complement accurate as k -> 1
    let complement = libm::sqrt((1.0 - modulus) * (1.0 + modulus));
    Ok(FRAC_PI_2 / agm(1.0, complement))
}

/// `K` expressed through the complementary modulus `k' = √(1 − k²)`,
/// `0 < k' ≤ 1`. Accurate when `k` is too close to one to be represented.
pub fn elliptic_k_from_complement(complement: f64) -> Result<f64> {
    if !(complement > 0.0 && complement <= 1.0) {
        return Err(Error::Domain {
            function: "elliptic_k_from_complement",
            value: complement,
        });
    }
    Ok(FRAC_PI_2 / agm(1.0, complement))
}

/// `(2/π)·K(k) − 1` without cancellation for small `k`.
///
/// The AGM of `(1, k')` is run on the deficits `1 − aₙ` and `1 − gₙ`, which
/// are all computed from products and sums of small quantities.
pub fn lattice_gain_excess(modulus: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&modulus) {
        return Err(Error::Domain {
            function: "lattice_gain_excess",
            value: modulus,
        });
    }
    let complement = libm::sqrt((1.0 - modulus) * (1.0 + modulus));
    let mut da = 0.0_f64;
    let mut dg = modulus * modulus / (1.0 + complement);
    for _ in 0..AGM_MAX_ITER {
        // relative to the deficit itself so tiny moduli keep full precision
        if libm::fabs(dg - da) <= 1e-16 * libm::fmax(da, dg) {
            break;
        }
        let next_da = 0.5 * (da + dg);
        let product_deficit = da + dg - da * dg;
        let g = libm::sqrt((1.0 - da) * (1.0 - dg));
        dg = product_deficit / (1.0 + g);
        da = next_da;
    }
    let deficit = 0.5 * (da + dg);
    Ok(deficit / (1.0 - deficit))
}
