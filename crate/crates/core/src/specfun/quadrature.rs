//! Quadrature engines.
//!
//! * A uniform midpoint rule on the periodic square `(−π, π]²`, refined by
//!   doubling. For smooth periodic integrands it converges geometrically.
//!   Nodes sit at cell midpoints, so the origin is never sampled.
//! * A double-exponential (tanh-sinh) rule on `[0, 1]` for integrands with
//!   integrable endpoint singularities. The integrand receives both `u` and
//!   `1 − u` so it can use whichever is accurate.

use core::f64::consts::PI;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    points_per_axis: usize,
    relative_tolerance: f64,
    max_points_per_axis: usize,
}

impl QuadratureSpec {
    pub const MIN_POINTS: usize = 8;
    pub const MAX_TOLERANCE: f64 = 1e-2;

    pub fn new(
        points_per_axis: usize,
        relative_tolerance: f64,
        max_points_per_axis: usize,
    ) -> Result<Self> {
        if points_per_axis < Self::MIN_POINTS {
            return Err(Error::invalid(
                "points_per_axis",
                points_per_axis as f64,
                "must be at least 8",
            ));
        }
        if max_points_per_axis < points_per_axis {
            return Err(Error::invalid(
                "max_points_per_axis",
                max_points_per_axis as f64,
                "must not be below points_per_axis",
            ));
        }
        if !(relative_tolerance > 0.0 && relative_tolerance <= Self::MAX_TOLERANCE) {
            return Err(Error::invalid(
                "relative_tolerance",
                relative_tolerance,
                "must lie in (0, 1e-2]",
            ));
        }
        Ok(Self {
            points_per_axis,
            relative_tolerance,
            max_points_per_axis,
        })
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }

    pub fn max_points_per_axis(&self) -> usize {
        self.max_points_per_axis
    }

    /// Same spec with the starting grid raised to at least `points`.
    pub fn with_min_points(self, points: usize) -> Self {
        let points_per_axis = self.points_per_axis.max(points);
        Self {
            points_per_axis,
            max_points_per_axis: self.max_points_per_axis.max(points_per_axis),
            ..self
        }
    }

    pub fn with_tolerance(self, relative_tolerance: f64) -> Result<Self> {
        Self::new(
            self.points_per_axis,
            relative_tolerance,
            self.max_points_per_axis,
        )
    }
}

impl Default for QuadratureSpec {
    /// 256 points per axis doubling up to 4096, relative tolerance 1e-9.
    fn default() -> Self {
        Self {
            points_per_axis: 256,
            relative_tolerance: 1e-9,
            max_points_per_axis: 4096,
        }
    }
}

/// Result of a converged periodic quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub points_per_axis: usize,
}

/// Node `k` of the `n`-point midpoint grid on `(−π, π]`.
#[inline]
pub fn midpoint_node(k: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * (k as f64 + 0.5) / n as f64
}

/// Integrates `f` over `(−π, π]²` with the doubling midpoint rule.
///
/// Fails with [`Error::NotConverged`] when two successive grids still differ
/// by more than the tolerance at `max_points_per_axis`, and with
/// [`Error::NonFinite`] when `f` returns NaN or an infinity.
pub fn integrate_2d_periodic<F>(mut f: F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64, f64) -> f64,
{
    let out = integrate_2d_periodic_multi(|w| w, |&a, &b| [f(a, b)], spec)?;
    if out.converged {
        Ok(Integral {
            value: out.values[0],
            points_per_axis: out.points_per_axis,
        })
    } else {
        Err(Error::NotConverged {
            estimate: out.values[0],
            points_per_axis: out.points_per_axis,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct MultiIntegral<const M: usize> {
    pub values: [f64; M],
    pub points_per_axis: usize,
    pub converged: bool,
}

/// Vector-valued midpoint rule. `axis` maps a node `ω` to whatever per-axis
/// quantity the integrand needs; it is tabulated once per grid level.
pub(crate) fn integrate_2d_periodic_multi<const M: usize, A, P, F>(
    axis: P,
    mut f: F,
    spec: &QuadratureSpec,
) -> Result<MultiIntegral<M>>
where
    P: Fn(f64) -> A,
    F: FnMut(&A, &A) -> [f64; M],
{
    let mut n = spec.points_per_axis;
    let mut previous = midpoint_sum(&axis, &mut f, n)?;
    while n * 2 <= spec.max_points_per_axis {
        n *= 2;
        let current = midpoint_sum(&axis, &mut f, n)?;
        let converged = (0..M).all(|m| {
            let scale = libm::fmax(libm::fabs(current.0[m]), current.1[m]);
            libm::fabs(current.0[m] - previous.0[m]) <= spec.relative_tolerance * scale
        });
        previous = current;
        if converged {
            return Ok(MultiIntegral {
                values: previous.0,
                points_per_axis: n,
                converged: true,
            });
        }
    }
    Ok(MultiIntegral {
        values: previous.0,
        points_per_axis: n,
        converged: false,
    })
}

/// Returns the integral estimate and the estimate of `∫|f|` (used as the
/// tolerance scale so zero-mean integrands still converge).
fn midpoint_sum<const M: usize, A, P, F>(
    axis: &P,
    f: &mut F,
    n: usize,
) -> Result<([f64; M], [f64; M])>
where
    P: Fn(f64) -> A,
    F: FnMut(&A, &A) -> [f64; M],
{
    let nodes: Vec<(f64, A)> = (0..n)
        .map(|k| {
            let w = midpoint_node(k, n);
            (w, axis(w))
        })
        .collect();
    let mut total = [CompensatedSum::new(); M];
    let mut total_abs = [CompensatedSum::new(); M];
    for (w1, a1) in &nodes {
        let mut row = [CompensatedSum::new(); M];
        let mut row_abs = [CompensatedSum::new(); M];
        for (w2, a2) in &nodes {
            let v = f(a1, a2);
            for m in 0..M {
                if !v[m].is_finite() {
                    return Err(Error::NonFinite {
                        first: *w1,
                        second: *w2,
                    });
                }
                row[m].add(v[m]);
                row_abs[m].add(libm::fabs(v[m]));
            }
        }
        for m in 0..M {
            total[m].add(row[m].value());
            total_abs[m].add(row_abs[m].value());
        }
    }
    let h = 2.0 * PI / n as f64;
    let cell = h * h;
    Ok((
        core::array::from_fn(|m| cell * total[m].value()),
        core::array::from_fn(|m| cell * total_abs[m].value()),
    ))
}

/// Result of the tanh-sinh rule.
#[derive(Debug, Clone, Copy)]
pub(crate) struct UnitIntegral<const M: usize> {
    pub values: [f64; M],
    pub nodes: usize,
    pub converged: bool,
}

const TANH_SINH_T_MAX: f64 = 6.5;
const TANH_SINH_MAX_LEVEL: usize = 14;

/// Integrates `g(u, 1 − u)` over `[0, 1]`.
///
/// The step is halved until successive estimates agree to `rtol` (all
/// components); each level reuses the previous nodes.
pub(crate) fn tanh_sinh_unit<const M: usize, G>(mut g: G, rtol: f64) -> Result<UnitIntegral<M>>
where
    G: FnMut(f64, f64) -> [f64; M],
{
    let mut sums = [CompensatedSum::new(); M];
    let mut nodes = 0usize;
    let mut add_node = |t: f64, sums: &mut [CompensatedSum; M], nodes: &mut usize| -> Result<()> {
        let s = 0.5 * PI * libm::sinh(t);
        let e = libm::exp(-2.0 * libm::fabs(s));
        let (u, v) = if s >= 0.0 {
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        if u <= 0.0 || v <= 0.0 {
            return Ok(());
        }
        // du/dt = (π/4) cosh t · sech²(s)
        let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
        let w = 0.25 * PI * libm::cosh(t) * sech2;
        if w == 0.0 {
            return Ok(());
        }
        let val = g(u, v);
        for m in 0..M {
            if !val[m].is_finite() {
                return Err(Error::NonFinite {
                    first: u,
                    second: v,
                });
            }
            sums[m].add(w * val[m]);
        }
        *nodes += 1;
        Ok(())
    };

    let mut h = 1.0_f64;
    add_node(0.0, &mut sums, &mut nodes)?;
    let mut k = 1usize;
    while (k as f64) * h <= TANH_SINH_T_MAX {
        let t = k as f64 * h;
        add_node(t, &mut sums, &mut nodes)?;
        add_node(-t, &mut sums, &mut nodes)?;
        k += 1;
    }
    let mut previous: [f64; M] = core::array::from_fn(|m| h * sums[m].value());
    for _ in 0..TANH_SINH_MAX_LEVEL {
        h *= 0.5;
        let mut k = 1usize;
        while (k as f64) * h <= TANH_SINH_T_MAX {
            let t = k as f64 * h;
            add_node(t, &mut sums, &mut nodes)?;
            add_node(-t, &mut sums, &mut nodes)?;
            k += 2;
        }
        let current: [f64; M] = core::array::from_fn(|m| h * sums[m].value());
        let converged =
            (0..M).all(|m| libm::fabs(current[m] - previous[m]) <= rtol * libm::fabs(current[m]));
        previous = current;
        if converged {
            return Ok(UnitIntegral {
                values: previous,
                nodes,
                converged: true,
            });
        }
    }
    Ok(UnitIntegral {
        values: previous,
        nodes,
        converged: false,
    })
}

/// Scalar tanh-sinh integral of `g(u, 1 − u)` over `[0, 1]`.
pub fn integrate_unit_interval<G>(mut g: G, rtol: f64) -> Result<f64>
where
    G: FnMut(f64, f64) -> f64,
{
    let out = tanh_sinh_unit(|u, v| [g(u, v)], rtol)?;
    if out.converged {
        Ok(out.values[0])
    } else {
        Err(Error::NotConverged {
            estimate: out.values[0],
            points_per_axis: out.nodes,
        })
    }
}
