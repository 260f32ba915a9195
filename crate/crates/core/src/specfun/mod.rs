//! Special functions and quadrature primitives.

mod bessel;
mod elliptic;
mod quadrature;

pub use bessel::{bessel_k0, bessel_k1, one_minus_x_k1, BESSEL_CROSSOVER};
pub use elliptic::{agm, elliptic_k, elliptic_k_from_complement, lattice_gain_excess};
pub use quadrature::{
    integrate_2d_periodic, integrate_unit_interval, midpoint_node, Integral, QuadratureSpec,
};

pub(crate) use quadrature::{integrate_2d_periodic_multi, tanh_sinh_unit};
