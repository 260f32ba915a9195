//! Information rates of hidden Gauss-Markov random fields on the plane.
//!
//! The crate covers the whole numerical pipeline:
//!
//! * [`specfun`]: complete elliptic integral `K(k)`, Bessel `K₁(x)` and the
//!   periodic 2-D midpoint quadrature used for spectral integrals.
//! * [`car`]: conditional autoregression (CAR) models, the symmetric first
//!   order specialization (SFCAR) and its power/SNR bookkeeping.
//! * [`rates`]: asymptotic per-node Kullback-Leibler information (KLI) and
//!   mutual information (MI) rates.
//! * [`physmap`]: sensor spacing to edge correlation `ρ` and the `ρ ↔ ζ` map.
//! * [`oracle`]: exact finite-lattice rates (torus eigenvalues and a banded
//!   free-boundary factorization) used as ground truth.
//! * [`network`]: energy and information accounting for a planar grid network
//!   routing to a central fusion node.
//! * [`experiments`]: scaling-law sweeps and least-squares asymptote fits.
//!
//! The crate is `no_std` and only needs `alloc`; floating point functions come
//! from `libm` so results do not depend on the platform math library.

#![no_std]
// NaN-rejecting checks are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod car;
pub mod error;
pub mod experiments;
pub mod network;
pub mod oracle;
pub mod physmap;
pub mod rates;
pub mod specfun;

pub mod sum;

pub use error::{Error, Result};
