use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument {value} is outside the domain")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature did not reach the tolerance at {points_per_axis} points per axis (last estimate {estimate})")]
    NotConverged {
        estimate: f64,
        points_per_axis: usize,
    },

    #[error("integrand is not finite at ({first}, {second})")]
    NonFinite { first: f64, second: f64 },

    #[error("invalid CAR model: {0}")]
    InvalidModel(&'static str),

    #[error("precision matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),

    #[error("zero-SNR network: sensing energy must be positive")]
    ZeroSnrNetwork,

    #[error("root finding failed: {0}")]
    RootNotFound(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
