//! Command-line tools, Monte Carlo sampling and file formats for `hgmrf-core`.

pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod output;
pub mod params;

pub use cli::ensure_map_monotone;
