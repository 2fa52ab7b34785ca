//! Experiment driver for the `dpsco` solvers.
//!
//! - [`config`]: flat key=value experiment configuration.
//! - [`sweep`]: seeded sweeps over an `n` grid and the CSV schema.
//! - [`fit`]: exponential versus polynomial rate fits on median excess risk.
//! - [`suites`]: the privacy audit and the stability oracle suites.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fit;
pub mod suites;
pub mod sweep;

pub use config::{ExperimentConfig, Family, SolverId};
pub use error::{BenchError, Result};
pub use fit::{fit_rate, RateFit, RateModel};
pub use sweep::{run_sweep, write_csv, Row};
