//! Differentially private stochastic convex optimization for interpolation
//! problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`domain`]: points, balls, datasets, instances, traces and exact excess risk.
//! - [`losses`]: loss families and their closed-form Lipschitzian extensions.
//! - [`mechanisms`]: seeded noise samplers, noise-scale formulas, ε audits.
//! - [`base`]: output-perturbed localization ERM, the epoch growth solver and
//!   the extension wrapper.
//! - [`interpolation`]: domain-and-Lipschitz localization, its κ-growth
//!   variant, the adaptive solver and schedule calculators.
//! - [`hardness`]: hard-instance generators and exact stability oracles.
//! - [`format`]: plain-text instance serialization.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod domain;
pub mod error;
pub mod format;
pub mod hardness;
pub mod interpolation;
pub mod losses;
pub mod mechanisms;

pub use domain::{
    excess_risk, project_onto_ball, Ball, Dataset, EpochRecord, Instance, LossConstants, Optimum, Point,
    PopulationModel, PrivacyBudget, RunTrace, SamplePayload, Schedule, SolverKind,
};
pub use error::{Error, Result};
pub use losses::{LossFamily, LossFamilyId};
pub use mechanisms::RngStream;
