//! Planning toolkit for distribution-system expansion under uncertainty.
//!
//! The crate is organised around a pipeline:
//!
//! * [`network`] — the planning instance: grid data, time blocks, scenarios
//!   and economics, with file ingestion and validation.
//! * [`formulation`] — translates an instance into first-stage constraint
//!   blocks, per-scenario conic recourse programs and extensive-form models.
//! * [`conic`] — a primal-dual interior-point solver for cone programs
//!   (nonnegative orthant and second-order cones), with dual extraction and
//!   an optional polyhedral outer approximation.
//! * [`mip`] — branch-and-bound over a pluggable continuous relaxation.
//! * [`benders`] — the bilinear Benders decomposition driving stochastic and
//!   chance-constrained runs.
//! * [`report`] — run reports, topology exports and method comparisons.

pub mod benders;
pub mod conic;
pub mod formulation;
pub mod mip;
pub mod network;
pub mod report;

pub use network::{
    capital_recovery_factor, generate_scenarios, load_instance, load_instance_str, Instance,
};
