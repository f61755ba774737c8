//! Multi-modal transportation fleet assignment.
//!
//! A transportation organization serves per-route, per-period vehicle demand
//! with a mix of its own fleet and rented vehicles across several transport
//! modes. This crate models the assignment problem, prices candidate
//! assignments, and solves it exactly:
//!
//! - [`model`] — instances, solutions, objective and feasibility evaluation;
//! - [`ilp`] — translation into a sparse integer linear program plus
//!   LP-format export;
//! - [`simplex`] — a bounded-variable two-phase revised simplex for the
//!   relaxations, with an independent certificate checker;
//! - [`branch_bound`] — exact integer optimization by best-bound search;
//! - [`oracle`] — exhaustive enumeration on tiny instances, the ground truth
//!   the solvers are tested against;
//! - [`gen`] — seeded, reproducible instance generation, including a preset
//!   over five Texan cities and three vehicle modes;
//! - [`analysis`] — base-versus-capped comparisons and emission-cap
//!   sensitivity sweeps with CSV output.
//!
//! The base model minimizes travel, stopping, operating, and renting costs
//! under fleet, demand, and budget constraints; the enhanced model adds a
//! global cap on CO2 emissions. Tightening the cap trades cost for cleaner
//! service and shifts traffic toward the (newer, lower-emission) rental
//! fleet, which is the trade-off the analysis tooling quantifies.

pub mod analysis;
pub mod branch_bound;
pub mod fixtures;
pub mod gen;
pub mod ilp;
pub mod model;
pub mod oracle;
pub mod simplex;
pub mod tensor;
