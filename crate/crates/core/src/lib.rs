//! Co-quantum dynamics (CQD) models of electron spin flips and collapse in
//! sequential Stern–Gerlach measurements.
//!
//! The crate is organized by subsystem:
//!
//! * [`atom`]: physical constants of the modeled atom and the apparatus.
//! * [`hyperfine`]: internal-field coefficients from radial electron densities.
//! * [`field`]: quadrupole model of the inner rotation chamber.
//! * [`dynamics`]: spin equations of motion, collapse, and two-level amplitude
//!   integration.
//! * [`ensemble`]: co-quantum angular distributions, collapse probabilities,
//!   density operators and Monte Carlo estimators.
//! * [`flip`]: analytic spin-flip chain (Majorana, Rabi, W1–W4, W_cqd).
//! * [`verify`]: uncertainty, entanglement and two-stage cross-checks.
//! * [`stats`]: goodness-of-fit statistics and induction-coefficient fit.
//!
//! Data-parallel loops (Monte Carlo batches, trajectory ensembles, current
//! sweeps) run on rayon when the `parallel` feature is enabled and fall back
//! to sequential iteration otherwise; see [`parallel::Execution`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod flip;
pub mod hyperfine;
pub mod parallel;
pub mod rng;
pub mod stats;
pub mod verify;

mod quad;

pub use error::{CqdError, Result};
