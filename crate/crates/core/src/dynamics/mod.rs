//! Spin equations of motion, collapse, and two-level amplitude integration.

pub mod rk;
mod spin;
mod two_level;

pub use spin::{
    branch, collapse_envelope, collapse_times, cqd_rhs, integrate_spin, integrate_spin_with, DynamicsConfig,
    Physics, SpinState, POLE_GUARD,
};
pub use two_level::{integrate_two_level, AmplitudePair, TwoLevelOutcome};
