//! Hit-rate prediction for similarity caches.
//!
//! The RND-TTL model treats every item as an independent TTL item whose
//! insertion and refresh rates depend on the occupancies of its neighbors.
//! [`solver::solve`] finds a self-consistent occupancy vector;
//! [`jacobian`] analyses the contraction of the damped iteration;
//! [`sim`] holds the trace-driven simulators used as ground truth and
//! [`baselines`] the classic estimators they are compared with.

// `!(x >= 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod baselines;
pub mod catalog;
pub mod error;
pub mod exec;
pub mod io;
pub mod jacobian;
pub mod model;
pub mod sim;
pub mod solver;

pub use acceptance::{Acceptance, AcceptanceRule};
pub use error::{Error, Result};
pub use exec::Execution;
