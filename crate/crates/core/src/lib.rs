//! Hybrid feedback for global stabilization of a point mass in ℝⁿ with safe
//! avoidance of ellipsoidal obstacles.

// `!(a > b)` checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod obstacle;
pub mod parallel;
pub mod properties;
pub mod sampling;
pub mod scenario;
mod serde_util;
pub mod simulator;
pub mod tuning;

pub use error::{Error, Result};
