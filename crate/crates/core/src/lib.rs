//! Spare-parts inventory model for satellite constellations with orbital parking echelons.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inplane;
pub mod optimizer;
pub mod orbital;
pub mod parking;
pub mod quadrature;
pub mod report;
pub mod scenario;
pub mod simulator;
pub mod stochastic;
pub mod system;
pub mod units;

pub use error::{Error, Result};
