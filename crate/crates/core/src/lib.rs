//! District heating co-simulation: building thermal models, heat interface
//! units, a thermo-hydraulic grid, and a master that couples them.

// `!(x > 0.0)` is used on purpose in validation so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod building;
pub mod cosim;
pub mod dhnet;
pub mod district;
pub mod envelope;
pub mod equipment;
pub mod error;
pub mod hiu;
pub mod report;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
