//! Pole dynamics of the two-soliton solutions of the modified KdV equation.
//!
//! The [`kernel`] evaluates the closed-form solutions, [`exppoly`] finds all
//! poles at a fixed time in the commensurable case, [`tracker`] follows them
//! in time, and the remaining modules check the laws governing their motion.

pub mod analysis;
pub mod asymptotics;
pub mod blowup;
pub mod error;
pub mod exppoly;
pub mod interaction;
pub mod kernel;
pub mod report;
pub mod tracker;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{PointValue, SolitonConfig, Variant};
