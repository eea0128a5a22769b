//! Capacity toolkit for POST channels, finite-state channels whose state is
//! the previous output.

pub mod capacity;
pub mod channel;
pub mod closed_form;
pub mod construction;
pub mod directed;
pub mod error;
pub mod probability;
pub mod report;
pub mod tolerance;

pub use error::{Error, Result};
