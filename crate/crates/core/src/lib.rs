//! Queue-operator construction of the multiclass Hammersley–Aldous–Diaconis
//! process, its dynamics, coupling colors and statistical experiments.

pub mod error;
pub mod model;
pub mod queueing;
pub mod dynamics;
pub mod coloring;
pub mod analysis;

pub use error::{Error, Result};
