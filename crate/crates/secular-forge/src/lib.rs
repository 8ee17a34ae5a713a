//! Numerical and exact-arithmetic toolkit for the planetary three-body problem.

pub mod error;
pub mod averaging;
pub mod charts;
pub mod coeff;
pub mod config;
pub mod dynamics;
pub mod kepler;
pub mod nf;
pub mod secular;
pub mod steepness;
pub mod suite;
pub mod series;

pub use error::{Error, Result};
