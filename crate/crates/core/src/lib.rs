//! Movable-antenna over-the-air computation.
//!
//! A fusion center with `N` movable receive antennas aggregates the sum of
//! `K` sensor readings transmitted simultaneously over a multipath channel.
//! This crate provides:
//!
//! - [`channel`]: the plane-wave (field-response) channel model, its spatial
//!   gradient, and random scenario generation;
//! - [`objective`]: the computation MSE and the per-antenna position
//!   objective with cached coefficients;
//! - [`optimizer`]: block-coordinate minimization over the combiner, the
//!   per-sensor power-control factors and the antenna positions;
//! - [`harness`]: Monte Carlo sweeps comparing movable antennas against a
//!   fixed half-wavelength uniform linear array, with CSV/JSON output.

pub mod channel;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod objective;
pub mod optimizer;

pub use error::{Error, Result};
