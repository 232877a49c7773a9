//! Latent Gaussian graphical models for mixed binary and continuous data.
//!
//! The crate estimates sparse inverse correlation structure with a
//! spike-and-slab prior, classifies rows with a latent Gaussian mixture, and
//! ships the simulation and evaluation tooling needed to benchmark both.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod cli;
pub mod data;
pub mod distributions;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod mixture;
pub mod model;
pub mod rng;
pub mod simgen;

pub use error::{Error, Result};
pub use rng::RngStream;
