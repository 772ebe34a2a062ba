//! Last-passage percolation in the Bernoulli corner-growth model.
//!
//! Weights are Bernoulli and are collected only on horizontal steps. The crate
//! pairs closed-form limits (shape, large-deviation rates, log-MGFs of the
//! i.i.d. and stationary boundary models) with exact small-lattice oracles and
//! a deterministic Monte Carlo engine that checks them.

pub mod burke;
pub mod cli;
pub mod error;
pub mod extended;
pub mod lattice;
pub mod ldp;
pub mod lmgf;
pub mod montecarlo;
pub mod optimize;
pub mod params;
pub mod rng;
pub mod shape;
pub mod verify;

pub use error::{Error, Result};
pub use extended::Extended;
pub use params::{validate_params, ModelParams};
