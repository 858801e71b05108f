//! Likelihood-free inference with frequentist guarantees.
//!
//! This crate implements approximate confidence distribution computing
//! (ACC): accept-reject and importance-sampling ABC generalized to
//! data-dependent initial distributions, post-hoc regression adjustment,
//! minibatch construction of the initial distribution, and confidence
//! intervals/regions built from the accepted sample through matching-map
//! quantiles or empirical depth contours. A benchmark harness replicates
//! coverage experiments on Gaussian, Cauchy, and Ricker models.
//!
//! Start from the `examples/` directory: each example is a runnable tour of
//! one capability (the Gaussian closed-form oracle, Cauchy intervals, joint
//! depth regions, minibatch initial distributions, the Ricker pipeline).

pub mod adjustment;
pub mod core;
pub mod error;
pub mod harness;
pub mod inference;
pub mod initial;
pub mod kernels;
pub mod models;
pub mod samplers;

pub use error::{Error, Result};
