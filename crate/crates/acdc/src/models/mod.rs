//! Benchmark generative models with their summary statistics and point
//! estimators: a unit-variance Gaussian location model with an exact
//! accepted-sample law, Cauchy location/scale models with robust summaries,
//! and the Ricker state-space model with its synthetic-likelihood point
//! estimator.

mod cauchy;
mod estimators;
mod gaussian;
mod ricker;
mod synthetic;

pub use cauchy::{CauchyModel, CauchyParameterization, CauchySummary};
pub use estimators::{
    biased_estimator, mad_estimator, mean_estimator, median_estimator, median_mad_estimator,
    ricker_msl_estimator,
};
pub use gaussian::{gaussian_acc_closed_form, normal_proposal, t4_proposal, GaussianLocationModel};
pub use ricker::{ricker_crude_start, RickerModel};
pub use synthetic::{max_synthetic_likelihood, synthetic_loglik, SyntheticLikelihoodConfig};
