//! Point estimators used by the minibatch schemes, packaged as closures.

use std::sync::Arc;

use crate::core::{derive_seed, stats, Dataset, GenerativeModel, ParameterPoint};
use crate::error::Result;
use crate::initial::PointEstimator;
use crate::models::ricker::{ricker_crude_start, RickerModel};
use crate::models::synthetic::{max_synthetic_likelihood, SyntheticLikelihoodConfig};

pub fn mean_estimator() -> PointEstimator {
    Arc::new(|data: &Dataset| ParameterPoint::scalar(stats::mean(data.observations())))
}

pub fn median_estimator() -> PointEstimator {
    Arc::new(|data: &Dataset| ParameterPoint::scalar(stats::median(data.observations())?))
}

pub fn mad_estimator() -> PointEstimator {
    Arc::new(|data: &Dataset| ParameterPoint::scalar(stats::mad(data.observations())?))
}

pub fn median_mad_estimator() -> PointEstimator {
    Arc::new(|data: &Dataset| {
        let obs = data.observations();
        ParameterPoint::new(vec![stats::median(obs)?, stats::mad(obs)?])
    })
}

/// Wrap an estimator with a fixed coordinatewise offset (used to study how
/// the refinement copes with biased crude estimates).
pub fn biased_estimator(inner: PointEstimator, offsets: Vec<f64>) -> PointEstimator {
    Arc::new(move |data: &Dataset| {
        let base = inner(data)?;
        let values: Vec<f64> = base
            .values()
            .iter()
            .zip(offsets.iter().chain(std::iter::repeat(&0.0)))
            .map(|(v, o)| v + o)
            .collect();
        ParameterPoint::new(values)
    })
}

/// Maximum-synthetic-likelihood estimator for count series from the
/// stochastic Ricker map. Each subset gets its own adapted model (its own
/// length and difference reference) and a data-driven crude start; `seed`
/// fixes the common random numbers, and distinct datasets perturb it
/// through a content hash so parallel subsets stay independent.
pub fn ricker_msl_estimator(cfg: SyntheticLikelihoodConfig, seed: u64) -> PointEstimator {
    Arc::new(move |data: &Dataset| -> Result<ParameterPoint> {
        let model = RickerModel::new(data.n()).adapted_to(data);
        let s_obs = model.summarize(data)?;
        let start = ricker_crude_start(data);
        let mut content = 0u64;
        for v in data.observations() {
            content = derive_seed(content, v.to_bits());
        }
        max_synthetic_likelihood(&*model, &s_obs, &cfg, &start, derive_seed(seed, content))
    })
}
