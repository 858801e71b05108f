//! Stochastic Ricker map with Poisson observations,
//! `N_t = r N_{t-1} exp(-N_{t-1} + e_t)`, `y_t ~ Pois(phi N_t)`,
//! parametrized on the log scale as `theta = (log r, log sigma, log phi)`.
//!
//! The summary statistic is the 13-component set used for noise-driven
//! dynamical systems, reconstructed component by component and isolated in
//! [`wood_summaries`] for easy revision:
//!   1. mean of y;
//!   2. number of zeros;
//!   3-8. autocovariances at lags 0..5;
//!   9-11. coefficients of the no-intercept cubic regression of the series'
//!         ordered first differences on the observed series' ordered first
//!         differences (the observed series itself scores (1, 0, 0));
//!   12-13. coefficients of the regression of y_{t+1}^0.3 on
//!          (y_t^0.3, y_t^0.6).

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::Distribution;

use crate::core::{stats, Dataset, GenerativeModel, ParameterPoint, SummaryVector};
use crate::error::{Error, Result};

const WOOD_SUMMARY_DIM: usize = 13;

/// Log-parameter bound beyond which proposals are rejected as out of
/// domain; exp(30) already dwarfs any population the observation model can
/// express.
const LOG_PARAM_LIMIT: f64 = 30.0;

#[derive(Clone, Debug)]
pub struct RickerModel {
    /// Observed series length (observations start after the burn-in).
    pub n: usize,
    pub burn_in: usize,
    /// Sorted first differences of the observed series, the regression
    /// design for summary components 9-11. When absent, a series is
    /// regressed on its own ordered differences.
    diff_reference: Option<Arc<Vec<f64>>>,
}

impl RickerModel {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            burn_in: 50,
            diff_reference: None,
        }
    }

    pub fn with_reference(mut self, data: &Dataset) -> Self {
        self.diff_reference = Some(Arc::new(sorted_diffs(data.observations())));
        self
    }

    fn check_theta(&self, theta: &ParameterPoint) -> Result<(f64, f64, f64)> {
        if theta.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: theta.dim(),
                context: "Ricker parameter (log r, log sigma, log phi)".into(),
            });
        }
        let (log_r, log_sigma, log_phi) = (theta[0], theta[1], theta[2]);
        if [log_r, log_sigma, log_phi]
            .iter()
            .any(|v| v.abs() > LOG_PARAM_LIMIT)
        {
            return Err(Error::DomainViolation(format!(
                "Ricker log-parameters {:?} outside +-{LOG_PARAM_LIMIT}",
                theta.values()
            )));
        }
        Ok((log_r, log_sigma.exp(), log_phi.exp()))
    }

    /// Latent path and observations; exposed separately for tests.
    pub(crate) fn trajectory(
        &self,
        log_r: f64,
        sigma: f64,
        phi: f64,
        n0: f64,
        rng: &mut dyn RngCore,
    ) -> Vec<f64> {
        let mut latent = n0;
        let mut observations = Vec::with_capacity(self.n);
        for t in 0..self.burn_in + self.n {
            let noise = if sigma > 0.0 {
                let normal = rand_distr::Normal::new(0.0, sigma).expect("positive sd");
                normal.sample(&mut *rng)
            } else {
                0.0
            };
            latent = ricker_step(log_r, latent, noise);
            if t >= self.burn_in {
                observations.push(sample_poisson(phi * latent, rng));
            }
        }
        observations
    }
}

/// One latent update `N' = r N exp(-N + e)`, evaluated in log space so huge
/// excursions collapse to zero instead of overflowing (`N exp(-N) -> 0`).
pub(crate) fn ricker_step(log_r: f64, n: f64, noise: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let log_next = log_r + n.ln() - n + noise;
    if log_next > 700.0 {
        // beyond f64::exp range; the next step would send it to zero anyway
        f64::MAX
    } else {
        log_next.exp()
    }
}

fn sample_poisson(lambda: f64, rng: &mut dyn RngCore) -> f64 {
    if !(lambda > 0.0) {
        return 0.0;
    }
    if lambda > 1e9 {
        // normal approximation; indistinguishable at this magnitude
        let z: f64 = rand_distr::StandardNormal.sample(&mut *rng);
        return (lambda + lambda.sqrt() * z).round().max(0.0);
    }
    let pois = rand_distr::Poisson::new(lambda).expect("validated rate");
    pois.sample(&mut *rng)
}

impl GenerativeModel for RickerModel {
    fn parameter_dim(&self) -> usize {
        3
    }

    fn summary_dim(&self) -> usize {
        WOOD_SUMMARY_DIM
    }

    fn simulate(&self, theta: &ParameterPoint, rng: &mut dyn RngCore) -> Result<Dataset> {
        let (log_r, sigma, phi) = self.check_theta(theta)?;
        let n0 = 0.5 + rng.random::<f64>();
        Dataset::new(self.trajectory(log_r, sigma, phi, n0, rng))
    }

    fn summarize(&self, data: &Dataset) -> Result<SummaryVector> {
        let reference = self.diff_reference.as_deref();
        SummaryVector::new(wood_summaries(data.observations(), reference)?)
    }

    fn adapted_to(&self, data: &Dataset) -> Box<dyn GenerativeModel> {
        Box::new(RickerModel {
            n: data.n(),
            burn_in: self.burn_in,
            diff_reference: Some(Arc::new(sorted_diffs(data.observations()))),
        })
    }
}

fn sorted_diffs(y: &[f64]) -> Vec<f64> {
    let mut diffs: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    diffs.sort_by(|a, b| a.partial_cmp(b).expect("finite differences"));
    diffs
}

/// The 13-component summary of a count series; see the module docs for the
/// component list. `reference_diffs`, when given, must have length
/// `y.len() - 1`.
pub fn wood_summaries(y: &[f64], reference_diffs: Option<&Vec<f64>>) -> Result<Vec<f64>> {
    let n = y.len();
    if n < 6 {
        return Err(Error::InvalidConfig(format!(
            "the dynamical-systems summary set needs at least 6 observations, got {n}"
        )));
    }
    let mut s = Vec::with_capacity(WOOD_SUMMARY_DIM);

    let mean = stats::mean(y);
    s.push(mean);
    s.push(y.iter().filter(|v| **v == 0.0).count() as f64);

    for lag in 0..=5usize {
        let mut acc = 0.0;
        for t in 0..n - lag {
            acc += (y[t] - mean) * (y[t + lag] - mean);
        }
        s.push(acc / n as f64);
    }

    let own_diffs = sorted_diffs(y);
    let design: &[f64] = match reference_diffs {
        Some(r) => {
            if r.len() != own_diffs.len() {
                return Err(Error::DimensionMismatch {
                    expected: own_diffs.len(),
                    got: r.len(),
                    context: "ordered-difference regression design".into(),
                });
            }
            r
        }
        None => &own_diffs,
    };
    let cubic = regress_no_intercept(
        &own_diffs,
        &[
            design.to_vec(),
            design.iter().map(|x| x * x).collect(),
            design.iter().map(|x| x * x * x).collect(),
        ],
    );
    s.extend_from_slice(&cubic);

    let resp: Vec<f64> = y[1..].iter().map(|v| v.powf(0.3)).collect();
    let col1: Vec<f64> = y[..n - 1].iter().map(|v| v.powf(0.3)).collect();
    let col2: Vec<f64> = y[..n - 1].iter().map(|v| v.powf(0.6)).collect();
    let auto = regress_no_intercept(&resp, &[col1, col2]);
    s.extend_from_slice(&auto);

    debug_assert_eq!(s.len(), WOOD_SUMMARY_DIM);
    Ok(s)
}

/// Least squares without intercept; degenerate designs (e.g. an all-zero
/// series) yield zero coefficients rather than failing, so summaries stay
/// defined for every simulated series.
fn regress_no_intercept(response: &[f64], columns: &[Vec<f64>]) -> Vec<f64> {
    let k = columns.len();
    let mut xtx: DMatrix<f64> = DMatrix::zeros(k, k);
    let mut xty: DVector<f64> = DVector::zeros(k);
    for r in 0..k {
        for c in 0..k {
            xtx[(r, c)] = columns[r].iter().zip(&columns[c]).map(|(a, b)| a * b).sum();
        }
        xty[r] = columns[r].iter().zip(response).map(|(a, b)| a * b).sum();
    }
    let scale = xtx.diagonal().amax();
    if !(scale > 1e-12) {
        return vec![0.0; k];
    }
    match Cholesky::new(xtx) {
        Some(chol) => chol.solve(&xty).iter().copied().collect(),
        None => vec![0.0; k],
    }
}

/// Cheap starting point for the synthetic-likelihood search on a count
/// series: moderate growth and noise, observation scale matched to the mean
/// count assuming a latent mean near one.
pub fn ricker_crude_start(data: &Dataset) -> ParameterPoint {
    let mean = stats::mean(data.observations()).max(0.5);
    ParameterPoint::new(vec![3.0, 0.5f64.ln(), mean.ln()]).expect("finite start")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::substream;
    use approx::assert_relative_eq;

    #[test]
    fn deterministic_map_fixed_point_is_log_r() {
        for log_r in [0.5, 2.0, 3.8] {
            let next = ricker_step(log_r, log_r, 0.0);
            assert_relative_eq!(next, log_r, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_noise_trajectory_stays_at_fixed_point() {
        let model = RickerModel::new(50);
        let log_r = 3.8;
        let mut rng = substream(5, 0);
        // phi = 0 so observations are all zero and the latent path is the
        // only signal; starting at the fixed point it must remain there,
        // which we observe through a phi = 1 run staying Poisson(log_r)
        let y = model.trajectory(log_r, 0.0, 1.0, log_r, &mut rng);
        let mean = stats::mean(&y);
        // Poisson(3.8) mean over 50 draws: sd ~ sqrt(3.8/50) ~ 0.28
        assert!((mean - log_r).abs() < 1.5, "mean {mean}");
    }

    #[test]
    fn simulation_is_reproducible() {
        let model = RickerModel::new(50);
        let theta = ParameterPoint::new(vec![3.8, 0.3f64.ln(), 10.0f64.ln()]).unwrap();
        let a = model.simulate(&theta, &mut substream(9, 4)).unwrap();
        let b = model.simulate(&theta, &mut substream(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn observed_window_has_requested_length() {
        let model = RickerModel::new(50);
        let theta = ParameterPoint::new(vec![3.8, 0.3f64.ln(), 10.0f64.ln()]).unwrap();
        let data = model.simulate(&theta, &mut substream(9, 1)).unwrap();
        assert_eq!(data.n(), 50);
        assert!(data.observations().iter().all(|v| *v >= 0.0 && v.fract() == 0.0));
    }

    #[test]
    fn wood_summaries_on_zero_series() {
        let y = vec![0.0; 50];
        let s = wood_summaries(&y, None).unwrap();
        assert_eq!(s.len(), 13);
        assert_eq!(s[0], 0.0); // mean
        assert_eq!(s[1], 50.0); // zeros
        for lag in 0..=5 {
            assert_eq!(s[2 + lag], 0.0); // autocovariances
        }
        // degenerate regressions fall back to zero coefficients
        assert!(s[8..13].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wood_summaries_too_short() {
        assert!(wood_summaries(&[1.0, 2.0, 0.0, 4.0, 1.0], None).is_err());
    }

    #[test]
    fn observed_series_scores_identity_in_difference_regression() {
        let model = RickerModel::new(50);
        let theta = ParameterPoint::new(vec![3.8, 0.3f64.ln(), 10.0f64.ln()]).unwrap();
        let data = model.simulate(&theta, &mut substream(11, 0)).unwrap();
        let adapted = model.adapted_to(&data);
        let s = adapted.summarize(&data).unwrap();
        assert_relative_eq!(s[8], 1.0, epsilon = 1e-8);
        assert!(s[9].abs() < 1e-8 && s[10].abs() < 1e-8);
    }

    #[test]
    fn insane_parameters_are_domain_violations() {
        let model = RickerModel::new(50);
        let theta = ParameterPoint::new(vec![40.0, 0.0, 2.0]).unwrap();
        assert!(matches!(
            model.simulate(&theta, &mut substream(1, 0)),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn extreme_but_valid_parameters_stay_finite() {
        let model = RickerModel::new(50);
        // large growth and noise drive boom-bust extinction cycles
        let theta = ParameterPoint::new(vec![20.0, 3.0f64.ln(), 25.0f64.ln()]).unwrap();
        let data = model.simulate(&theta, &mut substream(3, 0)).unwrap();
        assert!(data.observations().iter().all(|v| v.is_finite()));
        let s = model.summarize(&data).unwrap();
        assert!(s.values().iter().all(|v| v.is_finite()));
    }
}
