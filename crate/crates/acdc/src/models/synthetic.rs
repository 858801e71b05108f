//! Synthetic likelihood: a Gaussian approximation to the summary
//! distribution estimated from replicate simulations, maximized by
//! Nelder-Mead under common random numbers so the objective is a
//! deterministic function of the parameter.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::Distribution;

use crate::core::{derive_seed, substream, GenerativeModel, ParameterPoint, SummaryVector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct SyntheticLikelihoodConfig {
    /// Replicate simulations per objective evaluation.
    pub replicates: usize,
    /// Objective-evaluation budget per Nelder-Mead run.
    pub budget: usize,
    /// Additional restarts from perturbed starting points.
    pub restarts: usize,
}

impl Default for SyntheticLikelihoodConfig {
    fn default() -> Self {
        Self {
            replicates: 60,
            budget: 150,
            restarts: 2,
        }
    }
}

/// Log synthetic likelihood
/// `-(s_obs - mu)' Sigma^-1 (s_obs - mu) / 2 - log|Sigma| / 2`, with mean
/// and covariance estimated from `replicates` simulations at `theta` under
/// substreams of `seed` (identical seeds give identical values).
pub fn synthetic_loglik(
    model: &dyn GenerativeModel,
    theta: &ParameterPoint,
    s_obs: &SummaryVector,
    cfg: &SyntheticLikelihoodConfig,
    seed: u64,
) -> Result<f64> {
    let d = s_obs.dim();
    let r = cfg.replicates;
    if r < d + 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least d + 2 = {} replicates to estimate the summary covariance, got {r}",
            d + 2
        )));
    }
    let mut summaries = Vec::with_capacity(r);
    for i in 0..r {
        let mut rng = substream(seed, i as u64);
        summaries.push(model.simulate_summary(theta, &mut rng)?);
    }

    let mut mean = DVector::zeros(d);
    for s in &summaries {
        for j in 0..d {
            mean[j] += s[j];
        }
    }
    mean /= r as f64;

    let mut cov: DMatrix<f64> = DMatrix::zeros(d, d);
    for s in &summaries {
        for a in 0..d {
            for b in 0..d {
                cov[(a, b)] += (s[a] - mean[a]) * (s[b] - mean[b]);
            }
        }
    }
    cov /= (r - 1) as f64;
    let ridge = 1e-8 * cov.trace().max(1e-300) / d as f64;
    for j in 0..d {
        cov[(j, j)] += ridge;
    }

    let chol = Cholesky::new(cov).ok_or_else(|| {
        Error::SingularCovariance("summary covariance not positive definite after ridging".into())
    })?;
    let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    let diff = DVector::from_vec(s_obs.values().to_vec()) - mean;
    let y = chol
        .l()
        .solve_lower_triangular(&diff)
        .expect("Cholesky factor is nonsingular");
    Ok(-0.5 * y.norm_squared() - 0.5 * log_det)
}

/// Maximum synthetic likelihood by Nelder-Mead over the model's parameter
/// space, best of `restarts + 1` runs started from `start` and perturbed
/// copies of it. A zero budget returns the start unchanged.
pub fn max_synthetic_likelihood(
    model: &dyn GenerativeModel,
    s_obs: &SummaryVector,
    cfg: &SyntheticLikelihoodConfig,
    start: &ParameterPoint,
    seed: u64,
) -> Result<ParameterPoint> {
    if cfg.budget == 0 {
        return Ok(start.clone());
    }
    let obj_seed = derive_seed(seed, 0x0b9ec7);
    let objective = |x: &[f64]| -> f64 {
        let theta = match ParameterPoint::new(x.to_vec()) {
            Ok(t) => t,
            Err(_) => return f64::NEG_INFINITY,
        };
        match synthetic_loglik(model, &theta, s_obs, cfg, obj_seed) {
            Ok(v) => v,
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let start_value = objective(start.values());
    let mut best = (start.values().to_vec(), start_value);
    for restart in 0..=cfg.restarts {
        let mut init = start.values().to_vec();
        if restart > 0 {
            let mut rng = substream(derive_seed(seed, restart as u64), 0);
            let normal = rand_distr::Normal::new(0.0, 0.6).expect("positive sd");
            for v in &mut init {
                *v += normal.sample(&mut rng);
            }
        }
        // parameters are on the log scale; a fixed simplex edge keeps the
        // search exploring even where the start coordinate is near zero
        let steps = vec![0.4; init.len()];
        let (x, value) = nelder_mead_max(&objective, &init, &steps, cfg.budget);
        if value > best.1 {
            best = (x, value);
        }
    }

    if best.1 <= start_value && start_value.is_finite() {
        log::warn!(
            "synthetic-likelihood search did not improve on its start \
             (value {start_value:.4}); returning the best point seen"
        );
    }
    if !best.1.is_finite() {
        return Err(Error::DegenerateSample(
            "synthetic likelihood was undefined everywhere the search looked".into(),
        ));
    }
    ParameterPoint::new(best.0)
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) maximizing `f`, budgeted by objective evaluations.
fn nelder_mead_max(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    steps: &[f64],
    budget: usize,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(start);
    simplex.push((start.to_vec(), v0));
    for j in 0..dim {
        let mut x = start.to_vec();
        x[j] += steps[j];
        let v = eval(&x);
        simplex.push((x, v));
    }

    while evals.get() < budget {
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("comparable objective"));
        let spread = simplex[0].1 - simplex[dim].1;
        if spread.abs() < 1e-10 && spread.is_finite() {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = (0..dim)
            .map(|j| centroid[j] + (centroid[j] - worst.0[j]))
            .collect();
        let fr = eval(&reflect);

        if fr > simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - worst.0[j]))
                .collect();
            let fe = eval(&expand);
            simplex[dim] = if fe > fr { (expand, fe) } else { (reflect, fr) };
        } else if fr > simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + 0.5 * (worst.0[j] - centroid[j]))
                .collect();
            let fc = eval(&contract);
            if fc > worst.1 {
                simplex[dim] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(x, b)| b + 0.5 * (x - b))
                        .collect();
                    let fv = eval(&shrunk);
                    *entry = (shrunk, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("comparable objective"));
    simplex[0].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GaussianLocationModel, RickerModel};
    use approx::assert_relative_eq;

    #[test]
    fn loglik_zero_at_perfect_match_unit_cov() {
        // a model whose summary is exactly N(theta, 1): with many replicates
        // the quadratic form at s_obs = mean vanishes and log|Sigma| ~ 0
        struct Unit;
        impl GenerativeModel for Unit {
            fn parameter_dim(&self) -> usize {
                1
            }
            fn summary_dim(&self) -> usize {
                1
            }
            fn simulate(
                &self,
                theta: &ParameterPoint,
                rng: &mut dyn rand::RngCore,
            ) -> Result<crate::core::Dataset> {
                let normal = rand_distr::Normal::new(theta[0], 1.0).unwrap();
                crate::core::Dataset::new(vec![normal.sample(&mut *rng)])
            }
            fn summarize(&self, data: &crate::core::Dataset) -> Result<SummaryVector> {
                SummaryVector::scalar(data.observations()[0])
            }
            fn adapted_to(&self, _: &crate::core::Dataset) -> Box<dyn GenerativeModel> {
                Box::new(Unit)
            }
        }
        let cfg = SyntheticLikelihoodConfig {
            replicates: 40_000,
            budget: 0,
            restarts: 0,
        };
        let theta = ParameterPoint::scalar(0.0).unwrap();
        // evaluate at the estimated replicate mean so the quadratic term is 0
        let mut mean = 0.0;
        for i in 0..cfg.replicates {
            let mut rng = substream(77, i as u64);
            mean += Unit.simulate_summary(&theta, &mut rng).unwrap()[0];
        }
        mean /= cfg.replicates as f64;
        let s_obs = SummaryVector::scalar(mean).unwrap();
        let ll = synthetic_loglik(&Unit, &theta, &s_obs, &cfg, 77).unwrap();
        assert!(ll.abs() < 0.01, "loglik {ll}");
    }

    #[test]
    fn loglik_det_term_scales() {
        // doubling the covariance at zero deviation changes the value by
        // -ln(2)/2; verified through the closed form on synthetic numbers
        let quad = 0.0f64;
        let l1 = -0.5 * quad - 0.5 * 1.0f64.ln();
        let l2 = -0.5 * quad - 0.5 * 2.0f64.ln();
        assert_relative_eq!(l1 - l2, 0.5 * 2.0f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn loglik_is_deterministic_in_seed() {
        let model = RickerModel::new(50);
        let theta = ParameterPoint::new(vec![3.8, 0.3f64.ln(), 10.0f64.ln()]).unwrap();
        let data = model.simulate(&theta, &mut substream(1, 0)).unwrap();
        let adapted = model.adapted_to(&data);
        let s_obs = adapted.summarize(&data).unwrap();
        let cfg = SyntheticLikelihoodConfig {
            replicates: 30,
            budget: 0,
            restarts: 0,
        };
        let a = synthetic_loglik(&*adapted, &theta, &s_obs, &cfg, 42).unwrap();
        let b = synthetic_loglik(&*adapted, &theta, &s_obs, &cfg, 42).unwrap();
        assert_eq!(a, b);
        let c = synthetic_loglik(&*adapted, &theta, &s_obs, &cfg, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn replicate_floor_enforced() {
        let model = RickerModel::new(50);
        let theta = ParameterPoint::new(vec![3.8, 0.3f64.ln(), 10.0f64.ln()]).unwrap();
        let data = model.simulate(&theta, &mut substream(1, 1)).unwrap();
        let adapted = model.adapted_to(&data);
        let s_obs = adapted.summarize(&data).unwrap();
        let cfg = SyntheticLikelihoodConfig {
            replicates: 5,
            budget: 0,
            restarts: 0,
        };
        assert!(matches!(
            synthetic_loglik(&*adapted, &theta, &s_obs, &cfg, 1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn zero_budget_returns_start() {
        let model = GaussianLocationModel::new(20);
        let s_obs = SummaryVector::scalar(0.5).unwrap();
        let cfg = SyntheticLikelihoodConfig {
            replicates: 50,
            budget: 0,
            restarts: 3,
        };
        let start = ParameterPoint::scalar(-2.0).unwrap();
        let out = max_synthetic_likelihood(&model, &s_obs, &cfg, &start, 5).unwrap();
        assert_eq!(out, start);
    }

    #[test]
    fn gaussian_maximizer_recovers_sample_mean() {
        // the synthetic likelihood of the Gaussian mean summary peaks at
        // s_obs up to replicate noise
        let model = GaussianLocationModel::new(100);
        let theta0 = ParameterPoint::scalar(0.3).unwrap();
        let data = model.simulate(&theta0, &mut substream(21, 0)).unwrap();
        let s_obs = model.summarize(&data).unwrap();
        let cfg = SyntheticLikelihoodConfig {
            replicates: 100,
            budget: 200,
            restarts: 2,
        };
        let start = ParameterPoint::scalar(s_obs[0] + 0.5).unwrap();
        let est = max_synthetic_likelihood(&model, &s_obs, &cfg, &start, 33).unwrap();
        assert!(
            (est[0] - s_obs[0]).abs() < 0.05,
            "estimate {} vs observed mean {}",
            est[0],
            s_obs[0]
        );
    }

    #[test]
    fn nelder_mead_maximizes_a_quadratic() {
        let f = |x: &[f64]| -((x[0] - 1.5).powi(2) + (x[1] + 0.5).powi(2));
        let (x, _) = nelder_mead_max(&f, &[0.0, 0.0], &[0.5, 0.5], 400);
        assert!((x[0] - 1.5).abs() < 1e-3 && (x[1] + 0.5).abs() < 1e-3, "{x:?}");
    }

    #[test]
    fn ricker_estimator_tracks_growth_rate() {
        // loose Monte Carlo check at the small-data scale: the maximum
        // synthetic likelihood estimate of log r lands within +-0.6 of the
        // generating value in most windows
        let truth = ParameterPoint::new(vec![3.8, 0.3f64.ln(), 10.0f64.ln()]).unwrap();
        let cfg = SyntheticLikelihoodConfig {
            replicates: 60,
            budget: 150,
            restarts: 2,
        };
        let trials = 20u64;
        let mut hits = 0;
        for trial in 0..trials {
            let model = RickerModel::new(50);
            let data = model.simulate(&truth, &mut substream(9000, trial)).unwrap();
            let adapted = model.adapted_to(&data);
            let s_obs = adapted.summarize(&data).unwrap();
            let start = crate::models::ricker_crude_start(&data);
            let est =
                max_synthetic_likelihood(&*adapted, &s_obs, &cfg, &start, 7000 + trial).unwrap();
            if (est[0] - 3.8).abs() < 0.6 {
                hits += 1;
            }
        }
        assert!(hits >= 14, "only {hits}/{trials} within the band");
    }
}
