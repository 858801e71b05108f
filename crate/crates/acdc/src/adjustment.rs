//! Post-hoc linear regression adjustment of particle sets.
//!
//! Fits the weighted linear model `theta_i = alpha + beta (s_i - s_obs) + e_i`
//! over accepted particles and replaces each theta by
//! `theta_i - beta_hat (s_i - s_obs)`, removing the linear dependence of the
//! accepted parameters on the summary discrepancy so that valid inference
//! survives larger tolerances.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::core::{ParameterPoint, ParticleSet, SummaryVector};
use crate::error::{Error, Result};

/// Condition number beyond which the normal matrix is treated as
/// near-singular.
const CONDITION_LIMIT: f64 = 1e10;

/// A fitted local-linear relation between parameters and summary
/// discrepancies.
#[derive(Clone, Debug)]
pub struct RegressionFit {
    /// Weighted-least-squares intercept, length p.
    pub intercept: DVector<f64>,
    /// Slope matrix, p x d.
    pub slope: DMatrix<f64>,
    /// Weighted residual variance per parameter coordinate.
    pub residual_variance: Vec<f64>,
    /// Whether a ridge term was added to a near-singular normal matrix.
    pub ridged: bool,
}

impl RegressionFit {
    pub fn parameter_dim(&self) -> usize {
        self.slope.nrows()
    }

    pub fn summary_dim(&self) -> usize {
        self.slope.ncols()
    }
}

/// Weighted least squares of particle thetas on centered summary
/// differences `s_i - s_obs`. With `allow_ridge`, a near-singular normal
/// matrix gets a ridge term `1e-8 * trace / d` instead of failing; exactly
/// degenerate columns (no variation at all) are an error either way.
pub fn fit_local_linear(
    particles: &ParticleSet,
    s_obs: &SummaryVector,
    allow_ridge: bool,
) -> Result<RegressionFit> {
    let n = particles.len();
    if n == 0 {
        return Err(Error::EmptyInput("regression over empty particle set".into()));
    }
    let d = s_obs.dim();
    let p = particles.particles[0].theta.dim();
    if n <= d + 1 {
        return Err(Error::InvalidConfig(format!(
            "need more than d + 1 = {} particles to fit the adjustment, got {n}",
            d + 1
        )));
    }

    let total_weight = particles.total_weight();
    if !(total_weight > 0.0) {
        return Err(Error::DegenerateSample("all regression weights zero".into()));
    }

    // Weighted means of the centered design and the response.
    let mut mean_c = DVector::zeros(d);
    let mut mean_t = DVector::zeros(p);
    for particle in &particles.particles {
        let c = particle.summary.diff(s_obs)?;
        for j in 0..d {
            mean_c[j] += particle.weight * c[j];
        }
        for j in 0..p {
            mean_t[j] += particle.weight * particle.theta[j];
        }
    }
    mean_c /= total_weight;
    mean_t /= total_weight;

    // Weighted second moments about the means.
    let mut css: DMatrix<f64> = DMatrix::zeros(d, d);
    let mut cst: DMatrix<f64> = DMatrix::zeros(d, p);
    for particle in &particles.particles {
        let c = particle.summary.diff(s_obs)?;
        for r in 0..d {
            let cr = c[r] - mean_c[r];
            for col in 0..d {
                css[(r, col)] += particle.weight * cr * (c[col] - mean_c[col]);
            }
            for col in 0..p {
                cst[(r, col)] += particle.weight * cr * (particle.theta[col] - mean_t[col]);
            }
        }
    }

    // Summary components live on wildly different scales (autocovariances
    // versus regression coefficients), so the normal equations are solved on
    // per-column standardized differences and the slope is unscaled at the
    // end. A column is degenerate only relative to its own magnitude.
    let dead: Vec<usize> = (0..d)
        .filter(|&j| {
            let sd = (css[(j, j)] / total_weight).sqrt();
            sd <= 1e-14 * (1.0 + mean_c[j].abs() + s_obs[j].abs())
        })
        .collect();
    if !dead.is_empty() {
        return Err(Error::SingularDesign {
            columns: dead,
            context: "summary columns with (near-)zero variation across particles".into(),
        });
    }

    let col_scale: Vec<f64> = (0..d).map(|j| (css[(j, j)] / total_weight).sqrt()).collect();
    let mut css_std = DMatrix::zeros(d, d);
    let mut cst_std = DMatrix::zeros(d, p);
    for r in 0..d {
        for c in 0..d {
            css_std[(r, c)] = css[(r, c)] / (col_scale[r] * col_scale[c]);
        }
        for c in 0..p {
            cst_std[(r, c)] = cst[(r, c)] / col_scale[r];
        }
    }

    let eigen = css_std.clone().symmetric_eigen();
    let max_ev = eigen.eigenvalues.amax();
    let min_ev = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min_ev > 0.0 { max_ev / min_ev } else { f64::INFINITY };

    let mut ridged = false;
    if !(condition <= CONDITION_LIMIT) {
        if !allow_ridge {
            return Err(Error::SingularDesign {
                columns: (0..d).collect(),
                context: format!("normal matrix condition number {condition:.3e}"),
            });
        }
        let lambda = 1e-8 * css_std.trace() / d as f64;
        for j in 0..d {
            css_std[(j, j)] += lambda;
        }
        ridged = true;
        log::warn!(
            "near-singular adjustment design (condition {condition:.3e}); \
             added ridge {lambda:.3e}"
        );
    }

    let chol = match Cholesky::new(css_std.clone()) {
        Some(c) => c,
        None => {
            if !allow_ridge {
                return Err(Error::SingularDesign {
                    columns: (0..d).collect(),
                    context: "normal matrix is not positive definite".into(),
                });
            }
            let lambda = 1e-6 * css_std.trace().max(1e-300) / d as f64;
            for j in 0..d {
                css_std[(j, j)] += lambda;
            }
            ridged = true;
            Cholesky::new(css_std).ok_or_else(|| Error::SingularDesign {
                columns: (0..d).collect(),
                context: "normal matrix not positive definite even after ridging".into(),
            })?
        }
    };

    // solve on the standardized scale, then unscale: beta_j = x_j / scale_j
    let beta_std = chol.solve(&cst_std);
    let mut slope = DMatrix::zeros(p, d);
    for r in 0..p {
        for c in 0..d {
            slope[(r, c)] = beta_std[(c, r)] / col_scale[c];
        }
    }
    let intercept = &mean_t - &slope * &mean_c;

    let mut residual_variance = vec![0.0; p];
    for particle in &particles.particles {
        let c = DVector::from_vec(particle.summary.diff(s_obs)?);
        let fitted = &intercept + &slope * &c;
        for j in 0..p {
            let r = particle.theta[j] - fitted[j];
            residual_variance[j] += particle.weight * r * r;
        }
    }
    for v in &mut residual_variance {
        *v /= total_weight;
    }

    Ok(RegressionFit {
        intercept,
        slope,
        residual_variance,
        ridged,
    })
}

/// Replace each particle's theta by `theta_i - beta_hat (s_i - s_obs)`.
/// Summaries, weights, attempt counts and tolerance are preserved; the
/// output is flagged as adjusted.
pub fn regression_adjust(
    particles: &ParticleSet,
    fit: &RegressionFit,
    s_obs: &SummaryVector,
) -> Result<ParticleSet> {
    if particles.is_empty() {
        return Err(Error::EmptyInput("adjustment of empty particle set".into()));
    }
    let p = particles.particles[0].theta.dim();
    if fit.parameter_dim() != p || fit.summary_dim() != s_obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: fit.parameter_dim(),
            context: format!(
                "regression fit is {} x {}, particles are p={p}, d={}",
                fit.parameter_dim(),
                fit.summary_dim(),
                s_obs.dim()
            ),
        });
    }
    let mut adjusted = particles.clone();
    for particle in &mut adjusted.particles {
        let c = DVector::from_vec(particle.summary.diff(s_obs)?);
        let shift = &fit.slope * &c;
        let new_theta: Vec<f64> = (0..p).map(|j| particle.theta[j] - shift[j]).collect();
        particle.theta = ParameterPoint::new(new_theta)?;
    }
    adjusted.adjusted = true;
    Ok(adjusted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Particle;
    use approx::assert_relative_eq;

    fn make_set(thetas: &[f64], diffs: &[f64], s_obs: f64, weights: Option<&[f64]>) -> (ParticleSet, SummaryVector) {
        let particles = thetas
            .iter()
            .zip(diffs)
            .enumerate()
            .map(|(i, (&t, &c))| Particle {
                theta: ParameterPoint::scalar(t).unwrap(),
                summary: SummaryVector::scalar(s_obs + c).unwrap(),
                weight: weights.map_or(1.0, |w| w[i]),
            })
            .collect::<Vec<_>>();
        (
            ParticleSet {
                attempts: particles.len() as u64,
                particles,
                tolerance: 1.0,
                adjusted: false,
            },
            SummaryVector::scalar(s_obs).unwrap(),
        )
    }

    #[test]
    fn three_point_hand_fit() {
        let (set, s_obs) = make_set(&[1.0, 2.0, 3.0], &[-1.0, 0.0, 1.0], 0.5, None);
        let fit = fit_local_linear(&set, &s_obs, false).unwrap();
        assert_relative_eq!(fit.slope[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept[0], 2.0, epsilon = 1e-12);

        let adjusted = regression_adjust(&set, &fit, &s_obs).unwrap();
        for p in &adjusted.particles {
            assert_relative_eq!(p.theta[0], 2.0, epsilon = 1e-12);
        }
        assert!(adjusted.adjusted);
        assert_eq!(adjusted.tolerance, set.tolerance);
    }

    #[test]
    fn all_summaries_equal_s_obs_is_singular() {
        let (set, s_obs) = make_set(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0], 0.5, None);
        match fit_local_linear(&set, &s_obs, true) {
            Err(Error::SingularDesign { columns, .. }) => assert_eq!(columns, vec![0]),
            other => panic!("expected singular design, got {other:?}"),
        }
    }

    #[test]
    fn constant_response_gives_zero_slope() {
        let (set, s_obs) = make_set(&[4.0, 4.0, 4.0, 4.0], &[-1.0, 0.0, 0.5, 1.0], 0.0, None);
        let fit = fit_local_linear(&set, &s_obs, false).unwrap();
        assert_relative_eq!(fit.slope[(0, 0)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_slope_fit_is_identity() {
        let (set, s_obs) = make_set(&[1.0, 5.0, 3.0], &[-1.0, 0.0, 1.0], 0.0, None);
        let fit = RegressionFit {
            intercept: DVector::from_vec(vec![3.0]),
            slope: DMatrix::zeros(1, 1),
            residual_variance: vec![0.0],
            ridged: false,
        };
        let adjusted = regression_adjust(&set, &fit, &s_obs).unwrap();
        for (a, b) in adjusted.particles.iter().zip(&set.particles) {
            assert_eq!(a.theta, b.theta);
        }
        assert!(adjusted.adjusted);
    }

    #[test]
    fn exact_linear_relation_collapses_to_intercept() {
        let diffs = [-2.0, -0.5, 0.0, 1.0, 1.75];
        let thetas: Vec<f64> = diffs.iter().map(|c| 5.0 + 2.0 * c).collect();
        let (set, s_obs) = make_set(&thetas, &diffs, 1.0, None);
        let fit = fit_local_linear(&set, &s_obs, false).unwrap();
        let adjusted = regression_adjust(&set, &fit, &s_obs).unwrap();
        for p in &adjusted.particles {
            assert_relative_eq!(p.theta[0], 5.0, epsilon = 1e-10);
        }
        let var = adjusted.weighted_variance().unwrap()[0];
        assert!(var < 1e-20, "residual variance {var}");
    }

    #[test]
    fn weighted_fit_honors_weights() {
        // Heavy weight on a pair of points lying on theta = 1 + 3 c; the
        // light third point barely moves the fit.
        let (set, s_obs) = make_set(
            &[4.0, -2.0, 100.0],
            &[1.0, -1.0, 0.0],
            0.0,
            Some(&[1e6, 1e6, 1e-6]),
        );
        let fit = fit_local_linear(&set, &s_obs, false).unwrap();
        assert_relative_eq!(fit.slope[(0, 0)], 3.0, epsilon = 1e-3);
        assert_relative_eq!(fit.intercept[0], 1.0, epsilon = 1e-3);
    }

    #[test]
    fn variance_reduction_and_mean_identity() {
        // pseudo-random but fixed data
        let mut thetas = Vec::new();
        let mut diffs = Vec::new();
        let mut weights = Vec::new();
        let mut state = 88172645463325252u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..400 {
            let c = next() - 0.5;
            let noise = next() - 0.5;
            diffs.push(c);
            thetas.push(0.7 * c + 0.3 * noise);
            weights.push(0.25 + next());
        }
        let (set, s_obs) = make_set(&thetas, &diffs, 2.0, Some(&weights));
        let fit = fit_local_linear(&set, &s_obs, false).unwrap();
        let adjusted = regression_adjust(&set, &fit, &s_obs).unwrap();

        let var_before = set.weighted_variance().unwrap()[0];
        let var_after = adjusted.weighted_variance().unwrap()[0];
        assert!(
            var_after <= var_before + 1e-14,
            "{var_after} > {var_before}"
        );

        // weighted mean of the adjusted sample equals the intercept
        let mean_after = adjusted.weighted_mean().unwrap()[0];
        assert_relative_eq!(mean_after, fit.intercept[0], epsilon = 1e-10);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (set, _) = make_set(&[1.0, 2.0, 3.0], &[-1.0, 0.0, 1.0], 0.5, None);
        let fit = RegressionFit {
            intercept: DVector::from_vec(vec![0.0, 0.0]),
            slope: DMatrix::zeros(2, 2),
            residual_variance: vec![0.0, 0.0],
            ridged: false,
        };
        let s_obs2 = SummaryVector::new(vec![0.0, 0.0]).unwrap();
        assert!(regression_adjust(&set, &fit, &s_obs2).is_err());
    }
}
