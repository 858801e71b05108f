//! Unit-variance Gaussian location model and the exact law of its accepted
//! sample under a normal initial distribution and Gaussian kernel.

use rand::RngCore;
use rand_distr::Distribution;

use crate::core::{stats, Dataset, GenerativeModel, ParameterPoint, SummaryVector};
use crate::error::{Error, Result};
use crate::samplers::ProposalDistribution;

/// `n` i.i.d. observations from N(theta, 1); summary is the sample mean.
#[derive(Clone, Copy, Debug)]
pub struct GaussianLocationModel {
    pub n: usize,
}

impl GaussianLocationModel {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl GenerativeModel for GaussianLocationModel {
    fn parameter_dim(&self) -> usize {
        1
    }

    fn summary_dim(&self) -> usize {
        1
    }

    fn simulate(&self, theta: &ParameterPoint, rng: &mut dyn RngCore) -> Result<Dataset> {
        if theta.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: theta.dim(),
                context: "Gaussian location model".into(),
            });
        }
        let normal = rand_distr::Normal::new(theta[0], 1.0).expect("unit sd is valid");
        Dataset::new((0..self.n).map(|_| normal.sample(&mut *rng)).collect())
    }

    fn summarize(&self, data: &Dataset) -> Result<SummaryVector> {
        SummaryVector::scalar(stats::mean(data.observations()))
    }

    /// Exact shortcut: the sample mean of `n` unit-variance normals is
    /// N(theta, 1/n).
    fn simulate_summary(
        &self,
        theta: &ParameterPoint,
        rng: &mut dyn RngCore,
    ) -> Result<SummaryVector> {
        let normal = rand_distr::Normal::new(theta[0], (self.n as f64).sqrt().recip())
            .expect("positive sd");
        SummaryVector::scalar(normal.sample(&mut *rng))
    }

    fn adapted_to(&self, data: &Dataset) -> Box<dyn GenerativeModel> {
        Box::new(GaussianLocationModel { n: data.n() })
    }
}

/// The exact mean and variance of the accepted-parameter law when proposing
/// from N(mu_n, 1/b_n^2) (flat when `b_n = 0`) with a Gaussian kernel at
/// tolerance `eps`:
/// `theta_eps = (s_obs + b_n^2 (1/n + eps^2) mu_n) / (1 + b_n^2 (1/n + eps^2))`,
/// `sigma_eps^2 = (1/n + eps^2) / (1 + b_n^2 (1/n + eps^2))`.
pub fn gaussian_acc_closed_form(
    s_obs: f64,
    n: usize,
    eps: f64,
    mu_n: f64,
    b_n: f64,
) -> (f64, f64) {
    let tau2 = 1.0 / n as f64 + eps * eps;
    let g = b_n * b_n * tau2;
    let theta_eps = (s_obs + g * mu_n) / (1.0 + g);
    let sigma2_eps = tau2 / (1.0 + g);
    (theta_eps, sigma2_eps)
}

/// Normal proposal N(mean, sd^2) with its exact log density.
pub fn normal_proposal(mean: f64, sd: f64) -> Result<ProposalDistribution> {
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::InvalidConfig(format!("normal proposal sd {sd}")));
    }
    let normal = rand_distr::Normal::new(mean, sd).expect("validated sd");
    Ok(ProposalDistribution::new(
        move |rng| ParameterPoint::scalar(normal.sample(&mut *rng)).expect("finite normal draw"),
        move |theta| {
            let z = (theta[0] - mean) / sd;
            -0.5 * z * z - sd.ln()
        },
    ))
}

/// Student-t proposal with four degrees of freedom, given location and
/// scale, with its exact log density.
pub fn t4_proposal(location: f64, scale: f64) -> Result<ProposalDistribution> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidConfig(format!("t4 proposal scale {scale}")));
    }
    let t = rand_distr::StudentT::new(4.0).expect("df 4 is valid");
    Ok(ProposalDistribution::new(
        move |rng| {
            ParameterPoint::scalar(location + scale * t.sample(&mut *rng))
                .expect("finite t draw")
        },
        move |theta| {
            // standard t4 density is 0.375 (1 + z^2/4)^(-5/2)
            let z = (theta[0] - location) / scale;
            0.375f64.ln() - 2.5 * (1.0 + z * z / 4.0).ln() - scale.ln()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::substream;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_flat_zero_tolerance() {
        let (theta, var) = gaussian_acc_closed_form(0.7, 50, 0.0, 3.0, 0.0);
        assert_eq!(theta, 0.7);
        assert_relative_eq!(var, 0.02, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_hand_value() {
        let (theta, var) = gaussian_acc_closed_form(1.0, 100, 0.1, 0.0, 2.0);
        assert_relative_eq!(theta, 0.925926, epsilon = 1e-6);
        assert_relative_eq!(var, 0.0185185, epsilon = 1e-6);
    }

    #[test]
    fn closed_form_wide_tolerance_limit() {
        let (theta, var) = gaussian_acc_closed_form(1.0, 100, 1e6, 0.4, 2.0);
        assert_relative_eq!(theta, 0.4, epsilon = 1e-6);
        assert_relative_eq!(var, 0.25, epsilon = 1e-6);
    }

    #[test]
    fn closed_form_matches_independent_arrangement() {
        // same algebra expanded over a common denominator n + b^2 (1 + n e^2)
        let expanded = |s: f64, n: f64, e: f64, mu: f64, b: f64| {
            let den = n + b * b * (1.0 + n * e * e);
            (
                (n * s + b * b * (1.0 + n * e * e) * mu) / den,
                (1.0 + n * e * e) / den,
            )
        };
        for (s, n, e, mu, b) in [
            (1.0, 100usize, 0.1, 0.0, 2.0),
            (-0.4, 37, 0.03, 1.5, 0.0),
            (2.2, 1000, 0.55, -3.0, 5.0),
            (0.0, 7, 1.0, 0.25, 0.5),
        ] {
            let (t1, v1) = gaussian_acc_closed_form(s, n, e, mu, b);
            let (t2, v2) = expanded(s, n as f64, e, mu, b);
            assert_relative_eq!(t1, t2, epsilon = 1e-12);
            assert_relative_eq!(v1, v2, epsilon = 1e-12);
        }
    }

    #[test]
    fn simulate_clt_band() {
        let model = GaussianLocationModel::new(100_000);
        let mut rng = substream(17, 0);
        let data = model
            .simulate(&ParameterPoint::scalar(0.0).unwrap(), &mut rng)
            .unwrap();
        let mean = stats::mean(data.observations());
        // 5 sigma band: 5 / sqrt(1e5) ~ 0.0158
        assert!(mean.abs() < 0.016, "mean {mean}");
    }

    #[test]
    fn summary_shortcut_matches_full_simulation_in_law() {
        let model = GaussianLocationModel::new(64);
        let theta = ParameterPoint::scalar(0.3).unwrap();
        let m = 4000;
        let shortcut: Vec<f64> = (0..m)
            .map(|i| {
                let mut rng = substream(100, i);
                model.simulate_summary(&theta, &mut rng).unwrap()[0]
            })
            .collect();
        let full: Vec<f64> = (0..m)
            .map(|i| {
                let mut rng = substream(200, i);
                let data = model.simulate(&theta, &mut rng).unwrap();
                model.summarize(&data).unwrap()[0]
            })
            .collect();
        let d = stats::two_sample_ks(&shortcut, &full).unwrap();
        let crit = stats::ks_critical_value(m as usize, m as usize, 0.001);
        assert!(d < crit, "KS {d} exceeds {crit}");
    }

    #[test]
    fn t4_density_normalizes() {
        let prop = t4_proposal(1.0, 2.0).unwrap();
        let (lo, hi, steps) = (-400.0, 400.0, 800_000);
        let h = (hi - lo) / steps as f64;
        let mut total = 0.0;
        for i in 0..steps {
            let x = lo + (i as f64 + 0.5) * h;
            total += prop
                .log_density(&ParameterPoint::scalar(x).unwrap())
                .exp()
                * h;
        }
        assert!((total - 1.0).abs() < 1e-3, "integral {total}");
    }
}
