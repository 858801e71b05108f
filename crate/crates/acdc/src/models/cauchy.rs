//! Cauchy location/scale models with robust summaries.
//!
//! The sample mean of i.i.d. Cauchy data is Cauchy with the same scale
//! (stable law), and a single order statistic can be drawn through a Beta
//! variate, so the mean and median summaries have exact one-draw shortcuts;
//! MAD-based summaries simulate the full dataset.

use rand::RngCore;
use rand_distr::Distribution;

use crate::core::{stats, Dataset, GenerativeModel, ParameterPoint, SummaryVector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CauchyParameterization {
    /// Unknown location, known scale.
    Location { scale: f64 },
    /// Unknown scale, known location.
    Scale { location: f64 },
    /// Unknown (location, scale).
    Joint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CauchySummary {
    Mean,
    Median,
    Mad,
    MedianMad,
}

impl CauchySummary {
    pub fn dim(&self) -> usize {
        match self {
            CauchySummary::MedianMad => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CauchyModel {
    pub n: usize,
    pub parameterization: CauchyParameterization,
    pub summary: CauchySummary,
}

impl CauchyModel {
    pub fn new(n: usize, parameterization: CauchyParameterization, summary: CauchySummary) -> Self {
        Self {
            n,
            parameterization,
            summary,
        }
    }

    fn location_scale(&self, theta: &ParameterPoint) -> Result<(f64, f64)> {
        let (loc, scale) = match self.parameterization {
            CauchyParameterization::Location { scale } => {
                if theta.dim() != 1 {
                    return Err(dim_error(1, theta.dim()));
                }
                (theta[0], scale)
            }
            CauchyParameterization::Scale { location } => {
                if theta.dim() != 1 {
                    return Err(dim_error(1, theta.dim()));
                }
                (location, theta[0])
            }
            CauchyParameterization::Joint => {
                if theta.dim() != 2 {
                    return Err(dim_error(2, theta.dim()));
                }
                (theta[0], theta[1])
            }
        };
        if !(scale > 0.0) {
            return Err(Error::DomainViolation(format!("Cauchy scale {scale} <= 0")));
        }
        Ok((loc, scale))
    }
}

fn dim_error(expected: usize, got: usize) -> Error {
    Error::DimensionMismatch {
        expected,
        got,
        context: "Cauchy model parameter".into(),
    }
}

impl GenerativeModel for CauchyModel {
    fn parameter_dim(&self) -> usize {
        match self.parameterization {
            CauchyParameterization::Joint => 2,
            _ => 1,
        }
    }

    fn summary_dim(&self) -> usize {
        self.summary.dim()
    }

    fn simulate(&self, theta: &ParameterPoint, rng: &mut dyn RngCore) -> Result<Dataset> {
        let (loc, scale) = self.location_scale(theta)?;
        let cauchy = rand_distr::Cauchy::new(loc, scale).expect("validated scale");
        Dataset::new((0..self.n).map(|_| cauchy.sample(&mut *rng)).collect())
    }

    fn summarize(&self, data: &Dataset) -> Result<SummaryVector> {
        let obs = data.observations();
        match self.summary {
            CauchySummary::Mean => SummaryVector::scalar(stats::mean(obs)),
            CauchySummary::Median => SummaryVector::scalar(stats::median(obs)?),
            CauchySummary::Mad => SummaryVector::scalar(stats::mad(obs)?),
            CauchySummary::MedianMad => {
                SummaryVector::new(vec![stats::median(obs)?, stats::mad(obs)?])
            }
        }
    }

    fn simulate_summary(
        &self,
        theta: &ParameterPoint,
        rng: &mut dyn RngCore,
    ) -> Result<SummaryVector> {
        let (loc, scale) = self.location_scale(theta)?;
        match self.summary {
            // stable law: the mean of n i.i.d. Cauchy(loc, scale) is again
            // Cauchy(loc, scale), for every n
            CauchySummary::Mean => {
                let cauchy = rand_distr::Cauchy::new(loc, scale).expect("validated scale");
                SummaryVector::scalar(cauchy.sample(&mut *rng))
            }
            // the lower-middle order statistic X_(k), k = ceil(n/2), arises
            // from the Beta(k, n - k + 1) quantile of the Cauchy CDF
            CauchySummary::Median => {
                let k = self.n.div_ceil(2);
                let beta = rand_distr::Beta::new(k as f64, (self.n - k + 1) as f64)
                    .expect("positive shape parameters");
                let u: f64 = beta.sample(&mut *rng);
                let u = u.clamp(1e-16, 1.0 - 1e-16);
                SummaryVector::scalar(loc + scale * (std::f64::consts::PI * (u - 0.5)).tan())
            }
            _ => {
                let data = self.simulate(theta, rng)?;
                self.summarize(&data)
            }
        }
    }

    fn adapted_to(&self, data: &Dataset) -> Box<dyn GenerativeModel> {
        Box::new(CauchyModel {
            n: data.n(),
            ..*self
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::substream;

    #[test]
    fn median_concentrates_at_location() {
        // median sd ~ pi tau / (2 sqrt(n)) ~ 0.0432 at n = 400, tau = 0.55;
        // the 0.25 band is almost 6 sigma
        let model = CauchyModel::new(
            400,
            CauchyParameterization::Location { scale: 0.55 },
            CauchySummary::Median,
        );
        let theta = ParameterPoint::scalar(10.0).unwrap();
        let mut hits = 0;
        for i in 0..100 {
            let mut rng = substream(7, i);
            let data = model.simulate(&theta, &mut rng).unwrap();
            let med = model.summarize(&data).unwrap()[0];
            if (med - 10.0).abs() < 0.25 {
                hits += 1;
            }
        }
        assert!(hits >= 99, "only {hits}/100 inside the band");
    }

    #[test]
    fn invalid_scale_is_domain_violation() {
        let model = CauchyModel::new(
            10,
            CauchyParameterization::Scale { location: 0.0 },
            CauchySummary::Mad,
        );
        let theta = ParameterPoint::scalar(-1.0).unwrap();
        let mut rng = substream(1, 0);
        assert!(matches!(
            model.simulate(&theta, &mut rng),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn mean_shortcut_matches_full_simulation_in_law() {
        let model = CauchyModel::new(
            50,
            CauchyParameterization::Location { scale: 0.55 },
            CauchySummary::Mean,
        );
        let theta = ParameterPoint::scalar(2.0).unwrap();
        let m = 6000u64;
        let shortcut: Vec<f64> = (0..m)
            .map(|i| {
                let mut rng = substream(300, i);
                model.simulate_summary(&theta, &mut rng).unwrap()[0]
            })
            .collect();
        let full: Vec<f64> = (0..m)
            .map(|i| {
                let mut rng = substream(400, i);
                let data = model.simulate(&theta, &mut rng).unwrap();
                model.summarize(&data).unwrap()[0]
            })
            .collect();
        let d = stats::two_sample_ks(&shortcut, &full).unwrap();
        let crit = stats::ks_critical_value(m as usize, m as usize, 0.001);
        assert!(d < crit, "KS {d} exceeds {crit}");
    }

    #[test]
    fn median_shortcut_matches_full_simulation_in_law() {
        for n in [51usize, 80] {
            let model = CauchyModel::new(
                n,
                CauchyParameterization::Location { scale: 0.55 },
                CauchySummary::Median,
            );
            let theta = ParameterPoint::scalar(-1.0).unwrap();
            let m = 6000u64;
            let shortcut: Vec<f64> = (0..m)
                .map(|i| {
                    let mut rng = substream(500, i);
                    model.simulate_summary(&theta, &mut rng).unwrap()[0]
                })
                .collect();
            let full: Vec<f64> = (0..m)
                .map(|i| {
                    let mut rng = substream(600, i);
                    let data = model.simulate(&theta, &mut rng).unwrap();
                    model.summarize(&data).unwrap()[0]
                })
                .collect();
            let d = stats::two_sample_ks(&shortcut, &full).unwrap();
            let crit = stats::ks_critical_value(m as usize, m as usize, 0.001);
            assert!(d < crit, "n={n}: KS {d} exceeds {crit}");
        }
    }

    #[test]
    fn joint_summary_has_two_components() {
        let model = CauchyModel::new(40, CauchyParameterization::Joint, CauchySummary::MedianMad);
        let theta = ParameterPoint::new(vec![3.0, 0.7]).unwrap();
        let mut rng = substream(2, 0);
        let s = model.simulate_summary(&theta, &mut rng).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s[1] > 0.0);
    }
}
