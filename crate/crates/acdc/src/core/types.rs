//! Domain types shared across the inference pipeline.

use rand::RngCore;

use crate::error::{Error, Result};

/// A point in the parameter space, a dense vector of length `p >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterPoint {
    values: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("ParameterPoint".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ParameterPoint".into()));
        }
        Ok(Self { values })
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl std::ops::Index<usize> for ParameterPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// A summary statistic vector of length `d >= 1` (`p <= d`).
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryVector {
    values: Vec<f64>,
}

impl SummaryVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("SummaryVector".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SummaryVector".into()));
        }
        Ok(Self { values })
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Componentwise difference `self - other`.
    pub fn diff(&self, other: &SummaryVector) -> Result<Vec<f64>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: other.dim(),
                got: self.dim(),
                context: "summary difference".into(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect())
    }
}

impl std::ops::Index<usize> for SummaryVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// An ordered sample of scalar observations.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    observations: Vec<f64>,
}

impl Dataset {
    pub fn new(observations: Vec<f64>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyInput("Dataset".into()));
        }
        Ok(Self { observations })
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    /// The contiguous slice `[start, start + len)` as a new dataset.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n() {
            return Err(Error::InvalidConfig(format!(
                "window [{start}, {}) exceeds dataset length {}",
                start + len,
                self.n()
            )));
        }
        Self::new(self.observations[start..start + len].to_vec())
    }

    /// The observations at the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.observations[i]).collect())
    }
}

/// One retained draw: parameter, its simulated summary, and a weight.
///
/// Pure accept-reject output carries unit weights; importance-sampling
/// output carries unnormalized ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub theta: ParameterPoint,
    pub summary: SummaryVector,
    pub weight: f64,
}

/// The retained sample of an accept-reject or importance-sampling run,
/// together with the number of proposals it took to produce it.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    pub attempts: u64,
    /// The tolerance actually in force: the kernel tolerance for
    /// fixed-epsilon runs, the achieved distance threshold for
    /// fixed-acceptance-proportion runs.
    pub tolerance: f64,
    /// Whether the thetas have been regression-adjusted.
    pub adjusted: bool,
}

impl ParticleSet {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn acceptance_proportion(&self) -> f64 {
        self.particles.len() as f64 / self.attempts as f64
    }

    pub fn total_weight(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// Effective sample size `(sum w)^2 / sum w^2` of the importance weights.
    pub fn effective_sample_size(&self) -> f64 {
        let s1: f64 = self.particles.iter().map(|p| p.weight).sum();
        let s2: f64 = self.particles.iter().map(|p| p.weight * p.weight).sum();
        if s2 == 0.0 {
            0.0
        } else {
            s1 * s1 / s2
        }
    }

    /// Weight-averaged parameter, `sum w_i theta_i / sum w_i`.
    pub fn weighted_mean(&self) -> Result<ParameterPoint> {
        if self.is_empty() {
            return Err(Error::EmptyInput("weighted_mean of empty ParticleSet".into()));
        }
        let total = self.total_weight();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateSample(format!(
                "total particle weight {total} is not positive and finite"
            )));
        }
        let p = self.particles[0].theta.dim();
        let mut acc = vec![0.0; p];
        for particle in &self.particles {
            for (a, v) in acc.iter_mut().zip(particle.theta.values()) {
                *a += particle.weight * v;
            }
        }
        for a in &mut acc {
            *a /= total;
        }
        ParameterPoint::new(acc)
    }

    /// Weighted variance of each theta coordinate (weights as probabilities).
    pub fn weighted_variance(&self) -> Result<Vec<f64>> {
        let mean = self.weighted_mean()?;
        let total = self.total_weight();
        let p = mean.dim();
        let mut acc = vec![0.0; p];
        for particle in &self.particles {
            for j in 0..p {
                let d = particle.theta[j] - mean[j];
                acc[j] += particle.weight * d * d;
            }
        }
        for a in &mut acc {
            *a /= total;
        }
        Ok(acc)
    }

    /// The j-th theta coordinate of every particle, in particle order.
    pub fn theta_column(&self, j: usize) -> Vec<f64> {
        self.particles.iter().map(|p| p.theta[j]).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }
}

/// A simulable model with a summary statistic: the contract the samplers
/// drive.
///
/// `simulate_summary` exists so models whose summary has a known exact
/// sampling law (e.g. stable laws, order statistics) can skip materializing
/// a full dataset per proposal; it must sample from exactly the same
/// distribution as `summarize(simulate(theta))`.
pub trait GenerativeModel: Send + Sync {
    fn parameter_dim(&self) -> usize;

    fn summary_dim(&self) -> usize;

    fn simulate(&self, theta: &ParameterPoint, rng: &mut dyn RngCore) -> Result<Dataset>;

    fn summarize(&self, data: &Dataset) -> Result<SummaryVector>;

    fn simulate_summary(
        &self,
        theta: &ParameterPoint,
        rng: &mut dyn RngCore,
    ) -> Result<SummaryVector> {
        let data = self.simulate(theta, rng)?;
        self.summarize(&data)
    }

    /// A copy of this model configured to analyze datasets shaped like
    /// `data` (sample size, any data-derived summary context). Used when the
    /// pipeline works on subsets of the observations.
    fn adapted_to(&self, data: &Dataset) -> Box<dyn GenerativeModel>;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle(theta: f64, weight: f64) -> Particle {
        Particle {
            theta: ParameterPoint::scalar(theta).unwrap(),
            summary: SummaryVector::scalar(0.0).unwrap(),
            weight,
        }
    }

    fn set(particles: Vec<Particle>) -> ParticleSet {
        ParticleSet {
            attempts: particles.len() as u64,
            particles,
            tolerance: 1.0,
            adjusted: false,
        }
    }

    #[test]
    fn weighted_mean_unit_weights() {
        let s = set(vec![particle(1.0, 1.0), particle(3.0, 1.0)]);
        assert_eq!(s.weighted_mean().unwrap()[0], 2.0);
    }

    #[test]
    fn weighted_mean_hand_computed() {
        // (3*1 + 1*5) / 4 = 2
        let s = set(vec![particle(1.0, 3.0), particle(5.0, 1.0)]);
        assert_eq!(s.weighted_mean().unwrap()[0], 2.0);
    }

    #[test]
    fn weighted_mean_singleton() {
        let s = set(vec![particle(7.0, 0.2)]);
        assert_eq!(s.weighted_mean().unwrap()[0], 7.0);
    }

    #[test]
    fn weighted_mean_rejects_zero_weights() {
        let s = set(vec![particle(1.0, 0.0), particle(2.0, 0.0)]);
        assert!(matches!(
            s.weighted_mean(),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn weighted_mean_invariant_to_rescaling() {
        let s1 = set(vec![particle(1.0, 0.5), particle(4.0, 1.5), particle(-2.0, 1.0)]);
        let s2 = set(
            s1.particles
                .iter()
                .map(|p| Particle {
                    weight: p.weight * 37.5,
                    ..p.clone()
                })
                .collect(),
        );
        let m1 = s1.weighted_mean().unwrap();
        let m2 = s2.weighted_mean().unwrap();
        assert!((m1[0] - m2[0]).abs() < 1e-14);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(ParameterPoint::new(vec![f64::NAN]).is_err());
        assert!(SummaryVector::new(vec![f64::INFINITY]).is_err());
    }
}
