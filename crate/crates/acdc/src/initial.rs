//! Construction of data-dependent initial distributions `r_n(theta)`:
//! canonical improper forms, the minibatch scheme, and its population Monte
//! Carlo refinement.
//!
//! The minibatch scheme computes a cheap point estimate on each of `k`
//! subsets of the observations (size `floor(n^nu)`) and returns a kernel
//! density estimate over those estimates. The refined variant replaces each
//! crude subset estimate with an approximation of the flat-prior posterior
//! mean given the subset's summary, obtained by population Monte Carlo
//! proposing initially from the crude estimate.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::core::{derive_seed, stats, substream, Dataset, GenerativeModel, ParameterPoint};
use crate::error::{Error, Result};
use crate::samplers::{pilot_calibration, pmc_refine, ProposalDistribution};

/// Product-Gaussian kernel density estimate over point estimates, with one
/// bandwidth per coordinate.
#[derive(Clone, Debug)]
pub struct KdeEstimate {
    centers: Vec<ParameterPoint>,
    bandwidth: Vec<f64>,
}

impl KdeEstimate {
    pub fn new(centers: Vec<ParameterPoint>, bandwidth: Vec<f64>) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "kernel density estimate needs at least 2 centers, got {}",
                centers.len()
            )));
        }
        let p = centers[0].dim();
        if centers.iter().any(|c| c.dim() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: 0,
                context: "KDE centers of mixed dimension".into(),
            });
        }
        if bandwidth.len() != p || bandwidth.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidConfig(
                "KDE bandwidth must be positive per coordinate".into(),
            ));
        }
        Ok(Self { centers, bandwidth })
    }

    /// KDE with Silverman's-rule bandwidths.
    pub fn from_centers(centers: Vec<ParameterPoint>) -> Result<Self> {
        let bandwidth = kde_bandwidth(&centers)?;
        Self::new(centers, bandwidth)
    }

    pub fn centers(&self) -> &[ParameterPoint] {
        &self.centers
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let p = self.dim();
        if theta.len() != p {
            return f64::NEG_INFINITY;
        }
        let log_k = (self.centers.len() as f64).ln();
        let log_norm: f64 = self
            .bandwidth
            .iter()
            .map(|h| -(h * (2.0 * std::f64::consts::PI).sqrt()).ln())
            .sum();
        let mut best = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(self.centers.len());
        for c in &self.centers {
            let mut quad = 0.0;
            for j in 0..p {
                let z = (theta[j] - c[j]) / self.bandwidth[j];
                quad += z * z;
            }
            let t = log_norm - 0.5 * quad;
            best = best.max(t);
            terms.push(t);
        }
        best + terms.iter().map(|t| (t - best).exp()).sum::<f64>().ln() - log_k
    }

    pub fn density(&self, theta: &[f64]) -> f64 {
        self.log_density(theta).exp()
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> ParameterPoint {
        let i = rng.random_range(0..self.centers.len());
        let center = &self.centers[i];
        let values: Vec<f64> = (0..self.dim())
            .map(|j| {
                let z: f64 =
                    rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut *rng);
                center[j] + self.bandwidth[j] * z
            })
            .collect();
        ParameterPoint::new(values).expect("KDE draw is finite")
    }

    /// Marginal standard deviation per coordinate (center spread plus
    /// bandwidth).
    pub fn marginal_sd(&self) -> Vec<f64> {
        let k = self.centers.len() as f64;
        (0..self.dim())
            .map(|j| {
                let col: Vec<f64> = self.centers.iter().map(|c| c[j]).collect();
                let mean = stats::mean(&col);
                let var_pop = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
                (var_pop + self.bandwidth[j] * self.bandwidth[j]).sqrt()
            })
            .collect()
    }

    pub fn to_proposal(&self) -> ProposalDistribution {
        let kde = Arc::new(self.clone());
        let sampler_kde = Arc::clone(&kde);
        ProposalDistribution::new(
            move |rng| sampler_kde.sample(rng),
            move |theta| kde.log_density(theta.values()),
        )
    }
}

/// Silverman's rule per coordinate:
/// `h_j = 0.9 min(sd_j, IQR_j / 1.34) k^(-1/5)`, floored at
/// `1e-8 (1 + |median_j|)` so degenerate center sets stay usable.
pub fn kde_bandwidth(centers: &[ParameterPoint]) -> Result<Vec<f64>> {
    if centers.len() < 2 {
        return Err(Error::InvalidConfig(
            "bandwidth rule needs at least 2 centers".into(),
        ));
    }
    let k = centers.len() as f64;
    let p = centers[0].dim();
    (0..p)
        .map(|j| {
            let col: Vec<f64> = centers.iter().map(|c| c[j]).collect();
            let sd = stats::sample_sd(&col);
            let iqr = stats::interquartile_range(&col)?;
            let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
            let h = 0.9 * spread * k.powf(-0.2);
            let floor = 1e-8 * (1.0 + stats::median(&col)?.abs());
            Ok(h.max(floor))
        })
        .collect()
}

/// How subsets are drawn from the observations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlapPolicy {
    /// Random partition into blocks of size `floor(n^nu)`; each observation
    /// is used at most once.
    Disjoint,
    /// Sliding windows of size `floor(n^nu)` starting every `stride`
    /// observations.
    Overlapping { stride: usize },
}

pub type PointEstimator = Arc<dyn Fn(&Dataset) -> Result<ParameterPoint> + Send + Sync>;

#[derive(Clone)]
pub struct MinibatchConfig {
    /// Subset-size exponent `nu`: subsets have size `floor(n^nu)`.
    pub exponent: f64,
    /// Number of subsets; derived from `n` and the policy when absent.
    pub batches: Option<usize>,
    pub policy: OverlapPolicy,
    pub estimator: PointEstimator,
}

impl MinibatchConfig {
    pub fn new(exponent: f64, policy: OverlapPolicy, estimator: PointEstimator) -> Self {
        Self {
            exponent,
            batches: None,
            policy,
            estimator,
        }
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = Some(batches);
        self
    }

    fn subset_indices(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<usize>>> {
        if !(self.exponent > 0.0 && self.exponent < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "subset exponent must lie in (0,1), got {}",
                self.exponent
            )));
        }
        if self.exponent >= 0.6 {
            log::warn!(
                "subset exponent {} is at or above 3/5; the initial distribution may \
                 concentrate as fast as the summary likelihood",
                self.exponent
            );
        }
        if n < 4 {
            return Err(Error::InvalidConfig(format!("need n >= 4 observations, got {n}")));
        }
        let m = (n as f64).powf(self.exponent).floor() as usize;
        if m < 2 {
            return Err(Error::InvalidConfig(format!(
                "subset size floor(n^nu) = {m} is below 2"
            )));
        }
        let subsets: Vec<Vec<usize>> = match self.policy {
            OverlapPolicy::Disjoint => {
                let k = self.batches.unwrap_or(n / m);
                if k * m > n {
                    return Err(Error::InvalidConfig(format!(
                        "{k} disjoint subsets of size {m} need {} observations, have {n}",
                        k * m
                    )));
                }
                let mut indices: Vec<usize> = (0..n).collect();
                indices.shuffle(rng);
                indices.chunks(m).take(k).map(|c| c.to_vec()).collect()
            }
            OverlapPolicy::Overlapping { stride } => {
                if stride == 0 {
                    return Err(Error::InvalidConfig("window stride must be positive".into()));
                }
                let available = if n >= m { (n - m) / stride + 1 } else { 0 };
                let k = self.batches.unwrap_or(available);
                if k > available {
                    return Err(Error::InvalidConfig(format!(
                        "{k} windows of size {m} at stride {stride} exceed the {available} available"
                    )));
                }
                (0..k).map(|i| (i * stride..i * stride + m).collect()).collect()
            }
        };
        if subsets.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "minibatch scheme needs at least 2 subsets, got {}",
                subsets.len()
            )));
        }
        Ok(subsets)
    }
}

/// The minibatch scheme: point estimates over data subsets, smoothed into a
/// kernel density estimate.
pub fn minibatch_rn(
    data: &Dataset,
    cfg: &MinibatchConfig,
    rng: &mut dyn RngCore,
) -> Result<KdeEstimate> {
    let subsets = cfg.subset_indices(data.n(), rng)?;
    let centers = subset_estimates(data, &subsets, &cfg.estimator)?;
    KdeEstimate::from_centers(centers)
}

fn subset_estimates(
    data: &Dataset,
    subsets: &[Vec<usize>],
    estimator: &PointEstimator,
) -> Result<Vec<ParameterPoint>> {
    subsets
        .par_iter()
        .enumerate()
        .map(|(index, indices)| {
            let subset = data.select(indices)?;
            estimator(&subset).map_err(|e| Error::SubsetEstimator {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Settings for the population Monte Carlo refinement of subset estimates.
#[derive(Clone, Copy, Debug)]
pub struct PmcConfig {
    pub particles_per_iter: usize,
    pub iterations: usize,
    /// Acceptance quantile of the pilot distances used for the first
    /// tolerance.
    pub first_level: f64,
    /// Quantile for the last tolerance; intermediate levels are spaced
    /// geometrically.
    pub last_level: f64,
}

impl Default for PmcConfig {
    fn default() -> Self {
        Self {
            particles_per_iter: 400,
            iterations: 4,
            first_level: 0.5,
            last_level: 0.05,
        }
    }
}

impl PmcConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations > 0 && self.particles_per_iter == 0 {
            return Err(Error::InvalidConfig("zero particles per iteration".into()));
        }
        if !(self.last_level > 0.0 && self.first_level < 1.0 && self.last_level < self.first_level)
        {
            return Err(Error::InvalidConfig(format!(
                "quantile levels must satisfy 0 < last {} < first {} < 1",
                self.last_level, self.first_level
            )));
        }
        Ok(())
    }

    fn levels(&self) -> Vec<f64> {
        if self.iterations == 1 {
            return vec![self.last_level];
        }
        let t_max = (self.iterations - 1) as f64;
        let ratio = self.last_level / self.first_level;
        (0..self.iterations)
            .map(|t| self.first_level * ratio.powf(t as f64 / t_max))
            .collect()
    }
}

/// The refined minibatch scheme: build the crude minibatch estimate first,
/// then replace each subset's center by the population-Monte-Carlo estimate
/// of the flat-prior posterior mean given that subset's summary, proposing
/// initially from the crude estimate. Subsets whose refinement degenerates
/// keep their crude center.
pub fn refined_minibatch_rn(
    data: &Dataset,
    cfg: &MinibatchConfig,
    model: &dyn GenerativeModel,
    pmc: &PmcConfig,
    seed: u64,
) -> Result<KdeEstimate> {
    pmc.validate()?;
    let mut rng = substream(derive_seed(seed, 0), 0);
    let subsets = cfg.subset_indices(data.n(), &mut rng)?;
    let crude_centers = subset_estimates(data, &subsets, &cfg.estimator)?;
    let crude = KdeEstimate::from_centers(crude_centers.clone())?;
    if pmc.iterations == 0 {
        return Ok(crude);
    }
    let crude_proposal = crude.to_proposal();

    let refined: Vec<ParameterPoint> = subsets
        .par_iter()
        .enumerate()
        .map(|(i, indices)| {
            let subset = data.select(indices)?;
            let subset_seed = derive_seed(seed, 1 + i as u64);
            match refine_subset(&subset, model, &crude_proposal, pmc, subset_seed) {
                Ok(center) => Ok(center),
                Err(e) => {
                    log::warn!(
                        "population Monte Carlo refinement degenerated on subset {i} ({e}); \
                         keeping the crude estimate"
                    );
                    Ok(crude_centers[i].clone())
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    KdeEstimate::from_centers(refined)
}

fn refine_subset(
    subset: &Dataset,
    model: &dyn GenerativeModel,
    init: &ProposalDistribution,
    pmc: &PmcConfig,
    seed: u64,
) -> Result<ParameterPoint> {
    let sub_model = model.adapted_to(subset);
    let s_sub = sub_model.summarize(subset)?;

    // Pilot draws calibrate per-component summary scales and the tolerance
    // schedule on this subset's distance metric.
    let pilot_n = pmc.particles_per_iter.max(64);
    let pilot = pilot_calibration(&*sub_model, init, &s_sub, pilot_n, derive_seed(seed, u64::MAX))?;

    let mut schedule = Vec::with_capacity(pmc.iterations);
    for level in pmc.levels() {
        let mut eps = pilot.distance_quantile(level)?;
        if let Some(&prev) = schedule.last() {
            if eps >= prev {
                eps = prev * 0.95;
            }
        }
        if !(eps > 0.0) {
            return Err(Error::DegenerateSample(
                "pilot distances collapse to zero; nothing to refine".into(),
            ));
        }
        schedule.push(eps);
    }

    let (set, _) = pmc_refine(
        &*sub_model,
        init,
        &s_sub,
        pmc.particles_per_iter,
        &schedule,
        Some(&pilot.scales),
        seed,
    )?;
    set.weighted_mean()
}

/// Flat (improper) location proposal truncated to `[lo, hi]`.
pub fn improper_location(lo: f64, hi: f64) -> Result<ProposalDistribution> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidConfig(format!("empty location box [{lo}, {hi}]")));
    }
    Ok(ProposalDistribution::new(
        move |rng| {
            let u: f64 = rng.random::<f64>();
            ParameterPoint::scalar(lo + u * (hi - lo)).expect("finite box draw")
        },
        move |theta| {
            if theta.dim() == 1 && theta[0] >= lo && theta[0] <= hi {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        },
    ))
}

/// Scale proposal with density proportional to `1/sigma` on `[lo, hi]`
/// (log-sigma uniform), `0 < lo < hi`.
pub fn improper_scale(lo: f64, hi: f64) -> Result<ProposalDistribution> {
    if !(lo > 0.0 && lo < hi) || !hi.is_finite() {
        return Err(Error::InvalidConfig(format!("empty scale box [{lo}, {hi}]")));
    }
    let (log_lo, log_hi) = (lo.ln(), hi.ln());
    Ok(ProposalDistribution::new(
        move |rng| {
            let u: f64 = rng.random::<f64>();
            ParameterPoint::scalar((log_lo + u * (log_hi - log_lo)).exp()).expect("finite box draw")
        },
        move |theta| {
            if theta.dim() == 1 && theta[0] >= lo && theta[0] <= hi {
                -theta[0].ln()
            } else {
                f64::NEG_INFINITY
            }
        },
    ))
}

/// Default truncation box for flat location proposals: data range widened by
/// ten interquartile ranges on each side.
pub fn location_box(data: &Dataset) -> Result<(f64, f64)> {
    let obs = data.observations();
    let lo = obs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = obs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let iqr = stats::interquartile_range(obs)?.max(1e-12);
    Ok((lo - 10.0 * iqr, hi + 10.0 * iqr))
}

/// Default truncation box for 1/sigma scale proposals: `[MAD/50, 50 MAD]`.
pub fn scale_box(data: &Dataset) -> Result<(f64, f64)> {
    let mad = stats::mad(data.observations())?.max(1e-12);
    Ok((mad / 50.0, mad * 50.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::sync::Mutex;

    fn scalar_points(values: &[f64]) -> Vec<ParameterPoint> {
        values.iter().map(|&v| ParameterPoint::scalar(v).unwrap()).collect()
    }

    fn mean_estimator() -> PointEstimator {
        Arc::new(|data: &Dataset| ParameterPoint::scalar(stats::mean(data.observations())))
    }

    #[test]
    fn silverman_two_centers() {
        let h = kde_bandwidth(&scalar_points(&[-1.0, 1.0])).unwrap();
        let expected = 0.9 * 2.0f64.sqrt() * 2.0f64.powf(-0.2);
        assert_relative_eq!(h[0], expected, epsilon = 1e-12);
        assert_relative_eq!(h[0], 1.1080, epsilon = 1e-3);
    }

    #[test]
    fn silverman_identical_centers_hits_floor() {
        let h = kde_bandwidth(&scalar_points(&[3.0, 3.0, 3.0])).unwrap();
        assert_relative_eq!(h[0], 1e-8 * 4.0, epsilon = 1e-20);
    }

    #[test]
    fn silverman_scale_equivariance() {
        let base = [0.4, -1.0, 2.5, 0.9, -0.3];
        let c = 7.5;
        let scaled: Vec<f64> = base.iter().map(|v| c * v).collect();
        let h0 = kde_bandwidth(&scalar_points(&base)).unwrap()[0];
        let h1 = kde_bandwidth(&scalar_points(&scaled)).unwrap()[0];
        assert_relative_eq!(h1, c * h0, epsilon = 1e-12);
    }

    #[test]
    fn kde_density_integrates_to_one() {
        let kde = KdeEstimate::from_centers(scalar_points(&[-0.8, 0.1, 0.4, 1.9])).unwrap();
        let (lo, hi, steps) = (-30.0, 30.0, 60_000);
        let h = (hi - lo) / steps as f64;
        let mut total = 0.0;
        for i in 0..steps {
            total += kde.density(&[lo + (i as f64 + 0.5) * h]) * h;
        }
        assert!((total - 1.0).abs() < 1e-3, "integral {total}");

        // 2-d product KDE
        let centers2: Vec<ParameterPoint> = [(-0.5, 0.2), (0.3, -0.1), (1.0, 0.8)]
            .iter()
            .map(|&(a, b)| ParameterPoint::new(vec![a, b]).unwrap())
            .collect();
        let kde2 = KdeEstimate::from_centers(centers2).unwrap();
        let (lo, hi, steps) = (-8.0, 8.0, 400);
        let h = (hi - lo) / steps as f64;
        let mut total = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                total += kde2.density(&[lo + (i as f64 + 0.5) * h, lo + (j as f64 + 0.5) * h]) * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-3, "2d integral {total}");
    }

    #[test]
    fn kde_positive_on_convex_hull() {
        let kde = KdeEstimate::from_centers(scalar_points(&[-2.0, 0.5, 3.0])).unwrap();
        for i in 0..=20 {
            let theta = -2.0 + 5.0 * i as f64 / 20.0;
            assert!(kde.density(&[theta]) > 0.0);
        }
    }

    #[test]
    fn degenerate_centers_keep_positive_density_at_mode() {
        let kde = KdeEstimate::from_centers(scalar_points(&[1.5, 1.5, 1.5])).unwrap();
        assert!(kde.density(&[1.5]) > 0.0);
        assert!(kde.density(&[1.5]) > kde.density(&[1.5 + 1e-6]));
    }

    #[test]
    fn minibatch_disjoint_sizes() {
        // n = 400, nu = 1/2: subsets of 20, 20 of them
        let data = Dataset::new((0..400).map(|i| i as f64).collect()).unwrap();
        let cfg = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, mean_estimator());
        let mut rng = substream(1, 0);
        let subsets = cfg.subset_indices(data.n(), &mut rng).unwrap();
        assert_eq!(subsets.len(), 20);
        assert!(subsets.iter().all(|s| s.len() == 20));

        // each observation used at most once
        let mut seen = std::collections::HashSet::new();
        for s in &subsets {
            for &i in s {
                assert!(seen.insert(i), "index {i} reused");
            }
        }
    }

    #[test]
    fn minibatch_overlapping_windows() {
        // n = 50, windows of 10, 40 of them at stride 1
        let data = Dataset::new((0..50).map(|i| i as f64).collect()).unwrap();
        let nu = 10.0f64.ln() / 50.0f64.ln(); // floor(50^nu) = 10
        let cfg = MinibatchConfig::new(nu, OverlapPolicy::Overlapping { stride: 1 }, mean_estimator())
            .with_batches(40);
        let mut rng = substream(1, 0);
        let subsets = cfg.subset_indices(data.n(), &mut rng).unwrap();
        assert_eq!(subsets.len(), 40);
        assert!(subsets.iter().all(|s| s.len() == 10));
        assert_eq!(subsets[0], (0..10).collect::<Vec<_>>());
        assert_eq!(subsets[39], (39..49).collect::<Vec<_>>());

        let kde = minibatch_rn(&data, &cfg, &mut substream(1, 1)).unwrap();
        assert_eq!(kde.centers().len(), 40);
    }

    #[test]
    fn estimator_failure_carries_subset_index() {
        let data = Dataset::new((0..100).map(|i| i as f64).collect()).unwrap();
        let failing: PointEstimator = Arc::new(|_| Err(Error::EmptyInput("boom".into())));
        let cfg = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, failing);
        let err = minibatch_rn(&data, &cfg, &mut substream(1, 0)).unwrap_err();
        assert!(matches!(err, Error::SubsetEstimator { .. }));
    }

    #[test]
    fn identical_estimates_peak_at_common_value() {
        let data = Dataset::new((0..100).map(|i| i as f64).collect()).unwrap();
        let constant: PointEstimator = Arc::new(|_| ParameterPoint::scalar(42.0));
        let cfg = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, constant);
        let kde = minibatch_rn(&data, &cfg, &mut substream(1, 0)).unwrap();
        assert!(kde.centers().iter().all(|c| c[0] == 42.0));
        assert!(kde.density(&[42.0]) > kde.density(&[42.1]));
    }

    #[test]
    fn high_exponent_warns_but_works() {
        let data = Dataset::new((0..100).map(|i| i as f64).collect()).unwrap();
        let cfg = MinibatchConfig::new(0.65, OverlapPolicy::Disjoint, mean_estimator());
        assert!(minibatch_rn(&data, &cfg, &mut substream(1, 0)).is_ok());
    }

    #[test]
    fn disjoint_respects_explicit_batch_count() {
        let data = Dataset::new((0..400).map(|i| i as f64).collect()).unwrap();
        let cfg = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, mean_estimator()).with_batches(10);
        let mut rng = substream(1, 0);
        assert_eq!(cfg.subset_indices(data.n(), &mut rng).unwrap().len(), 10);
        let cfg_too_many =
            MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, mean_estimator()).with_batches(21);
        assert!(cfg_too_many.subset_indices(data.n(), &mut rng).is_err());
    }

    #[test]
    fn improper_location_moments() {
        let flat = improper_location(0.0, 10.0).unwrap();
        let mut rng = substream(4, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| flat.sample(&mut rng).unwrap()[0]).collect();
        let mean = stats::mean(&draws);
        assert!((mean - 5.0).abs() < 0.04, "mean {mean}");
        let p = ParameterPoint::scalar(3.0).unwrap();
        let q = ParameterPoint::scalar(8.5).unwrap();
        assert_eq!(flat.log_density(&p), flat.log_density(&q));
        assert_eq!(flat.log_density(&ParameterPoint::scalar(11.0).unwrap()), f64::NEG_INFINITY);
    }

    #[test]
    fn improper_scale_is_log_uniform() {
        let prop = improper_scale(1.0, std::f64::consts::E).unwrap();
        let mut rng = substream(4, 1);
        let logs: Vec<f64> = (0..100_000)
            .map(|_| prop.sample(&mut rng).unwrap()[0].ln())
            .collect();
        // log sigma uniform on [0, 1]
        assert!(logs.iter().all(|v| (0.0..=1.0).contains(v)));
        let mean = stats::mean(&logs);
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
        // density ratio: r(a)/r(b) = b/a
        let a = ParameterPoint::scalar(1.2).unwrap();
        let b = ParameterPoint::scalar(2.4).unwrap();
        assert_relative_eq!(
            (prop.log_density(&a) - prop.log_density(&b)).exp(),
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_boxes_rejected() {
        assert!(improper_location(2.0, 2.0).is_err());
        assert!(improper_scale(0.0, 1.0).is_err());
        assert!(improper_scale(5.0, 1.0).is_err());
    }

    #[test]
    fn refinement_with_zero_iterations_is_crude_scheme() {
        let data = Dataset::new((0..100).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let cfg = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, mean_estimator());

        struct MeanModel {
            n: usize,
        }
        impl GenerativeModel for MeanModel {
            fn parameter_dim(&self) -> usize {
                1
            }
            fn summary_dim(&self) -> usize {
                1
            }
            fn simulate(&self, theta: &ParameterPoint, rng: &mut dyn RngCore) -> Result<Dataset> {
                let normal = rand_distr::Normal::new(theta[0], 1.0).unwrap();
                Dataset::new(
                    (0..self.n)
                        .map(|_| rand_distr::Distribution::sample(&normal, &mut *rng))
                        .collect(),
                )
            }
            fn summarize(&self, data: &Dataset) -> Result<crate::core::SummaryVector> {
                crate::core::SummaryVector::scalar(stats::mean(data.observations()))
            }
            fn adapted_to(&self, data: &Dataset) -> Box<dyn GenerativeModel> {
                Box::new(MeanModel { n: data.n() })
            }
        }

        let model = MeanModel { n: 100 };
        let pmc = PmcConfig {
            iterations: 0,
            ..PmcConfig::default()
        };
        let refined = refined_minibatch_rn(&data, &cfg, &model, &pmc, 9).unwrap();
        let mut rng = substream(derive_seed(9, 0), 0);
        let crude_subsets = cfg.subset_indices(data.n(), &mut rng).unwrap();
        let crude = KdeEstimate::from_centers(
            subset_estimates(&data, &crude_subsets, &cfg.estimator).unwrap(),
        )
        .unwrap();
        assert_eq!(refined.centers(), crude.centers());
        assert_eq!(refined.bandwidth(), crude.bandwidth());
    }

    #[test]
    fn subset_estimation_runs_once_per_subset() {
        let data = Dataset::new((0..100).map(|i| i as f64).collect()).unwrap();
        let count = Arc::new(Mutex::new(0usize));
        let counter = Arc::clone(&count);
        let est: PointEstimator = Arc::new(move |d: &Dataset| {
            *counter.lock().unwrap() += 1;
            ParameterPoint::scalar(stats::mean(d.observations()))
        });
        let cfg = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, est);
        minibatch_rn(&data, &cfg, &mut substream(1, 0)).unwrap();
        assert_eq!(*count.lock().unwrap(), 10);
    }
}
