//! The sampling algorithms: accept-reject ABC and ACC, importance-sampling
//! ABC, and the population Monte Carlo refinement used by the
//! refined-minibatch initial distribution.
//!
//! All samplers address randomness per proposal index through
//! [`substream`](crate::core::substream), so a run is reproducible and
//! independent of worker count: proposal `i` draws its parameter, its
//! simulated summary, and its acceptance uniform from `substream(seed, i)`
//! and nothing else.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::core::{stats, substream, GenerativeModel, ParameterPoint, Particle, ParticleSet, SummaryVector};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};

type SampleFn = dyn Fn(&mut dyn RngCore) -> ParameterPoint + Send + Sync;
type LogDensityFn = dyn Fn(&ParameterPoint) -> f64 + Send + Sync;

/// A distribution parameters are proposed from: a sampler plus a log density
/// known up to a constant (`-inf` outside the support). Improper
/// distributions used only for importance weights may omit the sampler.
#[derive(Clone)]
pub struct ProposalDistribution {
    sampler: Option<Arc<SampleFn>>,
    log_density: Arc<LogDensityFn>,
}

impl ProposalDistribution {
    pub fn new(
        sampler: impl Fn(&mut dyn RngCore) -> ParameterPoint + Send + Sync + 'static,
        log_density: impl Fn(&ParameterPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            sampler: Some(Arc::new(sampler)),
            log_density: Arc::new(log_density),
        }
    }

    /// A density that cannot be sampled, usable only as the numerator of
    /// importance weights (e.g. an improper flat prior).
    pub fn density_only(log_density: impl Fn(&ParameterPoint) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            sampler: None,
            log_density: Arc::new(log_density),
        }
    }

    /// Unnormalized flat density over all of parameter space.
    pub fn improper_flat() -> Self {
        Self::density_only(|_| 0.0)
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Result<ParameterPoint> {
        match &self.sampler {
            Some(s) => Ok(s(rng)),
            None => Err(Error::InvalidConfig(
                "this proposal distribution is density-only and cannot be sampled".into(),
            )),
        }
    }

    pub fn log_density(&self, theta: &ParameterPoint) -> f64 {
        (self.log_density)(theta)
    }
}

/// When to stop generating proposals.
#[derive(Clone, Copy, Debug)]
pub enum StoppingRule {
    /// Generate exactly this many proposals.
    Proposals(usize),
    /// Keep proposing until `target` acceptances, giving up after
    /// `max_attempts` proposals.
    Accepted { target: usize, max_attempts: usize },
}

impl StoppingRule {
    /// Target-count rule with the default cap of 100 proposals per requested
    /// acceptance.
    pub fn accepted(target: usize) -> Self {
        StoppingRule::Accepted {
            target,
            max_attempts: target.saturating_mul(100),
        }
    }
}

/// How acceptance is decided.
#[derive(Clone, Copy, Debug)]
pub enum AcceptanceMode {
    /// Probabilistic acceptance with the configured kernel at its tolerance.
    FixedEpsilon,
    /// Generate all proposals first, set the tolerance to the q-quantile of
    /// the scaled summary distances, and keep exactly `ceil(q N)` particles
    /// (hard-threshold acceptance at that tolerance).
    FixedAcceptanceProportion(f64),
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub stopping: StoppingRule,
    pub kernel: KernelSpec,
    pub mode: AcceptanceMode,
}

impl SamplerConfig {
    pub fn fixed_epsilon(kernel: KernelSpec, stopping: StoppingRule) -> Self {
        Self {
            stopping,
            kernel,
            mode: AcceptanceMode::FixedEpsilon,
        }
    }

    /// Quantile-threshold mode; the kernel's own tolerance is superseded by
    /// the achieved quantile.
    pub fn acceptance_proportion(kernel: KernelSpec, n_proposals: usize, q: f64) -> Self {
        Self {
            stopping: StoppingRule::Proposals(n_proposals),
            kernel,
            mode: AcceptanceMode::FixedAcceptanceProportion(q),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.stopping {
            StoppingRule::Proposals(n) if n == 0 => {
                return Err(Error::InvalidConfig("zero proposals requested".into()))
            }
            StoppingRule::Accepted { target, max_attempts } => {
                if target == 0 {
                    return Err(Error::InvalidConfig("zero accepted particles requested".into()));
                }
                if max_attempts < target {
                    return Err(Error::InvalidConfig(format!(
                        "max_attempts {max_attempts} below target {target}"
                    )));
                }
            }
            _ => {}
        }
        if let AcceptanceMode::FixedAcceptanceProportion(q) = self.mode {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "acceptance proportion must lie in (0,1), got {q}"
                )));
            }
            if matches!(self.stopping, StoppingRule::Accepted { .. }) {
                return Err(Error::InvalidConfig(
                    "fixed acceptance proportion requires a fixed proposal count".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Accept-reject ABC: propose from the prior, accept each proposal with
/// probability `K((s_i - s_obs) / eps) / K(0)`. Unit weights.
pub fn abc_reject(
    model: &dyn GenerativeModel,
    prior: &ProposalDistribution,
    s_obs: &SummaryVector,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ParticleSet> {
    rejection_run(model, prior, s_obs, cfg, seed)
}

/// Accept-reject ACC: identical machinery with the prior replaced by a
/// (possibly data-dependent) initial distribution `r_n`. With `r_n` equal to
/// the prior and the same seed this reproduces `abc_reject` bit for bit.
pub fn acc_reject(
    model: &dyn GenerativeModel,
    r_n: &ProposalDistribution,
    s_obs: &SummaryVector,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ParticleSet> {
    rejection_run(model, r_n, s_obs, cfg, seed)
}

/// Importance-sampling ABC: propose from `r_n`, accept as in `abc_reject`,
/// and weight each accepted particle by `pi(theta) / r_n(theta)`
/// (unnormalized).
pub fn abc_importance(
    model: &dyn GenerativeModel,
    prior: &ProposalDistribution,
    r_n: &ProposalDistribution,
    s_obs: &SummaryVector,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ParticleSet> {
    let mut set = rejection_run(model, r_n, s_obs, cfg, seed)?;
    let mut any_positive = false;
    for particle in &mut set.particles {
        let lw = prior.log_density(&particle.theta) - r_n.log_density(&particle.theta);
        let w = lw.exp();
        if !w.is_finite() {
            return Err(Error::SupportMismatch(format!(
                "non-finite importance weight (log weight {lw:.3}) at theta {:?}",
                particle.theta.values()
            )));
        }
        particle.weight = w;
        any_positive |= w > 0.0;
    }
    if !any_positive {
        return Err(Error::SupportMismatch(
            "all importance weights are zero; the prior does not cover the proposal support".into(),
        ));
    }
    Ok(set)
}

/// One evaluated proposal. `summary` is `None` when the proposal fell
/// outside the model's parameter domain (treated as a rejection).
struct Outcome {
    theta: ParameterPoint,
    summary: Option<SummaryVector>,
    distance: f64,
    accepted: bool,
}

fn evaluate_proposal(
    model: &dyn GenerativeModel,
    proposal: &ProposalDistribution,
    s_obs: &SummaryVector,
    kernel: &KernelSpec,
    probabilistic: bool,
    seed: u64,
    index: u64,
) -> Result<Outcome> {
    let mut rng = substream(seed, index);
    let theta = proposal.sample(&mut rng)?;
    let summary = match model.simulate_summary(&theta, &mut rng) {
        Ok(s) => s,
        Err(Error::DomainViolation(_)) => {
            return Ok(Outcome {
                theta,
                summary: None,
                distance: f64::INFINITY,
                accepted: false,
            })
        }
        Err(e) => return Err(e),
    };
    let u = summary.diff(s_obs)?;
    let distance = kernel.scaled_norm(&u)?;
    let accepted = if probabilistic {
        let p = kernel.accept_probability_of_scaled_norm(distance / kernel.tolerance());
        if p >= 1.0 {
            true
        } else if p <= 0.0 {
            false
        } else {
            rng.random::<f64>() <= p
        }
    } else {
        false
    };
    Ok(Outcome {
        theta,
        summary: Some(summary),
        distance,
        accepted,
    })
}

fn rejection_run(
    model: &dyn GenerativeModel,
    proposal: &ProposalDistribution,
    s_obs: &SummaryVector,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ParticleSet> {
    cfg.validate()?;
    match cfg.mode {
        AcceptanceMode::FixedEpsilon => fixed_epsilon_run(model, proposal, s_obs, cfg, seed),
        AcceptanceMode::FixedAcceptanceProportion(q) => {
            let n = match cfg.stopping {
                StoppingRule::Proposals(n) => n,
                StoppingRule::Accepted { .. } => unreachable!("validated"),
            };
            quantile_run(model, proposal, s_obs, &cfg.kernel, n, q, seed)
        }
    }
}

fn fixed_epsilon_run(
    model: &dyn GenerativeModel,
    proposal: &ProposalDistribution,
    s_obs: &SummaryVector,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ParticleSet> {
    let (target, max_attempts) = match cfg.stopping {
        StoppingRule::Proposals(n) => (None, n),
        StoppingRule::Accepted { target, max_attempts } => (Some(target), max_attempts),
    };

    let mut particles = Vec::new();
    let mut attempts: u64 = 0;
    let mut min_distance = f64::INFINITY;
    let chunk = 8192usize;
    let mut start = 0usize;
    'outer: while start < max_attempts {
        let end = (start + chunk).min(max_attempts);
        let outcomes: Vec<Outcome> = (start..end)
            .into_par_iter()
            .map(|i| evaluate_proposal(model, proposal, s_obs, &cfg.kernel, true, seed, i as u64))
            .collect::<Result<Vec<_>>>()?;
        for outcome in outcomes {
            attempts += 1;
            min_distance = min_distance.min(outcome.distance);
            if outcome.accepted {
                particles.push(Particle {
                    theta: outcome.theta,
                    summary: outcome.summary.expect("accepted proposals carry a summary"),
                    weight: 1.0,
                });
                if let Some(t) = target {
                    if particles.len() == t {
                        break 'outer;
                    }
                }
            }
        }
        start = end;
    }

    if particles.is_empty() {
        return Err(Error::ToleranceTooSmall {
            accepted: 0,
            attempts,
            target: target.unwrap_or(1),
            min_distance,
        });
    }
    if let Some(t) = target {
        if particles.len() < t {
            log::warn!(
                "accepted only {} of {t} requested particles after {attempts} attempts",
                particles.len()
            );
        }
    }
    Ok(ParticleSet {
        particles,
        attempts,
        tolerance: cfg.kernel.tolerance(),
        adjusted: false,
    })
}

fn quantile_run(
    model: &dyn GenerativeModel,
    proposal: &ProposalDistribution,
    s_obs: &SummaryVector,
    kernel: &KernelSpec,
    n_proposals: usize,
    q: f64,
    seed: u64,
) -> Result<ParticleSet> {
    let outcomes: Vec<Outcome> = (0..n_proposals)
        .into_par_iter()
        .map(|i| evaluate_proposal(model, proposal, s_obs, kernel, false, seed, i as u64))
        .collect::<Result<Vec<_>>>()?;

    let keep = ((q * n_proposals as f64).ceil() as usize).clamp(1, n_proposals);
    let mut order: Vec<usize> = (0..n_proposals).collect();
    order.sort_by(|&a, &b| {
        outcomes[a]
            .distance
            .partial_cmp(&outcomes[b].distance)
            .expect("distances are never NaN")
            .then(a.cmp(&b))
    });
    let selected = &order[..keep];
    let tolerance = outcomes[selected[keep - 1]].distance;
    if !tolerance.is_finite() {
        return Err(Error::ToleranceTooSmall {
            accepted: selected
                .iter()
                .filter(|&&i| outcomes[i].distance.is_finite())
                .count(),
            attempts: n_proposals as u64,
            target: keep,
            min_distance: outcomes[order[0]].distance,
        });
    }

    let mut chosen: Vec<usize> = selected.to_vec();
    chosen.sort_unstable();
    let particles = chosen
        .into_iter()
        .map(|i| Particle {
            theta: outcomes[i].theta.clone(),
            summary: outcomes[i]
                .summary
                .clone()
                .expect("finite distance implies a summary"),
            weight: 1.0,
        })
        .collect();
    Ok(ParticleSet {
        particles,
        attempts: n_proposals as u64,
        tolerance,
        adjusted: false,
    })
}

/// Population Monte Carlo refinement targeting a flat prior: iteration one
/// proposes from `init_proposal`; iteration `t > 1` proposes from a Gaussian
/// mixture over the previous iteration's weighted particles with component
/// covariance twice their weighted covariance. Acceptance is a hard
/// threshold at the iteration's tolerance, and particles are weighted by
/// `1 / proposal density`.
///
/// Returns the final weighted particles and the mixture fitted to them.
pub fn pmc_refine(
    model: &dyn GenerativeModel,
    init_proposal: &ProposalDistribution,
    s_obs: &SummaryVector,
    particles_per_iter: usize,
    epsilon_schedule: &[f64],
    summary_scales: Option<&[f64]>,
    seed: u64,
) -> Result<(ParticleSet, ProposalDistribution)> {
    if epsilon_schedule.is_empty() {
        return Err(Error::InvalidConfig("empty tolerance schedule".into()));
    }
    if epsilon_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig(
            "tolerance schedule must be strictly decreasing".into(),
        ));
    }
    if particles_per_iter == 0 {
        return Err(Error::InvalidConfig("zero particles per iteration".into()));
    }

    let mut current: Option<ParticleSet> = None;
    let mut proposal = init_proposal.clone();
    let mut total_attempts: u64 = 0;

    for (t, &eps) in epsilon_schedule.iter().enumerate() {
        let iter_seed = crate::core::derive_seed(seed, t as u64);
        let kernel = match summary_scales {
            Some(scales) => KernelSpec::with_component_scales(KernelFamily::Uniform, eps, scales)?,
            None => KernelSpec::new(KernelFamily::Uniform, eps)?,
        };
        let cfg = SamplerConfig {
            stopping: StoppingRule::Accepted {
                target: particles_per_iter,
                max_attempts: particles_per_iter.saturating_mul(200),
            },
            kernel,
            mode: AcceptanceMode::FixedEpsilon,
        };
        let mut set = rejection_run(model, &proposal, s_obs, &cfg, iter_seed)?;
        total_attempts += set.attempts;

        for particle in &mut set.particles {
            let lw = -proposal.log_density(&particle.theta);
            let w = lw.exp();
            if !w.is_finite() {
                return Err(Error::SupportMismatch(format!(
                    "non-finite population Monte Carlo weight at theta {:?}",
                    particle.theta.values()
                )));
            }
            particle.weight = w;
        }
        let ess = set.effective_sample_size();
        if ess < 0.05 * set.len() as f64 {
            log::warn!(
                "population Monte Carlo tolerance schedule too aggressive: \
                 ESS {ess:.1} of {} at iteration {t} (eps {eps})",
                set.len()
            );
        }

        if t + 1 < epsilon_schedule.len() {
            proposal = match mixture_from_particles(&set) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!(
                        "degenerate particle covariance at iteration {t} ({e}); \
                         falling back to the initial proposal"
                    );
                    init_proposal.clone()
                }
            };
        }
        current = Some(set);
    }

    let mut set = current.expect("at least one iteration ran");
    set.attempts = total_attempts;
    let fitted = mixture_from_particles(&set).unwrap_or_else(|e| {
        log::warn!("degenerate final particle covariance ({e}); returning the initial proposal");
        init_proposal.clone()
    });
    Ok((set, fitted))
}

/// Scales and distance spectrum measured from a pilot round of proposals.
#[derive(Clone, Debug)]
pub struct PilotCalibration {
    /// Median absolute summary difference per component, floored away from
    /// zero; standardizing by these puts heterogeneous summaries on a common
    /// footing.
    pub scales: Vec<f64>,
    /// Standardized distances of the pilot proposals, sorted ascending.
    pub scaled_distances: Vec<f64>,
}

impl PilotCalibration {
    /// The distance at the given acceptance quantile.
    pub fn distance_quantile(&self, level: f64) -> Result<f64> {
        stats::quantile_sorted(&self.scaled_distances, level)
    }
}

/// Run `n_pilot` proposals and measure the spread of each summary component
/// around `s_obs`. Proposals outside the model domain are skipped.
pub fn pilot_calibration(
    model: &dyn GenerativeModel,
    proposal: &ProposalDistribution,
    s_obs: &SummaryVector,
    n_pilot: usize,
    seed: u64,
) -> Result<PilotCalibration> {
    let outcomes: Vec<Option<Vec<f64>>> = (0..n_pilot)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let theta = proposal.sample(&mut rng)?;
            match model.simulate_summary(&theta, &mut rng) {
                Ok(s) => Ok(Some(s.diff(s_obs)?)),
                Err(Error::DomainViolation(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let diffs: Vec<Vec<f64>> = outcomes.into_iter().flatten().collect();
    if diffs.len() < 8 {
        return Err(Error::DegenerateSample(format!(
            "only {} of {n_pilot} pilot proposals produced summaries",
            diffs.len()
        )));
    }
    let d = s_obs.dim();
    let scales: Vec<f64> = (0..d)
        .map(|j| {
            let abs_col: Vec<f64> = diffs.iter().map(|u| u[j].abs()).collect();
            stats::median(&abs_col)
                .unwrap_or(0.0)
                .max(1e-8 * (1.0 + s_obs[j].abs()))
        })
        .collect();
    let mut scaled_distances: Vec<f64> = diffs
        .iter()
        .map(|u| {
            u.iter()
                .zip(&scales)
                .map(|(v, s)| (v / s) * (v / s))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    scaled_distances.sort_by(|a, b| a.partial_cmp(b).expect("distances are never NaN"));
    Ok(PilotCalibration {
        scales,
        scaled_distances,
    })
}

/// Gaussian-kernel mixture over weighted particles, component covariance
/// twice the weighted particle covariance.
pub fn mixture_from_particles(set: &ParticleSet) -> Result<ProposalDistribution> {
    if set.is_empty() {
        return Err(Error::EmptyInput("mixture over empty particle set".into()));
    }
    let points: Vec<Vec<f64>> = set.particles.iter().map(|p| p.theta.values().to_vec()).collect();
    let weights = set.weights();
    let mix = GaussianMixture::fit(&points, &weights, 2.0)?;
    let mix = Arc::new(mix);
    let sample_mix = Arc::clone(&mix);
    let dens_mix = Arc::clone(&mix);
    Ok(ProposalDistribution::new(
        move |rng| sample_mix.sample(rng),
        move |theta| dens_mix.log_density(theta.values()),
    ))
}

pub(crate) struct GaussianMixture {
    centers: Vec<DVector<f64>>,
    log_weights: Vec<f64>,
    cum_weights: Vec<f64>,
    chol_l: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianMixture {
    pub(crate) fn fit(points: &[Vec<f64>], weights: &[f64], cov_factor: f64) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateSample("all mixture weights zero".into()));
        }
        let (_, cov) = stats::weighted_mean_cov(points, weights)?;
        let k = points[0].len();
        let mut cov_m = DMatrix::zeros(k, k);
        for r in 0..k {
            for c in 0..k {
                cov_m[(r, c)] = cov_factor * cov[r][c];
            }
        }
        if cov_m.trace() <= 1e-300 {
            return Err(Error::SingularCovariance(
                "all particles identical; zero covariance".into(),
            ));
        }
        let chol = Cholesky::new(cov_m.clone())
            .ok_or_else(|| Error::SingularCovariance("particle covariance not positive definite".into()))?;
        let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
        let log_norm = -0.5 * (k as f64) * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det;
        let mut cum = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        for &w in weights {
            acc += w / total;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self {
            centers: points.iter().map(|p| DVector::from_column_slice(p)).collect(),
            log_weights: weights.iter().map(|w| (w / total).ln()).collect(),
            cum_weights: cum,
            chol_l: chol.l(),
            log_norm,
        })
    }

    pub(crate) fn sample(&self, rng: &mut dyn RngCore) -> ParameterPoint {
        let u = rng.random::<f64>();
        let j = self
            .cum_weights
            .partition_point(|c| *c < u)
            .min(self.centers.len() - 1);
        let k = self.centers[0].len();
        let z = DVector::from_fn(k, |_, _| {
            rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng)
        });
        let x = &self.centers[j] + &self.chol_l * z;
        ParameterPoint::new(x.iter().copied().collect()).expect("mixture draw is finite")
    }

    pub(crate) fn log_density(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let mut best = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(self.centers.len());
        for (c, lw) in self.centers.iter().zip(&self.log_weights) {
            if !lw.is_finite() {
                terms.push(f64::NEG_INFINITY);
                continue;
            }
            let diff = &xv - c;
            let y = self
                .chol_l
                .solve_lower_triangular(&diff)
                .expect("Cholesky factor is nonsingular");
            let lt = lw + self.log_norm - 0.5 * y.norm_squared();
            best = best.max(lt);
            terms.push(lt);
        }
        if !best.is_finite() {
            return f64::NEG_INFINITY;
        }
        best + terms.iter().map(|t| (t - best).exp()).sum::<f64>().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Dataset;
    use rand_distr::Distribution;

    /// Scalar location model: the summary is theta plus N(0, noise_sd^2).
    struct NoisyLocation {
        noise_sd: f64,
    }

    impl GenerativeModel for NoisyLocation {
        fn parameter_dim(&self) -> usize {
            1
        }
        fn summary_dim(&self) -> usize {
            1
        }
        fn simulate(&self, theta: &ParameterPoint, rng: &mut dyn RngCore) -> Result<Dataset> {
            let normal = rand_distr::Normal::new(theta[0], self.noise_sd.max(1e-300)).unwrap();
            Dataset::new(vec![normal.sample(&mut *rng)])
        }
        fn summarize(&self, data: &Dataset) -> Result<SummaryVector> {
            SummaryVector::scalar(data.observations()[0])
        }
        fn adapted_to(&self, _data: &Dataset) -> Box<dyn GenerativeModel> {
            Box::new(NoisyLocation { noise_sd: self.noise_sd })
        }
    }

    fn std_normal_proposal() -> ProposalDistribution {
        ProposalDistribution::new(
            |rng| {
                let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut *rng);
                ParameterPoint::scalar(z).unwrap()
            },
            |theta| -0.5 * theta[0] * theta[0],
        )
    }

    #[test]
    fn degenerate_model_accepts_everything() {
        struct Echo;
        impl GenerativeModel for Echo {
            fn parameter_dim(&self) -> usize {
                1
            }
            fn summary_dim(&self) -> usize {
                1
            }
            fn simulate(&self, _: &ParameterPoint, _: &mut dyn RngCore) -> Result<Dataset> {
                Dataset::new(vec![0.0])
            }
            fn summarize(&self, _: &Dataset) -> Result<SummaryVector> {
                SummaryVector::scalar(1.25)
            }
            fn adapted_to(&self, _: &Dataset) -> Box<dyn GenerativeModel> {
                Box::new(Echo)
            }
        }
        let cfg = SamplerConfig::fixed_epsilon(
            KernelSpec::new(KernelFamily::Gaussian, 0.1).unwrap(),
            StoppingRule::Proposals(500),
        );
        let s_obs = SummaryVector::scalar(1.25).unwrap();
        let set = abc_reject(&Echo, &std_normal_proposal(), &s_obs, &cfg, 7).unwrap();
        assert_eq!(set.len(), 500);
        assert_eq!(set.acceptance_proportion(), 1.0);
    }

    #[test]
    fn acc_equals_abc_with_shared_streams() {
        let model = NoisyLocation { noise_sd: 0.3 };
        let s_obs = SummaryVector::scalar(0.4).unwrap();
        let cfg = SamplerConfig::fixed_epsilon(
            KernelSpec::new(KernelFamily::Gaussian, 0.2).unwrap(),
            StoppingRule::Proposals(2000),
        );
        let a = abc_reject(&model, &std_normal_proposal(), &s_obs, &cfg, 99).unwrap();
        let b = acc_reject(&model, &std_normal_proposal(), &s_obs, &cfg, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn runs_are_deterministic() {
        let model = NoisyLocation { noise_sd: 0.3 };
        let s_obs = SummaryVector::scalar(0.4).unwrap();
        let cfg = SamplerConfig::acceptance_proportion(
            KernelSpec::new(KernelFamily::Gaussian, 1.0).unwrap(),
            3000,
            0.1,
        );
        let a = acc_reject(&model, &std_normal_proposal(), &s_obs, &cfg, 5).unwrap();
        let b = acc_reject(&model, &std_normal_proposal(), &s_obs, &cfg, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quantile_mode_keeps_exact_count() {
        let model = NoisyLocation { noise_sd: 0.5 };
        let s_obs = SummaryVector::scalar(0.0).unwrap();
        let cfg = SamplerConfig::acceptance_proportion(
            KernelSpec::new(KernelFamily::Gaussian, 1.0).unwrap(),
            2500,
            0.13,
        );
        let set = acc_reject(&model, &std_normal_proposal(), &s_obs, &cfg, 3).unwrap();
        assert_eq!(set.len(), (0.13f64 * 2500.0).ceil() as usize);
        assert_eq!(set.attempts, 2500);
        // every kept particle is within the reported tolerance
        for p in &set.particles {
            assert!((p.summary[0] - s_obs[0]).abs() <= set.tolerance + 1e-12);
        }
    }

    #[test]
    fn importance_weights_are_unity_when_rn_is_prior() {
        let model = NoisyLocation { noise_sd: 0.3 };
        let s_obs = SummaryVector::scalar(0.0).unwrap();
        let cfg = SamplerConfig::fixed_epsilon(
            KernelSpec::new(KernelFamily::Gaussian, 0.3).unwrap(),
            StoppingRule::Proposals(2000),
        );
        let prior = std_normal_proposal();
        let set = abc_importance(&model, &prior, &prior, &s_obs, &cfg, 11).unwrap();
        assert!(!set.is_empty());
        for p in &set.particles {
            assert!((p.weight - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn importance_weight_ratio_flat_over_normal() {
        // flat prior, standard normal r_n: w(theta) = exp(theta^2 / 2) up to
        // a constant; the ratio w(1)/w(0) is exp(1/2).
        let flat = ProposalDistribution::improper_flat();
        let rn = std_normal_proposal();
        let w = |theta: f64| (flat.log_density(&ParameterPoint::scalar(theta).unwrap())
            - rn.log_density(&ParameterPoint::scalar(theta).unwrap()))
        .exp();
        assert!((w(1.0) / w(0.0) - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn zero_acceptances_reports_tolerance_too_small() {
        let model = NoisyLocation { noise_sd: 0.1 };
        let s_obs = SummaryVector::scalar(50.0).unwrap();
        let cfg = SamplerConfig::fixed_epsilon(
            KernelSpec::new(KernelFamily::Uniform, 1e-6).unwrap(),
            StoppingRule::Accepted { target: 10, max_attempts: 500 },
        );
        let err = abc_reject(&model, &std_normal_proposal(), &s_obs, &cfg, 1).unwrap_err();
        match err {
            Error::ToleranceTooSmall { accepted, attempts, .. } => {
                assert_eq!(accepted, 0);
                assert_eq!(attempts, 500);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn acceptance_monotone_in_tolerance() {
        let model = NoisyLocation { noise_sd: 0.4 };
        let s_obs = SummaryVector::scalar(0.2).unwrap();
        let mut last = 0.0;
        for eps in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let cfg = SamplerConfig::fixed_epsilon(
                KernelSpec::new(KernelFamily::Gaussian, eps).unwrap(),
                StoppingRule::Proposals(4000),
            );
            let set = abc_reject(&model, &std_normal_proposal(), &s_obs, &cfg, 21).unwrap();
            let prop = set.acceptance_proportion();
            assert!(
                prop >= last,
                "acceptance fell from {last} to {prop} at eps {eps}"
            );
            last = prop;
        }
    }

    #[test]
    fn pmc_single_iteration_is_plain_importance_sampling() {
        let model = NoisyLocation { noise_sd: 0.3 };
        let s_obs = SummaryVector::scalar(0.3).unwrap();
        let init = std_normal_proposal();
        let seed = 31;
        let (pmc_set, _) = pmc_refine(&model, &init, &s_obs, 150, &[0.25], None, seed).unwrap();

        let cfg = SamplerConfig::fixed_epsilon(
            KernelSpec::new(KernelFamily::Uniform, 0.25).unwrap(),
            StoppingRule::Accepted { target: 150, max_attempts: 150 * 200 },
        );
        let is_set = abc_importance(
            &model,
            &ProposalDistribution::improper_flat(),
            &init,
            &s_obs,
            &cfg,
            crate::core::derive_seed(seed, 0),
        )
        .unwrap();
        assert_eq!(pmc_set, is_set);
    }

    #[test]
    fn pmc_shrinking_schedule_stays_alive() {
        let model = NoisyLocation { noise_sd: 0.3 };
        let s_obs = SummaryVector::scalar(0.1).unwrap();
        let init = std_normal_proposal();
        let (set, fitted) =
            pmc_refine(&model, &init, &s_obs, 300, &[0.5, 0.25, 0.1], None, 8).unwrap();
        assert!(set.effective_sample_size() > 0.0);
        let var = set.weighted_variance().unwrap()[0];
        assert!(var.is_finite() && var > 0.0);
        // the fitted mixture samples near the target
        let mut rng = substream(123, 0);
        let draws: Vec<f64> = (0..200).map(|_| fitted.sample(&mut rng).unwrap()[0]).collect();
        let mean = stats::mean(&draws);
        assert!((mean - 0.1).abs() < 0.5, "fitted mixture mean {mean}");
    }

    #[test]
    fn mixture_density_matches_hand_computation() {
        let points = vec![vec![0.0], vec![2.0]];
        let weights = vec![1.0, 1.0];
        let mix = GaussianMixture::fit(&points, &weights, 2.0).unwrap();
        // weighted covariance about the mean 1.0 is 1.0, doubled to 2.0
        let var = 2.0f64;
        let dens = |x: f64| {
            0.5 * (-0.5 * x * x / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
                + 0.5 * (-0.5 * (x - 2.0) * (x - 2.0) / var).exp()
                    / (2.0 * std::f64::consts::PI * var).sqrt()
        };
        for x in [-1.0, 0.0, 0.7, 2.0, 3.5] {
            assert!((mix.log_density(&[x]).exp() - dens(x)).abs() < 1e-12);
        }
    }
}
