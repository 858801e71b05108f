//! Experiment pipelines: build the initial distribution, sample, adjust,
//! construct regions, and score coverage over replicated datasets.
//!
//! Randomness is laid out hierarchically: the run seed derives one master
//! per stage (data generation, initial distribution, pilot, sampling,
//! volume estimation), and every dataset replication derives its own
//! sub-master, so results are independent of worker count and reproducible
//! byte for byte.

use rayon::prelude::*;

use crate::adjustment::{fit_local_linear, regression_adjust};
use crate::core::{
    derive_seed, substream, Dataset, GenerativeModel, ParameterPoint, ParticleSet, SummaryVector,
};
use crate::error::{Error, Result};
use crate::harness::config::*;
use crate::harness::csvfmt::fmt_g6;
use crate::inference::{
    coverage_score, depth_region, interval_from_w, ConfidenceRegion, MatchingMaps, RegionKind,
    Sided,
};
use crate::initial::{
    improper_location, improper_scale, kde_bandwidth, minibatch_rn, refined_minibatch_rn,
    KdeEstimate, MinibatchConfig, OverlapPolicy, PmcConfig, PointEstimator,
};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::models::{
    gaussian_acc_closed_form, mad_estimator, mean_estimator, median_estimator,
    median_mad_estimator, normal_proposal, ricker_msl_estimator, t4_proposal, CauchyModel,
    CauchyParameterization, CauchySummary, GaussianLocationModel, RickerModel,
    SyntheticLikelihoodConfig,
};
use crate::samplers::{
    abc_importance, abc_reject, acc_reject, pilot_calibration, AcceptanceMode, ProposalDistribution,
    SamplerConfig, StoppingRule,
};

const DATA_TAG: u64 = 0xDA7A;
const RUN_TAG: u64 = 0x51_4E;
const INIT_TAG: u64 = 1;
const PILOT_TAG: u64 = 2;
const SAMPLE_TAG: u64 = 3;
const VOLUME_TAG: u64 = 4;
const ESTIMATOR_TAG: u64 = 5;

/// One region produced by a single pipeline run.
#[derive(Clone, Debug)]
pub struct RegionRecord {
    pub alpha: f64,
    pub parameter: String,
    pub region: ConfidenceRegion,
}

/// The output of the full pipeline on one dataset.
#[derive(Debug)]
pub struct SingleRun {
    pub particles: ParticleSet,
    pub records: Vec<RegionRecord>,
    pub s_obs: SummaryVector,
}

/// One aggregated result line of a coverage study.
#[derive(Clone, Debug)]
pub struct ResultRow {
    pub setting: String,
    pub method: String,
    pub adjusted: bool,
    pub parameter: String,
    pub mode: String,
    pub mode_value: f64,
    pub alpha: f64,
    pub coverage: f64,
    pub median_width_or_volume: f64,
    pub replications: usize,
    pub failures: usize,
    pub total_attempts: u64,
    pub mean_acceptance: f64,
    /// Wall-clock seconds for the whole study; logged, never written into
    /// the CSV so that reruns stay byte-identical.
    pub wall_secs: f64,
}

pub const COVERAGE_CSV_HEADER: &str = "setting,method,adjusted,parameter,mode,value,alpha,\
coverage,median_width_or_volume,replications,failures,total_attempts,mean_acceptance";

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.setting,
            self.method,
            self.adjusted,
            self.parameter,
            self.mode,
            fmt_g6(self.mode_value),
            fmt_g6(self.alpha),
            fmt_g6(self.coverage),
            fmt_g6(self.median_width_or_volume),
            self.replications,
            self.failures,
            self.total_attempts,
            fmt_g6(self.mean_acceptance),
        )
    }
}

// ---------------------------------------------------------------------------
// Model construction

pub fn build_model(cfg: &ConfigFile) -> Result<Box<dyn GenerativeModel>> {
    let m = &cfg.model;
    Ok(match m.kind {
        ModelKind::Gaussian => Box::new(GaussianLocationModel::new(m.n)),
        ModelKind::Cauchy => {
            let parameterization = match m.parameterization.expect("validated") {
                ParamKind::Location => CauchyParameterization::Location {
                    scale: m.scale.expect("validated"),
                },
                ParamKind::Scale => CauchyParameterization::Scale {
                    location: m.location.expect("validated"),
                },
                ParamKind::Joint => CauchyParameterization::Joint,
            };
            let summary = match m.summary.expect("validated") {
                SummaryKind::Mean => CauchySummary::Mean,
                SummaryKind::Median => CauchySummary::Median,
                SummaryKind::Mad => CauchySummary::Mad,
                SummaryKind::MedianMad => CauchySummary::MedianMad,
            };
            Box::new(CauchyModel::new(m.n, parameterization, summary))
        }
        ModelKind::Ricker => Box::new(RickerModel::new(m.n)),
    })
}

pub fn theta0(cfg: &ConfigFile) -> ParameterPoint {
    ParameterPoint::new(cfg.model.theta0.clone()).expect("validated theta0")
}

fn scale_coordinate(cfg: &ConfigFile) -> Option<usize> {
    match cfg.model.parameterization {
        Some(ParamKind::Scale) => Some(0),
        Some(ParamKind::Joint) => Some(1),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Initial distribution and prior

fn point_estimator(cfg: &ConfigFile, run_seed: u64) -> Result<PointEstimator> {
    let kind = cfg.init.estimator.unwrap_or(match cfg.model.kind {
        ModelKind::Gaussian => EstimatorKind::Mean,
        ModelKind::Ricker => EstimatorKind::RickerMsl,
        ModelKind::Cauchy => match cfg.model.parameterization.expect("validated") {
            ParamKind::Location => EstimatorKind::Median,
            ParamKind::Scale => EstimatorKind::Mad,
            ParamKind::Joint => EstimatorKind::MedianMad,
        },
    });
    Ok(match kind {
        EstimatorKind::Mean => mean_estimator(),
        EstimatorKind::Median => median_estimator(),
        EstimatorKind::Mad => mad_estimator(),
        EstimatorKind::MedianMad => median_mad_estimator(),
        EstimatorKind::RickerMsl => {
            let msl = SyntheticLikelihoodConfig {
                replicates: cfg.init.msl_replicates.unwrap_or(60),
                budget: cfg.init.msl_budget.unwrap_or(150),
                restarts: cfg.init.msl_restarts.unwrap_or(2),
            };
            ricker_msl_estimator(msl, derive_seed(run_seed, ESTIMATOR_TAG))
        }
    })
}

fn minibatch_config(cfg: &ConfigFile, run_seed: u64) -> Result<MinibatchConfig> {
    // disjoint blocks for large n, overlapping windows for small n
    let default_policy = if cfg.model.n < 100 {
        PolicyKind::Overlapping
    } else {
        PolicyKind::Disjoint
    };
    let policy = match cfg.init.policy.unwrap_or(default_policy) {
        PolicyKind::Disjoint => OverlapPolicy::Disjoint,
        PolicyKind::Overlapping => OverlapPolicy::Overlapping {
            stride: cfg.init.stride.unwrap_or(1),
        },
    };
    let mut mb = MinibatchConfig::new(
        cfg.init.nu.unwrap_or(0.5),
        policy,
        point_estimator(cfg, run_seed)?,
    );
    if let Some(k) = cfg.init.batches {
        mb = mb.with_batches(k);
    }
    Ok(mb)
}

/// Build the initial distribution `r_n` for one dataset.
pub fn build_init(
    cfg: &ConfigFile,
    dataset: &Dataset,
    model: &dyn GenerativeModel,
    run_seed: u64,
) -> Result<ProposalDistribution> {
    let seed = derive_seed(run_seed, INIT_TAG);
    match cfg.init.kind {
        InitKind::Flat => {
            let (lo, hi) = match cfg.init.truncation_box {
                Some([lo, hi]) => (lo, hi),
                None => crate::initial::location_box(dataset)?,
            };
            improper_location(lo, hi)
        }
        InitKind::OneOverSigma => {
            let (lo, hi) = match cfg.init.truncation_box {
                Some([lo, hi]) => (lo, hi),
                None => crate::initial::scale_box(dataset)?,
            };
            improper_scale(lo, hi)
        }
        InitKind::Parametric => {
            let mu_n = cfg.init.mu_n.expect("validated");
            let b_n = cfg.init.b_n.expect("validated");
            if b_n == 0.0 {
                let (lo, hi) = match cfg.init.truncation_box {
                    Some([lo, hi]) => (lo, hi),
                    None => crate::initial::location_box(dataset)?,
                };
                improper_location(lo, hi)
            } else {
                normal_proposal(mu_n, 1.0 / b_n)
            }
        }
        InitKind::T4 => {
            let center = cfg.model.theta0[0] + cfg.init.center_offset.unwrap_or(0.0);
            t4_proposal(center, cfg.init.scale.unwrap_or(1.0))
        }
        InitKind::Minibatch => {
            let mb = minibatch_config(cfg, run_seed)?;
            let kde = minibatch_rn(dataset, &mb, &mut substream(seed, 0))?;
            Ok(kde.to_proposal())
        }
        InitKind::RefinedMinibatch => {
            let mb = minibatch_config(cfg, run_seed)?;
            let pmc = PmcConfig {
                particles_per_iter: cfg.init.pmc_particles.unwrap_or(400),
                iterations: cfg.init.pmc_iterations.unwrap_or(4),
                ..PmcConfig::default()
            };
            let kde = refined_minibatch_rn(dataset, &mb, model, &pmc, seed)?;
            Ok(kde.to_proposal())
        }
    }
}

/// The prior: sampleable when it drives `r-abc`, density-only is enough for
/// `is-abc` weights.
pub fn build_prior(cfg: &ConfigFile, dataset: &Dataset) -> Result<ProposalDistribution> {
    let prior = cfg.prior.as_ref().expect("validated presence");
    match prior.kind {
        PriorKind::Flat => {
            if cfg.model.theta0.len() > 1 {
                // flat over a multivariate parameter: density-only, enough
                // for importance weights
                return Ok(ProposalDistribution::improper_flat());
            }
            let (lo, hi) = match prior.truncation_box {
                Some([lo, hi]) => (lo, hi),
                None => crate::initial::location_box(dataset)?,
            };
            improper_location(lo, hi)
        }
        PriorKind::OneOverSigma => match scale_coordinate(cfg) {
            Some(coord) if coord > 0 => {
                // joint parameter: 1/sigma density over (location, scale)
                Ok(ProposalDistribution::density_only(move |theta| {
                    let s = theta[coord];
                    if s > 0.0 {
                        -s.ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                }))
            }
            _ => {
                let (lo, hi) = match prior.truncation_box {
                    Some([lo, hi]) => (lo, hi),
                    None => crate::initial::scale_box(dataset)?,
                };
                improper_scale(lo, hi)
            }
        },
        PriorKind::T4 => {
            let center = cfg.model.theta0[0] + prior.center_offset.unwrap_or(0.0);
            t4_proposal(center, prior.scale.unwrap_or(1.0))
        }
    }
}

// ---------------------------------------------------------------------------
// Sampling

fn kernel_family(kind: KernelKind) -> KernelFamily {
    match kind {
        KernelKind::Gaussian => KernelFamily::Gaussian,
        KernelKind::Uniform => KernelFamily::Uniform,
        KernelKind::Epanechnikov => KernelFamily::Epanechnikov,
    }
}

/// Kernel for this run; multi-component summaries are standardized by the
/// median absolute pilot difference per component.
fn build_kernel(
    cfg: &ConfigFile,
    model: &dyn GenerativeModel,
    proposal: &ProposalDistribution,
    s_obs: &SummaryVector,
    run_seed: u64,
) -> Result<KernelSpec> {
    let family = kernel_family(cfg.sampler.kernel);
    let eps = cfg.sampler.epsilon.unwrap_or(1.0);
    if s_obs.dim() == 1 {
        return KernelSpec::new(family, eps);
    }
    let pilot_n = cfg.sampler.pilot.unwrap_or(200);
    let pilot = pilot_calibration(
        model,
        proposal,
        s_obs,
        pilot_n,
        derive_seed(run_seed, PILOT_TAG),
    )?;
    KernelSpec::with_component_scales(family, eps, &pilot.scales)
}

fn sampler_config(cfg: &ConfigFile, kernel: KernelSpec) -> SamplerConfig {
    match cfg.sampler.mode {
        ModeKind::AcceptanceProportion => SamplerConfig {
            stopping: StoppingRule::Proposals(cfg.sampler.proposals.expect("validated")),
            kernel,
            mode: AcceptanceMode::FixedAcceptanceProportion(cfg.sampler.q.expect("validated")),
        },
        ModeKind::FixedEpsilon => {
            let stopping = match (cfg.sampler.target_accepted, cfg.sampler.proposals) {
                (Some(target), _) => StoppingRule::Accepted {
                    target,
                    max_attempts: cfg
                        .sampler
                        .max_attempts
                        .unwrap_or_else(|| target.saturating_mul(100)),
                },
                (None, Some(n)) => StoppingRule::Proposals(n),
                (None, None) => unreachable!("validated"),
            };
            SamplerConfig {
                stopping,
                kernel,
                mode: AcceptanceMode::FixedEpsilon,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Regions

fn region_parameter_labels(cfg: &ConfigFile) -> Vec<String> {
    match cfg.model.kind {
        ModelKind::Gaussian => vec!["theta".into()],
        ModelKind::Cauchy => match cfg.model.parameterization.expect("validated") {
            ParamKind::Location => vec!["theta".into()],
            ParamKind::Scale => vec!["tau".into()],
            ParamKind::Joint => vec!["(theta,tau)".into()],
        },
        ModelKind::Ricker => vec!["log_r".into(), "log_sigma".into(), "log_phi".into()],
    }
}

/// Confidence regions for the accept-reject methods are built with the
/// centered matching maps `V = theta - theta_bar`, `W = theta_bar - theta`,
/// where `theta_bar` is the weighted mean of the (possibly adjusted)
/// accepted sample: the spread of the Monte Carlo draws around their own
/// mean stands in for the sampling spread of that mean, which is the
/// construction that stays valid when the summary estimate itself is too
/// noisy to center on (Cauchy mean summary). The importance-sampling method
/// reports the posterior credible interval/region instead, mirroring the
/// confidence-versus-credible comparison the tables make.
fn build_records(
    cfg: &ConfigFile,
    particles: &ParticleSet,
    s_obs: &SummaryVector,
    run_seed: u64,
) -> Result<Vec<RegionRecord>> {
    let labels = region_parameter_labels(cfg);
    let center = particles.weighted_mean()?;
    let credible = cfg.method.algorithm == Algorithm::IsAbc;
    let joint = matches!(
        (cfg.model.kind, cfg.model.parameterization),
        (ModelKind::Cauchy, Some(ParamKind::Joint))
    );
    let mut records = Vec::new();
    for &alpha in &cfg.run.alphas {
        if joint {
            let maps = if credible {
                // depth contour of the posterior draws themselves
                MatchingMaps::custom(
                    |theta, _| theta.values().to_vec(),
                    |theta, _| theta.values().to_vec(),
                    None,
                    None,
                )
            } else {
                MatchingMaps::centered(center.clone())
            };
            let mut region = depth_region(particles, &maps, s_obs, alpha, true)?;
            if let RegionKind::Depth(ref mut depth) = region.kind {
                let samples = cfg.run.volume_samples.unwrap_or(2000);
                depth.volume =
                    Some(depth.estimate_volume(samples, derive_seed(run_seed, VOLUME_TAG)));
            }
            records.push(RegionRecord {
                alpha,
                parameter: labels[0].clone(),
                region,
            });
        } else {
            for (coord, label) in labels.iter().enumerate() {
                let region = if credible {
                    let values = particles.theta_column(coord);
                    let weights = particles.weights();
                    let lo = crate::core::stats::weighted_quantile(&values, &weights, alpha / 2.0)?;
                    let hi =
                        crate::core::stats::weighted_quantile(&values, &weights, 1.0 - alpha / 2.0)?;
                    ConfidenceRegion {
                        kind: RegionKind::Interval { lo, hi, coord },
                        level: 1.0 - alpha,
                    }
                } else {
                    let maps = MatchingMaps::centered_coord(center.clone(), coord);
                    interval_from_w(particles, &maps, s_obs, alpha, Sided::TwoSidedCentral)?
                };
                records.push(RegionRecord {
                    alpha,
                    parameter: label.clone(),
                    region,
                });
            }
        }
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Single run and coverage study

/// The full pipeline on one dataset: adapt the model, build `r_n`, sample by
/// the configured method, optionally regression-adjust, and build the
/// configured regions at every level.
pub fn run_single(cfg: &ConfigFile, dataset: &Dataset, run_seed: u64) -> Result<SingleRun> {
    let base = build_model(cfg)?;
    let model = base.adapted_to(dataset);
    let s_obs = model.summarize(dataset)?;

    let init = build_init(cfg, dataset, &*model, run_seed)?;
    let sample_seed = derive_seed(run_seed, SAMPLE_TAG);

    let particles = match cfg.method.algorithm {
        Algorithm::RAbc => {
            let prior = build_prior(cfg, dataset)?;
            let kernel = build_kernel(cfg, &*model, &prior, &s_obs, run_seed)?;
            let sampler = sampler_config(cfg, kernel);
            abc_reject(&*model, &prior, &s_obs, &sampler, sample_seed)?
        }
        Algorithm::RAcc => {
            let kernel = build_kernel(cfg, &*model, &init, &s_obs, run_seed)?;
            let sampler = sampler_config(cfg, kernel);
            acc_reject(&*model, &init, &s_obs, &sampler, sample_seed)?
        }
        Algorithm::IsAbc => {
            let prior = build_prior(cfg, dataset)?;
            let kernel = build_kernel(cfg, &*model, &init, &s_obs, run_seed)?;
            let sampler = sampler_config(cfg, kernel);
            abc_importance(&*model, &prior, &init, &s_obs, &sampler, sample_seed)?
        }
    };

    let particles = if cfg.method.adjusted {
        let fit = fit_local_linear(&particles, &s_obs, true)?;
        regression_adjust(&particles, &fit, &s_obs)?
    } else {
        particles
    };

    let records = build_records(cfg, &particles, &s_obs, run_seed)?;
    Ok(SingleRun {
        particles,
        records,
        s_obs,
    })
}

/// The result of a coverage study, plus its CSV rendering.
#[derive(Debug)]
pub struct CoverageReport {
    pub rows: Vec<ResultRow>,
    pub failures: usize,
    pub replications: usize,
}

impl CoverageReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(COVERAGE_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv_line());
            out.push('\n');
        }
        out
    }
}

/// Simulate `replications` independent datasets at `theta0`, run the full
/// pipeline on each over disjoint substreams, and aggregate coverage of the
/// data-generating parameter. Per-dataset failures are excluded and counted;
/// the study fails when more than 5% of replications do.
pub fn run_coverage(cfg: &ConfigFile) -> Result<CoverageReport> {
    let start = std::time::Instant::now();
    let seed = cfg.run.seed;
    let truth = theta0(cfg);
    let base = build_model(cfg)?;
    let m = cfg.run.replications;

    let outcomes: Vec<Result<SingleRun>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(derive_seed(seed, DATA_TAG), j as u64);
            let dataset = base.simulate(&truth, &mut rng)?;
            run_single(cfg, &dataset, derive_seed(derive_seed(seed, RUN_TAG), j as u64))
        })
        .collect();

    let mut successes = Vec::new();
    let mut failures = 0usize;
    for (j, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(run) => successes.push(run),
            Err(e) => {
                failures += 1;
                if failures <= 3 {
                    log::warn!("replication {j} failed: {e}");
                }
            }
        }
    }
    if failures * 20 > m {
        return Err(Error::TooManyFailures {
            failed: failures,
            total: m,
        });
    }
    if successes.is_empty() {
        return Err(Error::TooManyFailures { failed: failures, total: m });
    }

    let total_attempts: u64 = successes.iter().map(|r| r.particles.attempts).sum();
    let mean_acceptance = successes
        .iter()
        .map(|r| r.particles.acceptance_proportion())
        .sum::<f64>()
        / successes.len() as f64;
    let (mode, mode_value) = match cfg.sampler.mode {
        ModeKind::AcceptanceProportion => ("q".to_string(), cfg.sampler.q.expect("validated")),
        ModeKind::FixedEpsilon => ("eps".to_string(), cfg.sampler.epsilon.expect("validated")),
    };

    let wall_secs = start.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    for &alpha in &cfg.run.alphas {
        for label in region_parameter_labels(cfg) {
            let regions: Vec<ConfidenceRegion> = successes
                .iter()
                .flat_map(|r| {
                    r.records
                        .iter()
                        .filter(|rec| rec.alpha == alpha && rec.parameter == label)
                        .map(|rec| rec.region.clone())
                })
                .collect();
            let (coverage, width) = coverage_score(&regions, &truth)?;
            rows.push(ResultRow {
                setting: cfg.label(),
                method: cfg.method.algorithm.label().into(),
                adjusted: cfg.method.adjusted,
                parameter: label,
                mode: mode.clone(),
                mode_value,
                alpha,
                coverage,
                median_width_or_volume: width,
                replications: successes.len(),
                failures,
                total_attempts,
                mean_acceptance,
                wall_secs,
            });
        }
    }
    log::info!(
        "coverage study '{}': {} replications, {failures} failures, {:.1}s",
        cfg.label(),
        m,
        wall_secs
    );
    Ok(CoverageReport {
        rows,
        failures,
        replications: m,
    })
}

/// CSV for a single-dataset run: one line per region record.
pub fn single_run_csv(cfg: &ConfigFile, run: &SingleRun) -> String {
    let mut out = String::from("setting,method,adjusted,parameter,alpha,record,acceptance,tolerance,attempts\n");
    for rec in &run.records {
        out.push_str(&format!(
            "{},{},{},{},{},\"{}\",{},{},{}\n",
            cfg.label(),
            cfg.method.algorithm.label(),
            cfg.method.adjusted,
            rec.parameter,
            fmt_g6(rec.alpha),
            rec.region.serialize_record(),
            fmt_g6(run.particles.acceptance_proportion()),
            fmt_g6(run.particles.tolerance),
            run.particles.attempts,
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Gaussian closed-form oracle suite

#[derive(Clone, Debug)]
pub struct OracleRow {
    pub epsilon: f64,
    pub mu_n: f64,
    pub b_n: f64,
    pub accepted: usize,
    pub sample_mean: f64,
    pub theta_eps: f64,
    pub mean_tolerance: f64,
    pub sample_var: f64,
    pub sigma2_eps: f64,
    pub var_tolerance: f64,
    pub ok: bool,
}

/// Accepted-sample mean and variance versus the exact closed form over the
/// canonical grid (eps x mu_n x b_n), 4 Monte Carlo standard errors each.
pub fn oracle_check(seed: u64, target_accepted: usize) -> Result<(Vec<OracleRow>, bool)> {
    let n = 100usize;
    let model = GaussianLocationModel::new(n);
    let truth = ParameterPoint::scalar(0.0).unwrap();
    let mut rng = substream(derive_seed(seed, DATA_TAG), 0);
    let dataset = model.simulate(&truth, &mut rng)?;
    let s_obs = model.summarize(&dataset)?;

    let mut combos = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        for mu_n in [0.0, 0.5] {
            for b_n in [0.0, 2.0] {
                combos.push((eps, mu_n, b_n));
            }
        }
    }

    let rows: Vec<OracleRow> = combos
        .par_iter()
        .enumerate()
        .map(|(idx, &(eps, mu_n, b_n))| -> Result<OracleRow> {
            let (theta_eps, sigma2_eps) = gaussian_acc_closed_form(s_obs[0], n, eps, mu_n, b_n);
            let proposal = if b_n == 0.0 {
                let half = 30.0 * sigma2_eps.sqrt();
                improper_location(s_obs[0] - half, s_obs[0] + half)?
            } else {
                normal_proposal(mu_n, 1.0 / b_n)?
            };
            let sampler = SamplerConfig {
                stopping: StoppingRule::Accepted {
                    target: target_accepted,
                    max_attempts: target_accepted.saturating_mul(5000),
                },
                kernel: KernelSpec::new(KernelFamily::Gaussian, eps)?,
                mode: AcceptanceMode::FixedEpsilon,
            };
            let set = acc_reject(
                &model,
                &proposal,
                &s_obs,
                &sampler,
                derive_seed(seed, 100 + idx as u64),
            )?;
            let thetas = set.theta_column(0);
            let m = thetas.len() as f64;
            let sample_mean = crate::core::stats::mean(&thetas);
            let sample_var = crate::core::stats::sample_variance(&thetas);
            let mean_tolerance = 4.0 * (sample_var / m).sqrt();
            let var_tolerance = 4.0 * sample_var * (2.0 / (m - 1.0)).sqrt();
            let ok = (sample_mean - theta_eps).abs() <= mean_tolerance
                && (sample_var - sigma2_eps).abs() <= var_tolerance;
            Ok(OracleRow {
                epsilon: eps,
                mu_n,
                b_n,
                accepted: set.len(),
                sample_mean,
                theta_eps,
                mean_tolerance,
                sample_var,
                sigma2_eps,
                var_tolerance,
                ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let all_ok = rows.iter().all(|r| r.ok);
    Ok((rows, all_ok))
}

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = String::from(
        "epsilon,mu_n,b_n,accepted,sample_mean,theta_eps,mean_tolerance,\
         sample_var,sigma2_eps,var_tolerance,ok\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_g6(r.epsilon),
            fmt_g6(r.mu_n),
            fmt_g6(r.b_n),
            r.accepted,
            fmt_g6(r.sample_mean),
            fmt_g6(r.theta_eps),
            fmt_g6(r.mean_tolerance),
            fmt_g6(r.sample_var),
            fmt_g6(r.sigma2_eps),
            fmt_g6(r.var_tolerance),
            r.ok,
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Posterior-contrast figure data (Cauchy, mean vs median summary)

#[derive(Clone, Debug)]
pub struct FigureStat {
    pub epsilon: f64,
    pub iqr_mean_summary: f64,
    pub iqr_median_summary: f64,
    pub ks_mean_summary: f64,
    pub ks_median_summary: f64,
}

/// Grid densities contrasting the exact Cauchy location posterior with the
/// accepted-sample densities under the mean and median summaries at each
/// tolerance. Returns the CSV (columns: epsilon, theta, target, abc_mean,
/// abc_median) and per-tolerance spread/distance statistics.
pub fn emit_figure1_data(
    n: usize,
    eps_list: &[f64],
    seed: u64,
    target_accepted: usize,
) -> Result<(String, Vec<FigureStat>)> {
    let theta0 = 10.0;
    let tau = 0.55;
    let location = CauchyModel::new(
        n,
        CauchyParameterization::Location { scale: tau },
        CauchySummary::Median,
    );
    let truth = ParameterPoint::scalar(theta0).unwrap();
    let mut rng = substream(derive_seed(seed, DATA_TAG), 0);
    let dataset = location.simulate(&truth, &mut rng)?;

    let med = crate::core::stats::median(dataset.observations())?;
    let mad = crate::core::stats::mad(dataset.observations())?;
    let half = 20.0 * mad.max(0.1);
    let flat = improper_location(med - half, med + half)?;

    // plotting grid over the proposal box; a finer central grid resolves the
    // sharp posterior for the distance computation
    let grid: Vec<f64> = (0..=1200)
        .map(|i| med - half + 2.0 * half * i as f64 / 1200.0)
        .collect();
    let target = crate::inference::cauchy_target_posterior_grid(&dataset, tau, &grid)?;
    let fine_grid: Vec<f64> = (0..=4000)
        .map(|i| med - 2.0 + 4.0 * i as f64 / 4000.0)
        .collect();
    let fine_target = crate::inference::cauchy_target_posterior_grid(&dataset, tau, &fine_grid)?;

    let mut csv = String::from("epsilon,theta,target,abc_mean,abc_median\n");
    let mut stats_out = Vec::new();
    for (k, &eps) in eps_list.iter().enumerate() {
        let mut densities = Vec::new();
        let mut iqrs = Vec::new();
        let mut kss = Vec::new();
        for (which, summary) in [CauchySummary::Mean, CauchySummary::Median].iter().enumerate() {
            let model = CauchyModel::new(
                n,
                CauchyParameterization::Location { scale: tau },
                *summary,
            );
            let s_obs = model.summarize(&dataset)?;
            let sampler = SamplerConfig {
                stopping: StoppingRule::Accepted {
                    target: target_accepted,
                    max_attempts: target_accepted.saturating_mul(100_000),
                },
                kernel: KernelSpec::new(KernelFamily::Gaussian, eps)?,
                mode: AcceptanceMode::FixedEpsilon,
            };
            let set = abc_reject(
                &model,
                &flat,
                &s_obs,
                &sampler,
                derive_seed(seed, 1000 + (2 * k + which) as u64),
            )?;
            let thetas = set.theta_column(0);
            let centers: Vec<ParameterPoint> = thetas
                .iter()
                .map(|&t| ParameterPoint::scalar(t).expect("finite theta"))
                .collect();
            let kde = KdeEstimate::new(centers.clone(), kde_bandwidth(&centers)?)?;
            densities.push(grid.iter().map(|&g| kde.density(&[g])).collect::<Vec<_>>());
            iqrs.push(crate::core::stats::interquartile_range(&thetas)?);
            kss.push(crate::inference::ks_distance_to_grid(
                &thetas,
                &set.weights(),
                &fine_grid,
                &fine_target,
            )?);
        }
        for (i, &g) in grid.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_g6(eps),
                fmt_g6(g),
                fmt_g6(target[i]),
                fmt_g6(densities[0][i]),
                fmt_g6(densities[1][i]),
            ));
        }
        stats_out.push(FigureStat {
            epsilon: eps,
            iqr_mean_summary: iqrs[0],
            iqr_median_summary: iqrs[1],
            ks_mean_summary: kss[0],
            ks_median_summary: kss[1],
        });
    }
    Ok((csv, stats_out))
}
