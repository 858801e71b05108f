//! Experiment configuration: a single TOML file, fully validated before any
//! simulation starts.
//!
//! ```toml
//! [model]                      # what generates the data
//! kind = "cauchy"              # gaussian | cauchy | ricker
//! n = 400
//! theta0 = [10.0]              # data-generating parameter
//! parameterization = "location" # cauchy only: location | scale | joint
//! scale = 0.55                 # cauchy: known scale (location runs)
//! location = 10.0              # cauchy: known location (scale runs)
//! summary = "median"           # cauchy: mean | median | mad | median-mad
//!
//! [method]
//! algorithm = "r-acc"          # r-abc | r-acc | is-abc
//! adjusted = true
//!
//! [init]                       # the initial distribution r_n
//! kind = "minibatch"           # flat | one-over-sigma | parametric | t4
//!                              #   | minibatch | refined-minibatch
//! nu = 0.5                     # minibatch subset exponent
//! policy = "disjoint"          # disjoint | overlapping
//! stride = 1                   # overlapping windows
//! batches = 40                 # optional explicit subset count
//! estimator = "median"         # mean | median | mad | median-mad | ricker-msl
//! mu_n = 0.0                   # parametric: N(mu_n, 1/b_n^2)
//! b_n = 2.0
//! center_offset = 0.0          # t4: location = theta0 + offset
//! scale = 1.0                  # t4 scale
//! box = [4.5, 15.5]            # flat / one-over-sigma truncation box
//! pmc_particles = 400          # refined-minibatch settings
//! pmc_iterations = 4
//! msl_replicates = 60          # ricker-msl estimator settings
//! msl_budget = 150
//! msl_restarts = 2
//!
//! [prior]                      # r-abc proposal / is-abc weight numerator
//! kind = "flat"                # flat | one-over-sigma | t4
//! center_offset = 0.0
//! scale = 3.0
//! box = [4.5, 15.5]
//!
//! [sampler]
//! mode = "acceptance-proportion"   # or fixed-epsilon
//! proposals = 10000
//! q = 0.1                      # acceptance proportion
//! epsilon = 0.001              # fixed-epsilon tolerance
//! kernel = "gaussian"          # gaussian | uniform | epanechnikov
//! target_accepted = 5000       # fixed-epsilon: stop at this many accepted
//! max_attempts = 500000        #   proposals cap for target_accepted
//! pilot = 200                  # pilot size for summary standardization
//!
//! [run]
//! label = "table3a-i"
//! alphas = [0.05]
//! replications = 200
//! seed = 20260809
//! output = "out/table3a_i.csv"
//! volume_samples = 2000        # Monte Carlo volume of depth regions
//!
//! [paper_scale]                # applied by --paper-scale
//! replications = 300
//! proposals = 100000
//! ```

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelSection,
    pub method: MethodSection,
    pub init: InitSection,
    #[serde(default)]
    pub prior: Option<PriorSection>,
    pub sampler: SamplerSection,
    pub run: RunSection,
    #[serde(default)]
    pub paper_scale: Option<PaperScaleSection>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Gaussian,
    Cauchy,
    Ricker,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    Location,
    Scale,
    Joint,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SummaryKind {
    Mean,
    Median,
    Mad,
    MedianMad,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub n: usize,
    pub theta0: Vec<f64>,
    #[serde(default)]
    pub parameterization: Option<ParamKind>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub location: Option<f64>,
    #[serde(default)]
    pub summary: Option<SummaryKind>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    RAbc,
    RAcc,
    IsAbc,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::RAbc => "r-abc",
            Algorithm::RAcc => "r-acc",
            Algorithm::IsAbc => "is-abc",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    pub algorithm: Algorithm,
    pub adjusted: bool,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Flat,
    OneOverSigma,
    Parametric,
    T4,
    Minibatch,
    RefinedMinibatch,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Disjoint,
    Overlapping,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Mean,
    Median,
    Mad,
    MedianMad,
    RickerMsl,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub kind: InitKind,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub policy: Option<PolicyKind>,
    #[serde(default)]
    pub stride: Option<usize>,
    #[serde(default)]
    pub batches: Option<usize>,
    #[serde(default)]
    pub estimator: Option<EstimatorKind>,
    #[serde(default)]
    pub mu_n: Option<f64>,
    #[serde(default)]
    pub b_n: Option<f64>,
    #[serde(default)]
    pub center_offset: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default, rename = "box")]
    pub truncation_box: Option<[f64; 2]>,
    #[serde(default)]
    pub pmc_particles: Option<usize>,
    #[serde(default)]
    pub pmc_iterations: Option<usize>,
    #[serde(default)]
    pub msl_replicates: Option<usize>,
    #[serde(default)]
    pub msl_budget: Option<usize>,
    #[serde(default)]
    pub msl_restarts: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    Flat,
    OneOverSigma,
    T4,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub kind: PriorKind,
    #[serde(default)]
    pub center_offset: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default, rename = "box")]
    pub truncation_box: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    FixedEpsilon,
    AcceptanceProportion,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Gaussian,
    Uniform,
    Epanechnikov,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub mode: ModeKind,
    #[serde(default)]
    pub proposals: Option<usize>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_kernel")]
    pub kernel: KernelKind,
    #[serde(default)]
    pub target_accepted: Option<usize>,
    #[serde(default)]
    pub max_attempts: Option<usize>,
    #[serde(default)]
    pub pilot: Option<usize>,
}

fn default_kernel() -> KernelKind {
    KernelKind::Gaussian
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub volume_samples: Option<usize>,
}

fn default_alphas() -> Vec<f64> {
    vec![0.05]
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaperScaleSection {
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub proposals: Option<usize>,
    #[serde(default)]
    pub target_accepted: Option<usize>,
    #[serde(default)]
    pub pmc_particles: Option<usize>,
    #[serde(default)]
    pub pmc_iterations: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Swap in the full-scale settings (paper-scale runs).
    pub fn apply_paper_scale(&mut self) {
        if let Some(ps) = self.paper_scale {
            if let Some(m) = ps.replications {
                self.run.replications = m;
            }
            if let Some(n) = ps.proposals {
                self.sampler.proposals = Some(n);
            }
            if let Some(t) = ps.target_accepted {
                self.sampler.target_accepted = Some(t);
            }
            if let Some(p) = ps.pmc_particles {
                self.init.pmc_particles = Some(p);
            }
            if let Some(i) = ps.pmc_iterations {
                self.init.pmc_iterations = Some(i);
            }
        }
    }

    pub fn label(&self) -> String {
        self.run.label.clone().unwrap_or_else(|| "experiment".into())
    }

    /// Full structural validation; nothing is simulated until this passes.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));

        // model
        let m = &self.model;
        if m.n < 1 {
            return fail("model.n must be at least 1".into());
        }
        if m.theta0.iter().any(|v| !v.is_finite()) {
            return fail("model.theta0 must be finite".into());
        }
        match m.kind {
            ModelKind::Gaussian => {
                if m.theta0.len() != 1 {
                    return fail("gaussian model expects a scalar theta0".into());
                }
            }
            ModelKind::Cauchy => {
                let param = m
                    .parameterization
                    .ok_or_else(|| Error::InvalidConfig("cauchy model needs parameterization".into()))?;
                let summary = m
                    .summary
                    .ok_or_else(|| Error::InvalidConfig("cauchy model needs summary".into()))?;
                match param {
                    ParamKind::Location => {
                        if m.theta0.len() != 1 {
                            return fail("location parameterization expects scalar theta0".into());
                        }
                        match m.scale {
                            Some(s) if s > 0.0 => {}
                            _ => return fail("location parameterization needs scale > 0".into()),
                        }
                        if matches!(summary, SummaryKind::Mad | SummaryKind::MedianMad) {
                            return fail("location runs use mean or median summaries".into());
                        }
                    }
                    ParamKind::Scale => {
                        if m.theta0.len() != 1 || m.theta0[0] <= 0.0 {
                            return fail("scale parameterization expects scalar theta0 > 0".into());
                        }
                        if m.location.is_none() {
                            return fail("scale parameterization needs location".into());
                        }
                        if summary != SummaryKind::Mad {
                            return fail("scale runs use the mad summary".into());
                        }
                    }
                    ParamKind::Joint => {
                        if m.theta0.len() != 2 || m.theta0[1] <= 0.0 {
                            return fail("joint parameterization expects theta0 = [loc, scale > 0]".into());
                        }
                        if summary != SummaryKind::MedianMad {
                            return fail("joint runs use the median-mad summary".into());
                        }
                    }
                }
            }
            ModelKind::Ricker => {
                if m.theta0.len() != 3 {
                    return fail("ricker model expects theta0 = [log r, log sigma, log phi]".into());
                }
                if m.n < 6 {
                    return fail("ricker model needs n >= 6 for its summary set".into());
                }
            }
        }

        // init
        let i = &self.init;
        match i.kind {
            InitKind::Parametric => {
                if m.kind != ModelKind::Gaussian {
                    return fail("parametric init is a Gaussian-model construction".into());
                }
                if i.mu_n.is_none() || i.b_n.is_none() {
                    return fail("parametric init needs mu_n and b_n".into());
                }
                if i.b_n.unwrap() < 0.0 {
                    return fail("parametric init needs b_n >= 0".into());
                }
            }
            InitKind::T4 => {
                if !(i.scale.unwrap_or(1.0) > 0.0) {
                    return fail("t4 init needs scale > 0".into());
                }
                if m.theta0.len() != 1 {
                    return fail("t4 init applies to scalar parameters".into());
                }
            }
            InitKind::Minibatch | InitKind::RefinedMinibatch => {
                let nu = i.nu.unwrap_or(0.5);
                if !(nu > 0.0 && nu < 1.0) {
                    return fail(format!("init.nu must lie in (0,1), got {nu}"));
                }
                if i.policy == Some(PolicyKind::Overlapping) && i.stride == Some(0) {
                    return fail("overlapping policy needs stride >= 1".into());
                }
                if i.kind == InitKind::RefinedMinibatch && i.pmc_iterations.unwrap_or(4) > 0 {
                    let particles = i.pmc_particles.unwrap_or(400);
                    if particles == 0 {
                        return fail("refined-minibatch needs pmc_particles >= 1".into());
                    }
                }
            }
            InitKind::OneOverSigma => {
                if let Some([lo, hi]) = i.truncation_box {
                    if !(lo > 0.0 && lo < hi) {
                        return fail(format!("one-over-sigma box [{lo}, {hi}] is invalid"));
                    }
                }
            }
            InitKind::Flat => {
                if let Some([lo, hi]) = i.truncation_box {
                    if !(lo < hi) {
                        return fail(format!("flat box [{lo}, {hi}] is empty"));
                    }
                }
            }
        }

        // prior: required by r-abc (as the proposal) and is-abc (as weights)
        match self.method.algorithm {
            Algorithm::RAbc | Algorithm::IsAbc => {
                if self.prior.is_none() {
                    return fail(format!(
                        "method {} needs a [prior] section",
                        self.method.algorithm.label()
                    ));
                }
            }
            Algorithm::RAcc => {}
        }
        if let Some(p) = &self.prior {
            if p.kind == PriorKind::T4 && !(p.scale.unwrap_or(1.0) > 0.0) {
                return fail("t4 prior needs scale > 0".into());
            }
            if let Some([lo, hi]) = p.truncation_box {
                if !(lo < hi) {
                    return fail(format!("prior box [{lo}, {hi}] is empty"));
                }
                if p.kind == PriorKind::OneOverSigma && lo <= 0.0 {
                    return fail("one-over-sigma prior box must be positive".into());
                }
            }
        }

        // sampler
        let s = &self.sampler;
        match s.mode {
            ModeKind::AcceptanceProportion => {
                let q = s
                    .q
                    .ok_or_else(|| Error::InvalidConfig("acceptance-proportion mode needs q".into()))?;
                if !(q > 0.0 && q < 1.0) {
                    return fail(format!("sampler.q must lie in (0,1), got {q}"));
                }
                if s.proposals.unwrap_or(0) == 0 {
                    return fail("acceptance-proportion mode needs proposals >= 1".into());
                }
            }
            ModeKind::FixedEpsilon => {
                let eps = s
                    .epsilon
                    .ok_or_else(|| Error::InvalidConfig("fixed-epsilon mode needs epsilon".into()))?;
                if !(eps > 0.0) || !eps.is_finite() {
                    return fail(format!("sampler.epsilon must be positive, got {eps}"));
                }
                if s.proposals.is_none() && s.target_accepted.is_none() {
                    return fail("fixed-epsilon mode needs proposals or target_accepted".into());
                }
            }
        }

        // run
        if self.run.replications == 0 {
            return fail("run.replications must be at least 1".into());
        }
        for a in &self.run.alphas {
            if !(*a > 0.0 && *a < 1.0) {
                return fail(format!("alpha {a} outside (0,1)"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[model]
kind = "cauchy"
n = 400
theta0 = [10.0]
parameterization = "location"
scale = 0.55
summary = "median"

[method]
algorithm = "r-acc"
adjusted = true

[init]
kind = "minibatch"
nu = 0.5
policy = "disjoint"
estimator = "median"

[sampler]
mode = "acceptance-proportion"
proposals = 10000
q = 0.1

[run]
replications = 200
seed = 1
"#;

    #[test]
    fn good_config_parses() {
        let cfg = ConfigFile::parse(GOOD).unwrap();
        assert_eq!(cfg.model.kind, ModelKind::Cauchy);
        assert_eq!(cfg.run.alphas, vec![0.05]);
    }

    #[test]
    fn negative_epsilon_rejected_before_any_simulation() {
        let bad = GOOD
            .replace("mode = \"acceptance-proportion\"", "mode = \"fixed-epsilon\"")
            .replace("q = 0.1", "epsilon = -0.001");
        assert!(matches!(
            ConfigFile::parse(&bad),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = GOOD.replace("seed = 1", "seed = 1\nbogus = 2");
        assert!(matches!(ConfigFile::parse(&bad), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn is_abc_requires_prior() {
        let bad = GOOD.replace("algorithm = \"r-acc\"", "algorithm = \"is-abc\"");
        assert!(ConfigFile::parse(&bad).is_err());
    }

    #[test]
    fn paper_scale_overrides() {
        let text = format!("{GOOD}\n[paper_scale]\nreplications = 300\nproposals = 100000\n");
        let mut cfg = ConfigFile::parse(&text).unwrap();
        cfg.apply_paper_scale();
        assert_eq!(cfg.run.replications, 300);
        assert_eq!(cfg.sampler.proposals, Some(100000));
    }
}
