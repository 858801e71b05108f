//! Importance-sampling ABC: propose from a data-dependent distribution,
//! weight by prior / proposal, and inspect the effective sample size under
//! different priors.
//!
//! Run with: `cargo run --release --example importance_sampling`

use acdc::core::{substream, GenerativeModel, ParameterPoint};
use acdc::initial::{minibatch_rn, MinibatchConfig, OverlapPolicy};
use acdc::kernels::{KernelFamily, KernelSpec};
use acdc::models::{mean_estimator, t4_proposal, CauchyModel, CauchyParameterization, CauchySummary};
use acdc::samplers::{abc_importance, ProposalDistribution, SamplerConfig};

fn main() -> acdc::Result<()> {
    let (theta0, tau) = (10.0, 0.55);
    let model = CauchyModel::new(
        400,
        CauchyParameterization::Location { scale: tau },
        CauchySummary::Mean,
    );
    let data = model.simulate(&ParameterPoint::scalar(theta0)?, &mut substream(5, 0))?;
    let s_obs = model.summarize(&data)?;
    println!("observed sample mean: {:.4} (heavy-tailed; the mean never settles)", s_obs[0]);

    let mb = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, mean_estimator());
    let rn = minibatch_rn(&data, &mb, &mut substream(5, 1))?.to_proposal();
    let cfg = SamplerConfig::acceptance_proportion(
        KernelSpec::new(KernelFamily::Gaussian, 1.0)?,
        20_000,
        0.1,
    );

    let priors: [(&str, ProposalDistribution); 3] = [
        ("flat", ProposalDistribution::improper_flat()),
        ("t4(theta0, 1)", t4_proposal(theta0, 1.0)?),
        ("t4(theta0 + 3, 3)", t4_proposal(theta0 + 3.0, 3.0)?),
    ];
    for (name, prior) in priors {
        let set = abc_importance(&model, &prior, &rn, &s_obs, &cfg, 99)?;
        let mean = set.weighted_mean()?;
        println!(
            "prior {name:>16}: {} particles, ESS {:>7.1}, weighted mean {:.4}",
            set.len(),
            set.effective_sample_size(),
            mean[0]
        );
    }
    Ok(())
}
