//! A 95% confidence interval for the Cauchy location parameter from
//! regression-adjusted accept-reject ACC with the minibatch initial
//! distribution, median summary.
//!
//! Run with: `cargo run --release --example cauchy_location_interval`

use acdc::adjustment::{fit_local_linear, regression_adjust};
use acdc::core::{substream, GenerativeModel, ParameterPoint};
use acdc::inference::{interval_from_w, MatchingMaps, Sided};
use acdc::initial::{minibatch_rn, MinibatchConfig, OverlapPolicy};
use acdc::kernels::{KernelFamily, KernelSpec};
use acdc::models::{median_estimator, CauchyModel, CauchyParameterization, CauchySummary};
use acdc::samplers::{acc_reject, SamplerConfig};

fn main() -> acdc::Result<()> {
    let (theta0, tau) = (10.0, 0.55);
    let model = CauchyModel::new(
        400,
        CauchyParameterization::Location { scale: tau },
        CauchySummary::Median,
    );
    let data = model.simulate(&ParameterPoint::scalar(theta0)?, &mut substream(11, 0))?;
    let s_obs = model.summarize(&data)?;
    println!("true location {theta0}, observed median {:.4}", s_obs[0]);

    // initial distribution: kernel density estimate over 20 disjoint
    // subset medians
    let mb = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, median_estimator());
    let kde = minibatch_rn(&data, &mb, &mut substream(11, 1))?;
    println!(
        "minibatch r_n: {} centers, bandwidth {:.4}",
        kde.centers().len(),
        kde.bandwidth()[0]
    );

    // keep the closest 10% of 10^4 proposals
    let cfg = SamplerConfig::acceptance_proportion(
        KernelSpec::new(KernelFamily::Gaussian, 1.0)?,
        10_000,
        0.1,
    );
    let particles = acc_reject(&model, &kde.to_proposal(), &s_obs, &cfg, 12)?;
    println!(
        "accepted {} particles at distance threshold {:.5}",
        particles.len(),
        particles.tolerance
    );

    let fit = fit_local_linear(&particles, &s_obs, false)?;
    let adjusted = regression_adjust(&particles, &fit, &s_obs)?;
    println!(
        "regression slope {:.4}; variance {:.6} -> {:.6}",
        fit.slope[(0, 0)],
        particles.weighted_variance()?[0],
        adjusted.weighted_variance()?[0],
    );

    let center = adjusted.weighted_mean()?;
    let maps = MatchingMaps::centered_coord(center, 0);
    let region = interval_from_w(&adjusted, &maps, &s_obs, 0.05, Sided::TwoSidedCentral)?;
    println!("95% interval: {}", region.serialize_record());
    println!(
        "covers the generating value: {}",
        region.contains(&ParameterPoint::scalar(theta0)?)
    );
    Ok(())
}
