//! A joint 95% depth-contour region for the Cauchy (location, scale) pair
//! from the (median, MAD) summary, with Monte Carlo volume estimation.
//!
//! Run with: `cargo run --release --example joint_depth_region`

use acdc::adjustment::{fit_local_linear, regression_adjust};
use acdc::core::{substream, GenerativeModel, ParameterPoint};
use acdc::inference::{depth_region, MatchingMaps, RegionKind};
use acdc::initial::{minibatch_rn, MinibatchConfig, OverlapPolicy};
use acdc::kernels::{KernelFamily, KernelSpec};
use acdc::models::{median_mad_estimator, CauchyModel, CauchyParameterization, CauchySummary};
use acdc::samplers::{acc_reject, pilot_calibration, SamplerConfig};

fn main() -> acdc::Result<()> {
    let truth = ParameterPoint::new(vec![10.0, 0.55])?;
    let model = CauchyModel::new(400, CauchyParameterization::Joint, CauchySummary::MedianMad);
    let data = model.simulate(&truth, &mut substream(3, 0))?;
    let s_obs = model.summarize(&data)?;
    println!("observed (median, MAD) = ({:.4}, {:.4})", s_obs[0], s_obs[1]);

    let mb = MinibatchConfig::new(0.5, OverlapPolicy::Disjoint, median_mad_estimator());
    let rn = minibatch_rn(&data, &mb, &mut substream(3, 1))?.to_proposal();

    // standardize the two summary components before taking distances
    let pilot = pilot_calibration(&model, &rn, &s_obs, 200, 77)?;
    println!("pilot component scales: {:?}", pilot.scales);
    let kernel = KernelSpec::with_component_scales(KernelFamily::Gaussian, 1.0, &pilot.scales)?;
    let cfg = SamplerConfig::acceptance_proportion(kernel, 10_000, 0.1);
    let particles = acc_reject(&model, &rn, &s_obs, &cfg, 4)?;

    let fit = fit_local_linear(&particles, &s_obs, true)?;
    let adjusted = regression_adjust(&particles, &fit, &s_obs)?;

    let center = adjusted.weighted_mean()?;
    println!("accepted-sample mean: ({:.4}, {:.4})", center[0], center[1]);
    let maps = MatchingMaps::centered(center);
    let mut region = depth_region(&adjusted, &maps, &s_obs, 0.05, true)?;
    if let RegionKind::Depth(ref mut depth) = region.kind {
        depth.volume = Some(depth.estimate_volume(20_000, 5));
    }
    println!("region: {}", region.serialize_record());
    println!("estimated volume: {:.5}", region.width_or_volume().unwrap());
    println!("covers the generating pair: {}", region.contains(&truth));

    // probe a few points
    for (loc, scale) in [(10.0, 0.55), (10.1, 0.55), (10.0, 0.9), (12.0, 0.55)] {
        let p = ParameterPoint::new(vec![loc, scale])?;
        println!("  ({loc:>5}, {scale:>4}) in region: {}", region.contains(&p));
    }
    Ok(())
}
