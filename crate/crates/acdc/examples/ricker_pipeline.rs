//! The full Ricker pipeline on one dataset: subset synthetic-likelihood
//! estimates, the minibatch initial distribution, adjusted ACC sampling, and
//! marginal intervals for (log r, log sigma, log phi).
//!
//! Run with: `cargo run --release --example ricker_pipeline`

use acdc::adjustment::{fit_local_linear, regression_adjust};
use acdc::core::{stats, substream, GenerativeModel, ParameterPoint};
use acdc::inference::{interval_from_w, MatchingMaps, Sided};
use acdc::initial::{minibatch_rn, MinibatchConfig, OverlapPolicy};
use acdc::kernels::{KernelFamily, KernelSpec};
use acdc::models::{ricker_msl_estimator, RickerModel, SyntheticLikelihoodConfig};
use acdc::samplers::{acc_reject, pilot_calibration, SamplerConfig};

fn main() -> acdc::Result<()> {
    let truth = ParameterPoint::new(vec![3.8, 0.3f64.ln(), 10.0f64.ln()])?;
    let model = RickerModel::new(50);
    let data = model.simulate(&truth, &mut substream(17, 0))?;
    println!(
        "series: mean {:.2}, zeros {}, max {}",
        stats::mean(data.observations()),
        data.observations().iter().filter(|v| **v == 0.0).count(),
        data.observations().iter().cloned().fold(0.0f64, f64::max)
    );

    let model = {
        let adapted: Box<dyn GenerativeModel> = model.adapted_to(&data);
        adapted
    };
    let s_obs = model.summarize(&data)?;

    // subset estimates: 40 overlapping windows of 10 observations
    let msl = SyntheticLikelihoodConfig {
        replicates: 60,
        budget: 150,
        restarts: 2,
    };
    let nu = 10.0f64.ln() / 50.0f64.ln();
    let mb = MinibatchConfig::new(
        nu,
        OverlapPolicy::Overlapping { stride: 1 },
        ricker_msl_estimator(msl, 1234),
    )
    .with_batches(40);
    let kde = minibatch_rn(&data, &mb, &mut substream(17, 1))?;
    for (j, name) in [(0usize, "log_r"), (1, "log_sigma"), (2, "log_phi")] {
        let col: Vec<f64> = kde.centers().iter().map(|c| c[j]).collect();
        println!(
            "{name:>10} subset estimates: mean {:+.3}, sd {:.3}, range [{:+.3}, {:+.3}] \
             (true {:+.3}), bandwidth {:.3}",
            stats::mean(&col),
            stats::sample_sd(&col),
            col.iter().cloned().fold(f64::INFINITY, f64::min),
            col.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            truth[j],
            kde.bandwidth()[j],
        );
    }

    let rn = kde.to_proposal();
    let pilot = pilot_calibration(&*model, &rn, &s_obs, 200, 9)?;
    let kernel = KernelSpec::with_component_scales(KernelFamily::Gaussian, 1.0, &pilot.scales)?;
    let cfg = SamplerConfig::acceptance_proportion(kernel, 10_000, 0.1);
    let particles = acc_reject(&*model, &rn, &s_obs, &cfg, 21)?;

    let fit = fit_local_linear(&particles, &s_obs, true)?;
    let adjusted = regression_adjust(&particles, &fit, &s_obs)?;
    let center = adjusted.weighted_mean()?;
    for (j, name) in [(0usize, "log_r"), (1, "log_sigma"), (2, "log_phi")] {
        let maps = MatchingMaps::centered_coord(center.clone(), j);
        let region = interval_from_w(&adjusted, &maps, &s_obs, 0.05, Sided::TwoSidedCentral)?;
        println!(
            "{name:>10}: center {:+.3}, 95% {}  covers truth: {}",
            center[j],
            region.serialize_record(),
            region.contains(&truth)
        );
    }
    Ok(())
}
