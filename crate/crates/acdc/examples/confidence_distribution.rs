//! From accepted draws to a confidence distribution: the reflected empirical
//! distribution `2 theta_hat - theta_i`, its quantiles as one-sided bounds,
//! and the matching between Monte Carlo spread and sampling spread that
//! justifies them.
//!
//! Run with: `cargo run --release --example confidence_distribution`

use acdc::core::{stats, substream, GenerativeModel, ParameterPoint};
use acdc::inference::{cd_from_particles, empirical_quantile, MatchingMaps};
use acdc::initial::improper_location;
use acdc::kernels::{KernelFamily, KernelSpec};
use acdc::models::{CauchyModel, CauchyParameterization, CauchySummary};
use acdc::samplers::{acc_reject, AcceptanceMode, SamplerConfig, StoppingRule};

fn main() -> acdc::Result<()> {
    let (theta0, tau, n) = (10.0, 0.55, 400);
    let model = CauchyModel::new(
        n,
        CauchyParameterization::Location { scale: tau },
        CauchySummary::Median,
    );
    let data = model.simulate(&ParameterPoint::scalar(theta0)?, &mut substream(23, 0))?;
    let s_obs = model.summarize(&data)?;
    let theta_hat = s_obs[0];

    // flat initial distribution over a band around the observed median
    let flat = improper_location(theta_hat - 1.0, theta_hat + 1.0)?;
    let cfg = SamplerConfig {
        stopping: StoppingRule::Accepted {
            target: 5000,
            max_attempts: 5_000_000,
        },
        kernel: KernelSpec::new(KernelFamily::Uniform, 0.01)?,
        mode: AcceptanceMode::FixedEpsilon,
    };
    let particles = acc_reject(&model, &flat, &s_obs, &cfg, 31)?;
    println!(
        "{} accepted draws (acceptance {:.4})",
        particles.len(),
        particles.acceptance_proportion()
    );

    let cd = cd_from_particles(&particles, theta_hat)?;
    println!("confidence distribution median: {:.4} (observed median {theta_hat:.4})", cd.median());
    for level in [0.9, 0.95, 0.99] {
        let upper = cd.quantile(level)?;
        println!("  {level:.2} upper bound: {upper:.4}");
    }
    // the reflected bound equals 2 theta_hat minus the lower quantile
    let direct = 2.0 * theta_hat - empirical_quantile(&particles.theta_column(0), 0.05)?;
    println!("0.95 bound via reflection identity: {direct:.4}");

    // the Monte Carlo copy {theta_i - theta_hat} mirrors the sampling spread
    // of the median around the truth
    let maps = MatchingMaps::location(0);
    let v: Vec<f64> = particles
        .particles
        .iter()
        .map(|p| maps.v(&p.theta, &s_obs)[0])
        .collect();
    let fresh: Vec<f64> = (0..5000)
        .map(|i| {
            let mut rng = substream(77, i);
            model.simulate_summary(&ParameterPoint::scalar(theta0).unwrap(), &mut rng).unwrap()[0]
                - theta0
        })
        .collect();
    let ks = stats::two_sample_ks(&v, &fresh)?;
    println!(
        "KS between Monte Carlo copies and sampling copies: {ks:.4} \
         (1% critical value {:.4})",
        stats::ks_critical_value(v.len(), fresh.len(), 0.01)
    );
    Ok(())
}
