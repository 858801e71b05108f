//! Accept-reject ACC on the Gaussian location model, checked against the
//! exact closed form of the accepted-sample law.
//!
//! With a normal initial distribution N(mu_n, 1/b_n^2) and a Gaussian kernel
//! at tolerance eps, the accepted parameters are exactly
//! N(theta_eps, sigma_eps^2), so the sampler can be validated to Monte Carlo
//! accuracy.
//!
//! Run with: `cargo run --release --example gaussian_oracle`

use acdc::core::stats;
use acdc::core::{ParameterPoint, substream};
use acdc::kernels::{KernelFamily, KernelSpec};
use acdc::models::{gaussian_acc_closed_form, normal_proposal, GaussianLocationModel};
use acdc::samplers::{acc_reject, AcceptanceMode, SamplerConfig, StoppingRule};

fn main() -> acdc::Result<()> {
    let n = 100;
    let model = GaussianLocationModel::new(n);
    let truth = ParameterPoint::scalar(0.0)?;
    let data = {
        use acdc::core::GenerativeModel;
        model.simulate(&truth, &mut substream(7, 0))?
    };
    let s_obs = {
        use acdc::core::GenerativeModel;
        model.summarize(&data)?
    };
    println!("observed sample mean: {:.5}", s_obs[0]);

    let (mu_n, b_n) = (0.5, 2.0);
    let r_n = normal_proposal(mu_n, 1.0 / b_n)?;
    for eps in [0.2, 0.1, 0.05] {
        let cfg = SamplerConfig {
            stopping: StoppingRule::Accepted {
                target: 20_000,
                max_attempts: 20_000 * 500,
            },
            kernel: KernelSpec::new(KernelFamily::Gaussian, eps)?,
            mode: AcceptanceMode::FixedEpsilon,
        };
        let set = acc_reject(&model, &r_n, &s_obs, &cfg, 42)?;
        let thetas = set.theta_column(0);
        let (mean, var) = (stats::mean(&thetas), stats::sample_variance(&thetas));
        let (theta_eps, sigma2_eps) = gaussian_acc_closed_form(s_obs[0], n, eps, mu_n, b_n);
        println!(
            "eps {eps:>4}: accepted {:>5} of {:>8} | mean {mean:.5} vs exact {theta_eps:.5} \
             | var {var:.5} vs exact {sigma2_eps:.5}",
            set.len(),
            set.attempts
        );
    }
    Ok(())
}
