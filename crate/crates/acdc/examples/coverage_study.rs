//! A small replicated coverage study driven by the same configuration format
//! the command line uses.
//!
//! Run with: `cargo run --release --example coverage_study`

use acdc::harness::{run_coverage, ConfigFile};

const CONFIG: &str = r#"
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
proposals = 5000
q = 0.1

[run]
label = "coverage-demo"
alphas = [0.05, 0.1]
replications = 100
seed = 7
"#;

fn main() -> acdc::Result<()> {
    let cfg = ConfigFile::parse(CONFIG)?;
    let report = run_coverage(&cfg)?;
    for row in &report.rows {
        println!(
            "alpha {:>4}: coverage {:.3} (nominal {:.2}), median width {:.4}, \
             mean acceptance {:.3}",
            row.alpha,
            row.coverage,
            1.0 - row.alpha,
            row.median_width_or_volume,
            row.mean_acceptance
        );
    }
    print!("{}", report.to_csv());
    Ok(())
}
