//! Thin command-line front end over the experiment harness. Each major
//! capability also has a runnable example under `examples/`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use acdc::core::{derive_seed, substream};
use acdc::harness::{
    emit_figure1_data, oracle_check, oracle_csv, run_coverage, run_single, single_run_csv,
    ConfigFile,
};

#[derive(Parser)]
#[command(
    name = "acdc",
    about = "Likelihood-free inference: approximate confidence distribution computing \
             and ABC with regression adjustment, plus a coverage benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Override the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output path (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the full-scale experiment settings instead of desk scale.
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline once on a single simulated dataset.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Replicated coverage study defined by a configuration file.
    Coverage {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Grid densities contrasting the exact Cauchy posterior with ABC under
    /// mean and median summaries.
    Figure1 {
        /// Sample size of the dataset.
        #[arg(long, default_value_t = 5000)]
        n: usize,
        /// Comma-separated tolerance list.
        #[arg(long, default_value = "0.1,0.01,0.001", value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 20260809)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Gaussian closed-form oracle suite.
    OracleCheck {
        #[arg(long, default_value_t = 20260809)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn configure_workers(workers: usize) {
    if workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            log::warn!("could not size the worker pool: {e}");
        }
    }
}

fn write_out(path: Option<&PathBuf>, default_name: &str, contents: &str) -> std::io::Result<PathBuf> {
    let path = path
        .cloned()
        .unwrap_or_else(|| PathBuf::from(default_name));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn load_config(path: &PathBuf, common: &CommonArgs) -> acdc::Result<ConfigFile> {
    let mut cfg = ConfigFile::load(path)?;
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if common.paper_scale {
        cfg.apply_paper_scale();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> acdc::Result<()> {
    match cli.command {
        Command::Run { config, common } => {
            configure_workers(common.workers);
            let cfg = load_config(&config, &common)?;
            let truth = acdc::harness::theta0(&cfg);
            let model = acdc::harness::build_model(&cfg)?;
            let mut rng = substream(derive_seed(cfg.run.seed, 0xDA7A), 0);
            let dataset = model.simulate(&truth, &mut rng)?;
            let run = run_single(&cfg, &dataset, derive_seed(cfg.run.seed, 0x51_4E))?;
            for rec in &run.records {
                println!(
                    "{} [{}] alpha={}: {}",
                    cfg.label(),
                    rec.parameter,
                    rec.alpha,
                    rec.region.serialize_record()
                );
            }
            println!(
                "acceptance proportion {:.6} over {} attempts (tolerance {:.6e})",
                run.particles.acceptance_proportion(),
                run.particles.attempts,
                run.particles.tolerance
            );
            let csv = single_run_csv(&cfg, &run);
            let default = format!("{}_single.csv", cfg.label());
            let out = common
                .out
                .clone()
                .or_else(|| cfg.run.output.clone().map(PathBuf::from));
            let path = write_out(out.as_ref(), &default, &csv)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Coverage { config, common } => {
            configure_workers(common.workers);
            let cfg = load_config(&config, &common)?;
            let report = run_coverage(&cfg)?;
            for row in &report.rows {
                println!(
                    "{} {} [{}] alpha={}: coverage {:.3}, median width/volume {:.4} \
                     ({} ok, {} failed)",
                    row.setting,
                    row.method,
                    row.parameter,
                    row.alpha,
                    row.coverage,
                    row.median_width_or_volume,
                    row.replications,
                    row.failures
                );
            }
            let csv = report.to_csv();
            let default = format!("{}_coverage.csv", cfg.label());
            let out = common
                .out
                .clone()
                .or_else(|| cfg.run.output.clone().map(PathBuf::from));
            let path = write_out(out.as_ref(), &default, &csv)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Figure1 {
            n,
            eps,
            seed,
            common,
        } => {
            configure_workers(common.workers);
            let target = if common.paper_scale { 2000 } else { 400 };
            let (csv, stats) = emit_figure1_data(n, &eps, seed, target)?;
            for s in &stats {
                println!(
                    "eps {}: IQR mean-summary {:.4} vs median-summary {:.4}; \
                     KS to target posterior {:.4} / {:.4}",
                    s.epsilon,
                    s.iqr_mean_summary,
                    s.iqr_median_summary,
                    s.ks_mean_summary,
                    s.ks_median_summary
                );
            }
            let path = write_out(common.out.as_ref(), "figure1.csv", &csv)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::OracleCheck { seed, common } => {
            configure_workers(common.workers);
            let (rows, all_ok) = oracle_check(seed, 5000)?;
            for r in &rows {
                println!(
                    "eps={} mu_n={} b_n={}: mean {:.5} vs {:.5} (tol {:.5}), \
                     var {:.5} vs {:.5} (tol {:.5}) -> {}",
                    r.epsilon,
                    r.mu_n,
                    r.b_n,
                    r.sample_mean,
                    r.theta_eps,
                    r.mean_tolerance,
                    r.sample_var,
                    r.sigma2_eps,
                    r.var_tolerance,
                    if r.ok { "ok" } else { "MISMATCH" }
                );
            }
            let path = write_out(common.out.as_ref(), "oracle_check.csv", &oracle_csv(&rows))?;
            println!("wrote {}", path.display());
            if all_ok {
                Ok(())
            } else {
                Err(acdc::Error::InvalidConfig(
                    "oracle check failed: sampled moments disagree with the closed form".into(),
                ))
            }
        }
    }
}
