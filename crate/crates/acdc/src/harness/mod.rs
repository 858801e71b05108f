//! Experiment runner: configuration parsing, the single-run and coverage
//! pipelines, closed-form oracle checks, posterior-contrast figure data,
//! and deterministic CSV emission.

pub mod config;
mod csvfmt;
mod pipeline;

pub use config::ConfigFile;
pub use csvfmt::fmt_g6;
pub use pipeline::{
    build_init, build_model, build_prior, emit_figure1_data, oracle_check, oracle_csv,
    run_coverage, run_single, single_run_csv, theta0, CoverageReport, FigureStat, OracleRow,
    RegionRecord, ResultRow, SingleRun, COVERAGE_CSV_HEADER,
};
