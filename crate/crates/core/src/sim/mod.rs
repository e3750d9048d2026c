//! Seeded Monte Carlo experiments: configuration, execution, reports.

pub mod config;
pub mod harness;
pub mod output;

pub use config::{ExperimentConfig, OutputConfig, EXPERIMENT_FORMAT, EXPERIMENT_VERSION};
pub use harness::{
    compare, compare_paired, curve_times, mean_stderr, run_experiment, run_experiment_on, run_trial, Comparison,
    EpochStat, ExperimentReport, NeumaierSum, PolicyDiagnostics, PolicyReport,
};
pub use output::{render_svg, write_curves_csv, write_groups_csv, write_per_seed_csv, write_report_files, OutputFiles};
