//! Monte Carlo experiment harnesses, summary statistics and the
//! application-level calculators.

mod apps;
pub mod calibration;
mod config;
mod runs;
mod stats;

pub use apps::{cg_iterations, lop_estimate};
pub use config::{EpsilonKnobs, ExperimentConfig, MOffset, TrialRecord, TRIAL_CSV_HEADER};
pub use runs::{
    run_complex_exact, run_condition, run_coupled_relaxation, run_nonsquare,
    run_smoothed_singular, run_universality_smallest, KsRow, MarginRow, QuantileRow, RunOutput,
    SlopeRow, SummaryStats,
};
pub use stats::{
    bootstrap_log_slope_ci, dkw_bound, ks_critical_95, ks_statistic, ks_two_sample, median,
    ols_slope, quantile_sorted, survival, KOLMOGOROV_95,
};
