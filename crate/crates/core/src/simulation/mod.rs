//! Monte Carlo harness: true distances of the standardized statistics to
//! normality, log-log rate fits, the bound-versus-truth table and the
//! large-`z` optimality demonstration.
//!
//! All randomness is drawn from streams keyed by `(seed, n, batch)`, so
//! results are bit-identical for any worker count.

mod demo;
mod distance;
mod experiment;
mod rate;
mod truth;

pub use demo::{optimality_demo, DemoReport, DemoRow, DemoSpec, ZRule};
pub use distance::{default_z_grid, ecdf_at, empirical_distance, kolmogorov_distance, Distances, Weight};
pub use experiment::{
    run_experiment, simulate_statistic, standardize, ExperimentSpec, RawDraws, SimulationRun, SizeResult,
    DEFAULT_BOOTSTRAP, DEFAULT_REPLICATES, REPLICATE_BATCH,
};
pub use rate::{rate_fit, rate_fit_bootstrap, RateEstimate};
pub use truth::{bound_vs_truth, TruthRow, TruthSpec, TruthTable};
