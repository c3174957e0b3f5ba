//! Statistical validators and the named experiments.

pub mod experiments;
mod palm;
mod report;
pub mod stats;

pub use experiments::{run_experiment, EXPERIMENTS};
pub use palm::{palm_recenter, palm_window, shock_construct, ShockReading};
pub use report::{Comparison, ExperimentReport, SampleTable, TestRecord, Verdict};
pub use stats::{chi_square_poisson, correlation_test, gof_exponential_gaps, ks_one_sample, pearson, two_sample_test, TestOutcome};
