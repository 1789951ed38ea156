//! Metrics, baselines, significance tests and benchmark tables.

mod benchmark;
mod metrics;
pub mod render;
mod report;
mod ttest;

pub use benchmark::{benchmark, BenchmarkConfig, BenchmarkOutput, Comparison, GridCell};
pub use metrics::{fit_naive_ols, mae, mse, test_mse, unseal, HoldoutSet, NaiveFit, Predictor};
pub use report::{run_each, run_methods, EvalReport, FittedModel, MethodRun, Scenario};
pub use ttest::{paired_t_test, two_sided_p, PairedTestResult};
