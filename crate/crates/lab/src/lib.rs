//! Monte-Carlo harness, configuration and CSV reporting on top of
//! `ewlimit-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod harness;
pub mod mc;
pub mod report;

pub use config::{ConfigError, ExperimentConfig};
pub use harness::{
    estimate_x_covariance, run_validate, sweep_delta, sweep_mean, HarnessError, Setup, SweepRow,
};
pub use mc::CovarianceEstimate;
