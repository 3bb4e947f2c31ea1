//! Experiment drivers behind the `kolmo` command-line tool.
//!
//! Each `cmd_*` function turns a validated [`ExperimentConfig`] into a
//! report. Reports render to CSV or JSON and carry a pass/fail verdict
//! that can be recomputed from the emitted table.

pub mod config;
mod experiments;
mod report;

pub use config::{ConfigError, ExperimentConfig, OutputFormat, RawConfig, SCHEMA_VERSION};
pub use experiments::{
    cmd_compare_bonfiglioli, cmd_connect_demo, cmd_converge, cmd_group_info, cmd_holder_scan,
    cmd_taylor_eval, BonfiglioliReport, BonfiglioliRow, ConnectReport, ConvergenceCell,
    ConvergenceReport, GroupInfoReport, HolderReport, TaylorEvalReport, TaylorEvalRow,
};
pub use report::{fmt_f64, render, Report};

use thiserror::Error;

use crate::error::{CalculusError, GroupError};

/// Anything that stops an experiment before it produces a verdict.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

impl From<GroupError> for HarnessError {
    fn from(e: GroupError) -> Self {
        HarnessError::Calculus(e.into())
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
