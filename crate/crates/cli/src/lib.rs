//! End-to-end experiment pipeline behind the `portsel` binary.
//!
//! Stages run in order: `generate` writes suites and landscape features,
//! `run` executes the optimizers and stores trajectories and EAFs,
//! `evaluate` builds every baseline and selected portfolio and writes the
//! results bundle, `report` prints it.

pub mod config;
pub mod evaluate;
pub mod pipeline;
pub mod report;
pub mod table;

use std::path::Path;

pub use config::Config;
pub use evaluate::{cmd_evaluate, DimensionResult, Variant};
pub use pipeline::{cmd_generate, cmd_run, RunSummary};
pub use report::cmd_report;

use portsel_core::{Error, Result};

/// All stages in sequence.
pub fn cmd_all(config: &Config, root: &Path) -> Result<Vec<DimensionResult>> {
    cmd_generate(config, root)?;
    cmd_run(config, root)?;
    cmd_evaluate(config, root)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Usage(_) => 2,
        Error::Data(_) | Error::NotFound(_) => 3,
        Error::Format(_) => 4,
        Error::Io { .. } => 1,
    }
}
