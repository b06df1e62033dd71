//! Monte Carlo experiments: configuration, parameter sweeps and convergence
//! traces, all written as CSV with a `#`-prefixed `key=value` header.
//!
//! Power budgets are given in dBm here and converted to watts once, when the
//! configuration is turned into [`SystemParams`].

mod config;
mod convergence;
mod sweep;

pub use config::{ConvergenceConfig, ExperimentConfig, SweepAxis, SweepConfig, SystemConfig};
pub use convergence::{emit_convergence, ConvergenceRow, ConvergenceTrace};
pub use sweep::{run_sweep, SweepPoint, SweepResult, TrialOutcome};

use std::path::Path;

use crate::error::Result;

/// Writes `contents` to `path`, creating parent directories as needed.
pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}
