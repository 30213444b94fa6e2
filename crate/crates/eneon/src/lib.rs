//! Configuration-driven experiment runner for the electron-on-neon and Kittel
//! magnon model in [`eneon_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod config;
pub mod describe;
pub mod error;
pub mod experiments;
pub mod output;
pub mod validate;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Plan};
pub use error::{CliError, CliResult};
pub use output::{Manifest, OutputSink};

/// Load `config`, run it, and write artifacts plus `manifest.json`.
pub fn run_config(config: &Path, output_dir: Option<PathBuf>) -> CliResult<Manifest> {
    let (cfg, bytes) = ExperimentConfig::load(config)?;
    let plan = cfg.resolve()?;
    let dir = output_dir.unwrap_or_else(|| cfg.output_dir());
    let mut sink = OutputSink::create(dir, cfg.output.format)?;
    match experiments::run(&plan, &mut sink) {
        Err(CliError::ValidationFailed { failed }) => {
            sink.finish(cfg.experiment.name(), &bytes)?;
            Err(CliError::ValidationFailed { failed })
        }
        Err(e) => Err(e),
        Ok(()) => sink.finish(cfg.experiment.name(), &bytes),
    }
}
