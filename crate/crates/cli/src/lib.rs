//! The `trajprior` command-line pipeline.
//!
//! Every subcommand reads and writes plain files, so the stages compose in
//! shell scripts: `synth` or `ingest` produce trajectory JSONL, `rasterize`
//! turns it into a heatmap tensor, `cluster` and `sample` pick
//! representative trajectories, `fuse` runs the alignment kernels on two
//! feature tensors and `eval` scores polylines against centerlines.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 3 when a
//! verification step fails.

mod args;
mod commands;
mod io;

pub use args::{Cli, Command};
pub use commands::run;

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs.
    Input(String),
    /// The command ran but a requested check failed.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Verification(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<trajprior::Error> for CliError {
    fn from(e: trajprior::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Configures the global rayon pool from `TRAJPRIOR_THREADS` (unset or 0 means
/// one thread per core).
pub fn init_threads() -> CliResult {
    let Ok(raw) = std::env::var("TRAJPRIOR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Input(format!(
            "TRAJPRIOR_THREADS must be a nonnegative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        // A second initialization (tests calling in-process) is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}
