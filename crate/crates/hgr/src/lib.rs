//! File formats, report envelopes and command implementations for the `hgr`
//! command-line tool. All numerics live in `hgr-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

use std::time::Instant;

pub use error::CliError;
pub use report::Report;

/// Wall clock measured from construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    start: Instant,
}

impl StdClock {
    pub fn new() -> Self {
        StdClock {
            start: Instant::now(),
        }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl hgr_core::Clock for StdClock {
    fn now_secs(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Worker pool capped by `HGR_THREADS` (default: available parallelism).
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(text) = std::env::var("HGR_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| {
                CliError::Input(format!(
                    "HGR_THREADS must be a positive integer, got {text:?}"
                ))
            })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))
}
