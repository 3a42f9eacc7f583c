//! Kernel-based estimation of the Hirschfeld-Gebelein-Renyi maximal
//! correlation.
//!
//! The crate is `no_std` (it needs `alloc`). Modules:
//!
//! * [`kernelspace`]: centered polynomial expansions of a sample vector.
//! * [`correlation`]: Pearson, `HGR-KB`, `HGR-SK`, degree scans.
//! * [`gradients`]: envelope gradients of the indicators w.r.t. one input.
//! * [`baselines`]: the randomized dependence coefficient.
//! * [`datagen`]: seeded synthetic relations and their oracle correlations.
//! * [`fairtrain`]: a small network trained under a correlation constraint
//!   with a Lagrangian multiplier.
//!
//! Every routine is deterministic: identical inputs give bit-identical
//! outputs, and all randomness comes from explicit seeds.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod correlation;
pub mod datagen;
pub mod error;
pub mod fairtrain;
pub mod gradients;
pub mod kernelspace;
pub mod linalg;
pub mod sample;
pub mod stats;

pub use correlation::{
    degree_scan, hgr_kb, hgr_sk, pearson, pearson_lstsq, DegreeConfig, DegreeGrid, Direction,
    HgrResult, SolverConfig, SolverMethod,
};
pub use error::{HgrError, Result};
pub use kernelspace::{expand, project, KernelMatrix};
pub use sample::SampleVector;

/// Monotonic time source used for the timings some reports carry. The core
/// never reads a clock on its own.
pub trait Clock {
    fn now_secs(&self) -> f64;
}

/// A clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_secs(&self) -> f64 {
        0.0
    }
}
