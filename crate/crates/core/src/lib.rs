//! Gaussian-smoothed Wasserstein distances and the tools around them.
//!
//! - [`specialfn`]: the entire exponential integral `Ein` and the kernel
//!   `κ(x,y) = −σ² Ein(−⟨x,y⟩/σ²)` of the smooth Sobolev distance `d₂`.
//! - [`measures`]: weighted empirical measures, declarative distributions,
//!   seeded sampling and Gaussian noise augmentation.
//! - [`ot`]: exact (network simplex), entropic (Sinkhorn) and 1-D quantile
//!   transport, plus smooth `W_p` by noise augmentation.
//! - [`mmd`]: V/U-statistics for `d₂`, cached references, the one-sample
//!   expectation identity and the upper bound on `GW₂`.
//! - [`twosample`]: bootstrap two-sample tests and rejection curves.
//! - [`mswe`]: minimum smooth Wasserstein estimation with common random numbers.
//! - [`experiments`]: convergence/bound/limit curves and a config-driven runner
//!   writing CSV, SVG and a checksummed manifest.
//!
//! All randomness flows from a [`SeedSpec`], so every result is reproducible.

pub mod error;
pub mod experiments;
pub mod matrix;
pub mod mmd;
pub mod mswe;
pub mod measures;
pub mod ot;
pub mod rng;
pub mod specialfn;
pub mod twosample;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use mmd::{d2_squared, EstimatorKind, MmdResult};
pub use measures::{DistributionKind, DistributionSpec, EmpiricalMeasure};
pub use rng::SeedSpec;
pub use specialfn::{ein, gram, kernel, KernelParams};
