//! Robust regularized estimation with complexity-dependent diagnostics.
//!
//! This crate implements two families of estimators for regression and
//! classification with convex Lipschitz losses and even convex penalties:
//!
//! * regularized empirical risk minimization (RERM), the textbook penalized
//!   M-estimator, and
//! * a minmax median-of-means (MOM) estimator, which replaces empirical
//!   means by medians of block means inside a saddle-point criterion and
//!   keeps working when a constant fraction of the sample is corrupted or
//!   the noise has no second moment.
//!
//! Alongside the solvers ([`solvers`]) the crate ships the supporting cast
//! needed to study them empirically:
//!
//! * [`losses`] / [`penalties`]: the loss and penalty catalogue with
//!   subgradients and proximal maps,
//! * [`datagen`]: seeded synthetic designs, heavy-tailed noise, adversarial
//!   contamination and block partitions,
//! * [`rkhs`]: scalar kernels with known Mercer spectra for nonparametric
//!   experiments,
//! * [`theory`]: Gaussian-width and Rademacher-complexity estimators, the
//!   fixed-point radii that drive the theoretical rates, closed-form radii
//!   for the elastic net and kernel classes, and local Bernstein constants,
//! * [`lab`]: the reproducible experiment harness behind the `momlab lab`
//!   subcommands.
//!
//! Everything randomized takes an explicit `u64` seed and uses a fixed
//! counter-based generator, so every number the crate produces is
//! reproducible across runs and platforms.

pub mod datagen;
pub mod lab;
pub mod losses;
pub mod penalties;
pub mod rkhs;
pub mod solvers;
pub mod theory;

mod error;
pub(crate) mod linalg;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
