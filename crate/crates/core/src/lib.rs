//! Differentially private maximization of decomposable submodular functions
//! subject to matroid constraints.
//!
//! The crate is organized bottom-up:
//!
//! - [`objective`]: ground sets, per-agent oracles, the two built-in objective
//!   families (coverage and facility location) and submodularity checks.
//! - [`matroid`]: independence oracles, basis exchange and random bases.
//! - [`rounding`]: convex combinations of independent sets and swap rounding.
//! - [`multilinear`]: the exact multilinear extension, the shared-threshold
//!   estimator and the sample-count formulas.
//! - [`privacy`]: privacy budgets, the exponential mechanism and composition.
//! - [`audit`]: exact enumeration audits and the adversarial tail process.
//! - [`algorithms`]: private continuous greedy (monotone), private measured
//!   continuous greedy (non-monotone), and the non-private and DPG baselines.
//! - [`instances`]: random instance generators shared by tests and benchmarks.

pub mod algorithms;
pub mod audit;
mod error;
pub mod instances;
pub mod matroid;
pub mod multilinear;
pub mod objective;
pub mod privacy;
pub mod rounding;

pub use error::{Error, Result};

/// Elements are dense indices `0..n`.
pub type Element = usize;
