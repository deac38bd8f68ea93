//! Monte Carlo laboratory for discontinuity designs under adversarial nulls.
//!
//! The crate builds data-generating processes with a level jump, a kink, or
//! bunching at a known cutoff, constructs null sequences that hide the
//! discontinuity inside a shrinking window while matching the alternative
//! everywhere else, and measures what happens to Wald tests and inverted
//! confidence intervals as the window shrinks.
//!
//! Modules:
//! - [`model`]: mean functions, noise and forcing-variable laws, sampling.
//! - [`adversary`]: window blends that pin the jump/kink/bunching gap at a
//!   target value.
//! - [`estimate`]: one-sided local polynomial fits and cell-mean estimators.
//! - [`infer`]: Wald tests, interval inversion, exact toy enumeration.
//! - [`metrics`]: total variation and Kolmogorov distances.
//! - [`mc`]: the replication engine producing rejection/coverage curves.
//! - [`cli`]: batch commands, config parsing, CSV and SVG output.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the
// out-of-range values, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod cli;
pub mod estimate;
pub mod infer;
pub mod mc;
pub mod metrics;
pub mod model;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A query outside the domain where a function is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// An invalid argument to a constructor or operation.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// An estimation step that could not produce a result.
    #[error("estimation failed ({n_effective} effective observations): {msg}")]
    Estimation { msg: String, n_effective: usize },
    /// A config-file schema violation, with the offending line number.
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
