//! Pathwise stochastic calculus on sampled continuous paths.
//!
//! The crate works with piecewise-linear trajectories ([`SampledPath`]) and
//! builds, path by path, the objects of model-free stochastic calculus:
//!
//! * [`partitions`]: Lebesgue (grid-hitting) stopping sequences, fine covers, merging.
//! * [`quadvar`]: simple quadratic variation and covariation along stopping sequences,
//!   the merge error bound and dyadic QV estimates.
//! * [`bdg`]: pathwise Burkholder-Davis-Gundy certificates (the trading strategies whose
//!   gains make the BDG inequalities hold deterministically).
//! * [`truncvar`]: truncated variation, level-crossing profiles and the TTV route to QV.
//! * [`integration`]: simple strategies, capital processes and the model-free integral.
//!
//! Every pathwise inequality is checked exactly on each path; statistical claims are
//! handled with Monte Carlo surrogates in [`stats`].

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdg;
pub mod error;
pub mod integration;
pub mod io;
pub mod partitions;
pub mod paths;
pub mod quadvar;
pub mod stats;
pub mod truncvar;

pub use bdg::{BdgCertificate, DiscreteSequence};
pub use error::{Error, Result};
pub use integration::{SimpleStrategy, StepProcess};
pub use partitions::{GridSpec, StoppingSequence};
pub use paths::{PathGeneratorConfig, PathKind, SampledPath, StopTime, Time, Value};
pub use quadvar::QvCurve;
pub use truncvar::CrossingProfile;

/// Version tag written into every JSON document produced by the crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Slack used by every inequality check: `lhs <= rhs + 1e-9 * (1 + |rhs|)`.
pub fn holds_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-9 * (1.0 + rhs.abs())
}

/// One inequality `lhs ≤ rhs`, evaluated with [`holds_with_slack`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Check { lhs, rhs, holds: holds_with_slack(lhs, rhs) }
    }

    /// `rhs − lhs`.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}
