//! Experiment harness for `pwcalc`: configuration, ensembles and reports.

pub mod harness;

pub use harness::{
    compare_qv_estimators, run, ExperimentConfig, ExperimentKind, HarnessError, Report, RunOptions,
    Verdict,
};
