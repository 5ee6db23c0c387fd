//! Fixtures shared by the benchmarks.

use pwcalc_core::{PathGeneratorConfig, SampledPath};

/// A seeded Brownian path on `[0, 1]` with `2^log2_steps` steps.
pub fn wiener(log2_steps: u32, seed: u64) -> SampledPath {
    let cfg = PathGeneratorConfig::wiener(1.0, (-(log2_steps as f64)).exp2(), seed);
    pwcalc_core::paths::generate(&cfg).expect("valid generator config")
}
