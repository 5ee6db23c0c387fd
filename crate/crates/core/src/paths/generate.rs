use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{exit_time::sample_unit_exit_time, SampledPath, Time};
use crate::error::{ensure, Result};

/// Family of synthetic trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// Brownian motion with drift, Gaussian increments of variance `volatility² · step`.
    Wiener,
    /// Geometric Brownian motion started at `initial`.
    Geometric,
    /// Increments alternating `+amplitude`, `-amplitude`, ...
    Zigzag,
    /// `x ≡ initial`.
    Constant,
    /// `initial + amplitude · sin(2πt / period)`.
    Sine,
    /// Random walk with i.i.d. increments drawn from `increment_law`.
    CustomSeeded,
    /// Brownian motion recorded exactly at its successive hitting times of the
    /// lattice `δ·ℤ`, `δ = volatility · √step`, joined linearly.
    WienerLattice,
}

/// Increment laws for [`PathKind::CustomSeeded`], all scaled to variance
/// `volatility² · step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IncrementLaw {
    #[default]
    Gaussian,
    Rademacher,
    Uniform,
    Laplace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathGeneratorConfig {
    pub kind: PathKind,
    pub horizon: Time,
    pub step: Time,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub volatility: f64,
    #[serde(default)]
    pub drift: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub initial: f64,
    #[serde(default = "one")]
    pub period: f64,
    #[serde(default)]
    pub increment_law: IncrementLaw,
}

fn one() -> f64 {
    1.0
}

impl PathGeneratorConfig {
    pub fn new(kind: PathKind, horizon: Time, step: Time, seed: u64) -> Self {
        PathGeneratorConfig {
            kind,
            horizon,
            step,
            seed,
            volatility: 1.0,
            drift: 0.0,
            amplitude: 1.0,
            initial: 0.0,
            period: 1.0,
            increment_law: IncrementLaw::Gaussian,
        }
    }

    pub fn wiener(horizon: Time, step: Time, seed: u64) -> Self {
        Self::new(PathKind::Wiener, horizon, step, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        PathGeneratorConfig { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.step > 0.0 && self.step.is_finite(),
            InvalidArgument,
            "step must be positive, got {}",
            self.step
        );
        ensure!(
            self.horizon >= self.step && self.horizon.is_finite(),
            InvalidArgument,
            "horizon {} must be at least the step {}",
            self.horizon,
            self.step
        );
        ensure!(
            self.volatility >= 0.0 && self.volatility.is_finite(),
            InvalidArgument,
            "volatility must be non-negative"
        );
        ensure!(self.drift.is_finite(), InvalidArgument, "drift must be finite");
        ensure!(self.amplitude.is_finite(), InvalidArgument, "amplitude must be finite");
        ensure!(self.initial.is_finite(), InvalidArgument, "initial must be finite");
        ensure!(self.period > 0.0, InvalidArgument, "period must be positive");
        if self.kind == PathKind::Geometric {
            ensure!(self.initial > 0.0, InvalidArgument, "geometric paths need initial > 0");
        }
        if self.kind == PathKind::WienerLattice {
            ensure!(self.volatility > 0.0, InvalidArgument, "lattice paths need volatility > 0");
        }
        Ok(())
    }

    /// The regular time grid `0, step, 2·step, …, horizon` (last step possibly shorter).
    fn grid(&self) -> Vec<Time> {
        let ratio = self.horizon / self.step;
        let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        };
        let mut times: Vec<Time> = (0..n).map(|i| i as f64 * self.step).collect();
        times.push(self.horizon);
        times
    }
}

/// Deterministic path generation: identical configs give identical paths.
pub fn generate(config: &PathGeneratorConfig) -> Result<SampledPath> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    if config.kind == PathKind::WienerLattice {
        return lattice_path(config, &mut rng);
    }
    let times = config.grid();
    let mut values = Vec::with_capacity(times.len());
    values.push(config.initial);
    let c = config;
    match c.kind {
        PathKind::Constant => values.resize(times.len(), c.initial),
        PathKind::Zigzag => {
            for i in 1..times.len() {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                values.push(values[i - 1] + sign * c.amplitude);
            }
        }
        PathKind::Sine => {
            values.clear();
            values.extend(
                times
                    .iter()
                    .map(|t| c.initial + c.amplitude * (std::f64::consts::TAU * t / c.period).sin()),
            );
        }
        PathKind::Wiener | PathKind::CustomSeeded => {
            let law = if c.kind == PathKind::Wiener {
                IncrementLaw::Gaussian
            } else {
                c.increment_law
            };
            for i in 1..times.len() {
                let dt = times[i] - times[i - 1];
                let z = standardized_draw(law, &mut rng);
                values.push(values[i - 1] + c.drift * dt + c.volatility * dt.sqrt() * z);
            }
        }
        PathKind::Geometric => {
            let mut log_s = c.initial.ln();
            for i in 1..times.len() {
                let dt = times[i] - times[i - 1];
                let z: f64 = StandardNormal.sample(&mut rng);
                log_s += (c.drift - 0.5 * c.volatility * c.volatility) * dt
                    + c.volatility * dt.sqrt() * z;
                values.push(log_s.exp());
            }
        }
        PathKind::WienerLattice => unreachable!(),
    }
    SampledPath::new(times, values)
}

/// Zero-mean, unit-variance draw.
fn standardized_draw<R: Rng + ?Sized>(law: IncrementLaw, rng: &mut R) -> f64 {
    match law {
        IncrementLaw::Gaussian => StandardNormal.sample(rng),
        IncrementLaw::Rademacher => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        IncrementLaw::Uniform => (rng.random::<f64>() * 2.0 - 1.0) * 3f64.sqrt(),
        IncrementLaw::Laplace => {
            let e: f64 = Exp1.sample(rng);
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            s * e / std::f64::consts::SQRT_2
        }
    }
}

/// Brownian motion observed at its successive hits of `initial + δ·ℤ`.
///
/// Consecutive hits differ by `±δ` with probability ½ each, and the waiting
/// time is `δ²/σ²` times an exit time of `(-1, 1)`. The final sample at the
/// horizon is interpolated between the last hit before and the first after.
fn lattice_path<R: Rng + ?Sized>(c: &PathGeneratorConfig, rng: &mut R) -> Result<SampledPath> {
    let delta = c.volatility * c.step.sqrt();
    let scale = delta * delta / (c.volatility * c.volatility);
    let expected = (c.horizon / c.step).ceil() as usize;
    let mut times = Vec::with_capacity(expected + expected / 8 + 16);
    let mut values = Vec::with_capacity(times.capacity());
    times.push(0.0);
    values.push(c.initial);
    let mut level: i64 = 0;
    let mut t = 0.0;
    loop {
        let next_t = t + scale * sample_unit_exit_time(rng);
        let next_level = if rng.random::<bool>() { level + 1 } else { level - 1 };
        if next_t >= c.horizon {
            let x0 = c.initial + level as f64 * delta;
            let x1 = c.initial + next_level as f64 * delta;
            let w = (c.horizon - t) / (next_t - t);
            if c.horizon > t {
                times.push(c.horizon);
                values.push(x0 + w * (x1 - x0));
            }
            break;
        }
        t = next_t;
        level = next_level;
        times.push(t);
        values.push(c.initial + level as f64 * delta);
    }
    SampledPath::new(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_zigzag_examples() {
        let mut c = PathGeneratorConfig::new(PathKind::Constant, 1.0, 0.5, 0);
        c.initial = 3.0;
        let p = generate(&c).unwrap();
        assert_eq!(p.times(), &[0.0, 0.5, 1.0]);
        assert_eq!(p.values(), &[3.0, 3.0, 3.0]);

        let z = generate(&PathGeneratorConfig::new(PathKind::Zigzag, 3.0, 1.0, 0)).unwrap();
        assert_eq!(z.values(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(z.times(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn wiener_is_deterministic_in_seed() {
        let c = PathGeneratorConfig::wiener(1.0, 1e-3, 42);
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        assert_ne!(generate(&c).unwrap(), generate(&c.with_seed(43)).unwrap());
    }

    #[test]
    fn wiener_increment_variance() {
        let h = 1e-3;
        let c = PathGeneratorConfig::wiener(100.0, h, 5);
        let p = generate(&c).unwrap();
        let inc: Vec<f64> = p.values().windows(2).map(|w| w[1] - w[0]).collect();
        let n = inc.len() as f64;
        assert_eq!(inc.len(), 100_000);
        let mean = inc.iter().sum::<f64>() / n;
        let var = inc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // relative standard error of a Gaussian sample variance is √(2/(n-1))
        let rse = (2.0 / (n - 1.0)).sqrt();
        assert!(((var - h) / h).abs() < 5.0 * rse, "variance {var}");
    }

    #[test]
    fn grid_handles_non_multiple_horizon() {
        let c = PathGeneratorConfig::new(PathKind::Constant, 1.0, 0.3, 0);
        let p = generate(&c).unwrap();
        assert_eq!(p.times().len(), 5);
        assert_eq!(p.horizon(), 1.0);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(generate(&PathGeneratorConfig::wiener(1.0, 0.0, 0)).is_err());
        assert!(generate(&PathGeneratorConfig::wiener(0.1, 0.5, 0)).is_err());
        let g = PathGeneratorConfig::new(PathKind::Geometric, 1.0, 0.1, 0);
        assert!(generate(&g).is_err());
    }

    #[test]
    fn lattice_path_moves_between_adjacent_levels() {
        let c = PathGeneratorConfig::new(PathKind::WienerLattice, 1.0, 1e-4, 3);
        let p = generate(&c).unwrap();
        let delta = 1e-2;
        let v = p.values();
        for w in v[..v.len() - 1].windows(2) {
            assert!(((w[1] - w[0]).abs() - delta).abs() < 1e-12);
        }
        assert_eq!(p.horizon(), 1.0);
        // about 1/step hits on average
        assert!(p.len() > 5_000 && p.len() < 20_000, "{} samples", p.len());
    }

    #[test]
    fn lattice_endpoint_variance() {
        let n = 4000;
        let mut m2 = 0.0;
        for s in 0..n {
            let c = PathGeneratorConfig::new(PathKind::WienerLattice, 1.0, 1.0 / 256.0, s);
            let x = generate(&c).unwrap().end_value();
            m2 += x * x;
        }
        m2 /= n as f64;
        // Var(X_1) = 1 up to the O(δ²) interpolation at the horizon; SE ≈ √(2/n)
        assert!((m2 - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "E X_1^2 = {m2}");
    }

    #[test]
    fn config_json_defaults() {
        let c: PathGeneratorConfig =
            serde_json::from_str(r#"{"kind":"wiener","horizon":1.0,"step":0.01,"seed":9}"#)
                .unwrap();
        assert_eq!(c.volatility, 1.0);
        assert_eq!(c.kind, PathKind::Wiener);
        let l: PathGeneratorConfig = serde_json::from_str(
            r#"{"kind":"custom-seeded","horizon":1.0,"step":0.01,"increment_law":"laplace"}"#,
        )
        .unwrap();
        assert_eq!(l.increment_law, IncrementLaw::Laplace);
    }
}
