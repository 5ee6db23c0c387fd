use std::fmt;
use std::str::FromStr;

use pwcalc_core::{PathGeneratorConfig, PathKind};
use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BdgCertify,
    QvConverge,
    TtvConverge,
    Sandwich,
    IsometryMc,
    BdgMc,
    IntegralConverge,
    DistanceRates,
    CompareQv,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::BdgCertify,
        ExperimentKind::QvConverge,
        ExperimentKind::TtvConverge,
        ExperimentKind::Sandwich,
        ExperimentKind::IsometryMc,
        ExperimentKind::BdgMc,
        ExperimentKind::IntegralConverge,
        ExperimentKind::DistanceRates,
        ExperimentKind::CompareQv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BdgCertify => "bdg-certify",
            ExperimentKind::QvConverge => "qv-converge",
            ExperimentKind::TtvConverge => "ttv-converge",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::IsometryMc => "isometry-mc",
            ExperimentKind::BdgMc => "bdg-mc",
            ExperimentKind::IntegralConverge => "integral-converge",
            ExperimentKind::DistanceRates => "distance-rates",
            ExperimentKind::CompareQv => "compare-qv",
        }
    }

    /// Default inclusive `m` range.
    fn default_m_range(self) -> [u32; 2] {
        match self {
            ExperimentKind::BdgCertify => [2, 6],
            ExperimentKind::QvConverge => [4, 9],
            ExperimentKind::TtvConverge => [4, 12],
            ExperimentKind::Sandwich => [3, 8],
            ExperimentKind::IsometryMc | ExperimentKind::BdgMc => [8, 8],
            ExperimentKind::IntegralConverge => [0, 8],
            ExperimentKind::DistanceRates => [0, 8],
            ExperimentKind::CompareQv => [2, 5],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment {s:?}")))
    }
}

fn one() -> usize {
    1
}

/// One experiment run. Member `i` of the ensemble uses the generator with
/// seed `member_seed(seed, i)`; the generator's own seed field is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub generator: PathGeneratorConfig,
    #[serde(default = "one")]
    pub ensemble_size: usize,
    /// Inclusive refinement range `[lo, hi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_range: Option<[u32; 2]>,
    /// Explicit TTV truncation levels, overriding `c = m⁻²` over `m_range`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    /// Dyadic level of the reference QV curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qv_level: Option<u32>,
    /// Number of localization levels in the pseudo-distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    /// Correlation of the second integrator in the covariation table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, generator: PathGeneratorConfig, ensemble_size: usize) -> Self {
        ExperimentConfig {
            experiment,
            generator,
            ensemble_size,
            m_range: None,
            c_schedule: None,
            p_list: None,
            qv_level: None,
            n_max: None,
            correlation: None,
            output_dir: None,
            seed: 0,
        }
    }

    pub fn with_m_range(mut self, lo: u32, hi: u32) -> Self {
        self.m_range = Some([lo, hi]);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn m_range(&self) -> (u32, u32) {
        let [lo, hi] = self.m_range.unwrap_or_else(|| self.experiment.default_m_range());
        (lo, hi)
    }

    pub fn p_list(&self) -> Vec<f64> {
        self.p_list.clone().unwrap_or_else(|| match self.experiment {
            ExperimentKind::BdgMc => vec![1.0, 2.0],
            _ => vec![1.0, 1.5, 2.0, 3.0],
        })
    }

    /// Truncation levels, coarse to fine.
    pub fn c_schedule(&self) -> Vec<f64> {
        self.c_schedule.clone().unwrap_or_else(|| {
            let (lo, hi) = self.m_range();
            (lo..=hi).map(|m| 1.0 / f64::from(m * m)).collect()
        })
    }

    pub fn qv_level(&self) -> u32 {
        self.qv_level.unwrap_or_else(|| match self.experiment {
            ExperimentKind::TtvConverge => 9,
            _ => self.m_range().1.max(8) + 2,
        })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max.unwrap_or(4)
    }

    pub fn correlation(&self) -> f64 {
        self.correlation.unwrap_or(0.5)
    }

    /// The generator configuration of ensemble member `i`.
    pub fn member(&self, i: usize) -> PathGeneratorConfig {
        self.generator.with_seed(member_seed(self.seed, i as u64))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.ensemble_size == 0 {
            return bad("ensemble_size must be at least 1".into());
        }
        self.generator.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        let (lo, hi) = self.m_range();
        if lo > hi {
            return bad(format!("empty m_range [{lo}, {hi}]"));
        }
        if hi > 24 {
            return bad(format!("m = {hi} exceeds the supported refinement depth"));
        }
        if self.experiment == ExperimentKind::Sandwich && lo < 3 {
            return bad("the sandwich needs m >= 3".into());
        }
        if self.experiment == ExperimentKind::TtvConverge && self.c_schedule.is_none() && lo == 0 {
            return bad("c = m⁻² needs m >= 1".into());
        }
        let cs = if self.experiment == ExperimentKind::TtvConverge { self.c_schedule() } else { Vec::new() };
        if cs.iter().any(|c| !(c.is_finite() && *c > 0.0)) || cs.windows(2).any(|w| w[1] >= w[0]) {
            return bad("c_schedule must be positive and strictly decreasing".into());
        }
        if self.p_list().iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return bad("every p must be at least 1".into());
        }
        if self.n_max() == 0 {
            return bad("n_max must be at least 1".into());
        }
        if !(-1.0..=1.0).contains(&self.correlation()) {
            return bad("correlation must lie in [-1, 1]".into());
        }
        if self.experiment == ExperimentKind::CompareQv
            && !matches!(self.generator.kind, PathKind::Wiener | PathKind::WienerLattice | PathKind::Zigzag | PathKind::Constant)
        {
            return bad("compare-qv needs a wiener, zigzag or constant generator".into());
        }
        Ok(())
    }
}

/// SplitMix64 of `(seed, i)`: independent-looking seeds for ensemble members.
pub fn member_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wiener() -> PathGeneratorConfig {
        PathGeneratorConfig::wiener(1.0, 1.0 / 64.0, 0)
    }

    #[test]
    fn parse_and_defaults() {
        let json = r#"{"experiment":"ttv-converge","generator":{"kind":"wiener","horizon":1.0,"step":0.01},"ensemble_size":3}"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.m_range(), (4, 12));
        assert_eq!(cfg.c_schedule()[0], 1.0 / 16.0);
        assert_eq!(cfg.qv_level(), 9);
        assert!(serde_json::from_str::<ExperimentConfig>(&json.replace("\"ensemble_size\"", "\"bogus\"")).is_err());
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn validation() {
        let ok = ExperimentConfig::new(ExperimentKind::Sandwich, wiener(), 2);
        ok.validate().unwrap();
        assert!(ExperimentConfig::new(ExperimentKind::Sandwich, wiener(), 0).validate().is_err());
        assert!(ok.clone().with_m_range(2, 5).validate().is_err());
        assert!(ok.clone().with_m_range(6, 5).validate().is_err());
        let mut bad_p = ok.clone();
        bad_p.p_list = Some(vec![0.5]);
        assert!(bad_p.validate().is_err());
        let mut bad_c = ExperimentConfig::new(ExperimentKind::TtvConverge, wiener(), 2);
        bad_c.c_schedule = Some(vec![0.1, 0.2]);
        assert!(bad_c.validate().is_err());
    }

    #[test]
    fn member_seeds_differ() {
        let cfg = ExperimentConfig::new(ExperimentKind::QvConverge, wiener(), 4).with_seed(7);
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| cfg.member(i).seed).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(cfg.member(3), cfg.member(3));
    }
}
