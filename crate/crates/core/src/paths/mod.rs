//! Sampled continuous trajectories.
//!
//! A [`SampledPath`] is a finite list of `(t, x)` samples interpreted as the
//! piecewise-linear function through them. Every hitting time in the crate is
//! obtained by solving a linear equation on one segment, so no bisection or
//! tolerance knobs are involved.

mod exit_time;
mod generate;

pub use exit_time::sample_unit_exit_time;
pub use generate::{generate, IncrementLaw, PathGeneratorConfig, PathKind};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

pub type Time = f64;
pub type Value = f64;

/// A stopping time realized on a path: either a finite time or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "Option<f64>", into = "Option<f64>")]
pub enum StopTime {
    At(Time),
    Never,
}

impl StopTime {
    pub fn finite(self) -> Option<Time> {
        match self {
            StopTime::At(t) => Some(t),
            StopTime::Never => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, StopTime::At(_))
    }

    /// `self ∧ t`.
    pub fn min_time(self, t: Time) -> Time {
        match self {
            StopTime::At(s) => s.min(t),
            StopTime::Never => t,
        }
    }

    pub fn min(self, other: StopTime) -> StopTime {
        match (self, other) {
            (StopTime::At(a), StopTime::At(b)) => StopTime::At(a.min(b)),
            (StopTime::At(a), StopTime::Never) | (StopTime::Never, StopTime::At(a)) => {
                StopTime::At(a)
            }
            (StopTime::Never, StopTime::Never) => StopTime::Never,
        }
    }

    /// Strict comparison `t < self`, true for every finite `t` when `self = +∞`.
    pub fn is_after(self, t: Time) -> bool {
        match self {
            StopTime::At(s) => t < s,
            StopTime::Never => true,
        }
    }
}

impl From<Option<f64>> for StopTime {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(t) if t.is_finite() => StopTime::At(t),
            _ => StopTime::Never,
        }
    }
}

impl From<StopTime> for Option<f64> {
    fn from(s: StopTime) -> Self {
        s.finite()
    }
}

/// A continuous, piecewise-linear trajectory on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath")]
pub struct SampledPath {
    times: Vec<Time>,
    values: Vec<Value>,
}

#[derive(Deserialize)]
struct RawPath {
    times: Vec<Time>,
    values: Vec<Value>,
}

impl TryFrom<RawPath> for SampledPath {
    type Error = crate::Error;
    fn try_from(raw: RawPath) -> Result<Self> {
        SampledPath::new(raw.times, raw.values)
    }
}

impl SampledPath {
    pub fn new(times: Vec<Time>, values: Vec<Value>) -> Result<Self> {
        ensure!(!times.is_empty(), InvalidPath, "a path needs at least one sample");
        ensure!(
            times.len() == values.len(),
            InvalidPath,
            "{} times but {} values",
            times.len(),
            values.len()
        );
        ensure!(times[0] == 0.0, InvalidPath, "first time must be 0, got {}", times[0]);
        ensure!(
            times.iter().all(|t| t.is_finite()),
            InvalidPath,
            "non-finite time stamp"
        );
        ensure!(
            values.iter().all(|v| v.is_finite()),
            InvalidPath,
            "non-finite value"
        );
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(crate::Error::InvalidPath(format!(
                "times not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(SampledPath { times, values })
    }

    /// The path `x ≡ value` sampled at `0` and `horizon`.
    pub fn constant(value: Value, horizon: Time) -> Result<Self> {
        if horizon == 0.0 {
            SampledPath::new(vec![0.0], vec![value])
        } else {
            SampledPath::new(vec![0.0, horizon], vec![value, value])
        }
    }

    pub fn from_fn(times: Vec<Time>, f: impl Fn(Time) -> Value) -> Result<Self> {
        let values = times.iter().map(|&t| f(t)).collect();
        SampledPath::new(times, values)
    }

    pub fn times(&self) -> &[Time] {
        &self.times
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> Time {
        *self.times.last().expect("non-empty path")
    }

    pub fn start_value(&self) -> Value {
        self.values[0]
    }

    pub fn end_value(&self) -> Value {
        *self.values.last().expect("non-empty path")
    }

    pub fn max_abs(&self) -> Value {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> Value {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> Value {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sum of absolute increments between samples (the total variation of the
    /// piecewise-linear interpolation).
    pub fn total_variation(&self) -> Value {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Linear interpolation at `t`, exact at sample times.
    pub fn evaluate(&self, t: Time) -> Result<Value> {
        ensure!(
            (0.0..=self.horizon()).contains(&t),
            Domain,
            "t = {t} outside [0, {}]",
            self.horizon()
        );
        Ok(self.eval(t))
    }

    /// Index `i` of the segment `[t_i, t_{i+1}]` used to evaluate at `t`
    /// (the last segment for `t = horizon`, 0 for a single-sample path).
    pub fn segment_index(&self, t: Time) -> usize {
        let n = self.times.len();
        if n == 1 {
            return 0;
        }
        let i = self.times.partition_point(|&s| s <= t);
        i.saturating_sub(1).min(n - 2)
    }

    /// Interpolation with `t` clamped into `[0, horizon]`.
    pub(crate) fn eval(&self, t: Time) -> Value {
        let i = self.segment_index(t);
        self.eval_on_segment(i, t)
    }

    pub(crate) fn eval_on_segment(&self, i: usize, t: Time) -> Value {
        if self.times.len() == 1 {
            return self.values[0];
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (x0, x1) = (self.values[i], self.values[i + 1]);
        if t <= t0 {
            x0
        } else if t >= t1 {
            x1
        } else {
            x0 + (t - t0) / (t1 - t0) * (x1 - x0)
        }
    }

    /// A forward-only evaluator for non-decreasing query times.
    pub fn cursor(&self) -> PathCursor<'_> {
        PathCursor { path: self, seg: 0 }
    }

    /// The path on `[0, t]`, ending with the interpolated value at `t`.
    pub fn truncate(&self, t: Time) -> Result<SampledPath> {
        let end = self.evaluate(t)?;
        let k = self.times.partition_point(|&s| s < t);
        let mut times = self.times[..k].to_vec();
        let mut values = self.values[..k].to_vec();
        if times.last() != Some(&t) {
            times.push(t);
            values.push(end);
        }
        SampledPath::new(times, values)
    }

    /// The stopped path `s ↦ x(s ∧ t)` on the original horizon.
    pub fn stopped_at(&self, t: Time) -> Result<SampledPath> {
        if t >= self.horizon() {
            return Ok(self.clone());
        }
        let mut out = self.truncate(t)?;
        let v = out.end_value();
        out.times.push(self.horizon());
        out.values.push(v);
        Ok(out)
    }

    /// The stopped path at a [`StopTime`], unchanged when it is `+∞`.
    pub fn stopped(&self, s: StopTime) -> Result<SampledPath> {
        match s {
            StopTime::At(t) => self.stopped_at(t),
            StopTime::Never => Ok(self.clone()),
        }
    }

    /// `a·self + b·other` on the union of both sample grids, up to the shorter horizon.
    pub fn linear_combination(&self, a: f64, other: &SampledPath, b: f64) -> SampledPath {
        let horizon = self.horizon().min(other.horizon());
        let times: Vec<Time> = union_times(&[self.times(), other.times()])
            .into_iter()
            .filter(|&t| t <= horizon)
            .collect();
        let mut cx = self.cursor();
        let mut cy = other.cursor();
        let values = times
            .iter()
            .map(|&t| a * cx.value_at(t) + b * cy.value_at(t))
            .collect();
        SampledPath { times, values }
    }

    /// Apply `f` to every sample value.
    pub fn map_values(&self, f: impl Fn(Value) -> Value) -> Result<SampledPath> {
        SampledPath::new(self.times.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Samples of the path on `[a, b]`, including the interpolated endpoints.
    pub fn window_values(&self, a: Time, b: Time) -> Result<Vec<Value>> {
        ensure!(a < b, Domain, "degenerate interval [{a}, {b}]");
        let va = self.evaluate(a)?;
        let vb = self.evaluate(b)?;
        let lo = self.times.partition_point(|&s| s <= a);
        let hi = self.times.partition_point(|&s| s < b);
        let mut out = Vec::with_capacity(hi.saturating_sub(lo) + 2);
        out.push(va);
        out.extend_from_slice(&self.values[lo..hi]);
        out.push(vb);
        Ok(out)
    }

    /// Samples with times in `[a, b]`, including the interpolated endpoints, as a path
    /// starting at time 0.
    pub fn window(&self, a: Time, b: Time) -> Result<SampledPath> {
        ensure!(a < b, Domain, "degenerate interval [{a}, {b}]");
        let va = self.evaluate(a)?;
        let vb = self.evaluate(b)?;
        let lo = self.times.partition_point(|&s| s <= a);
        let hi = self.times.partition_point(|&s| s < b);
        let mut times = vec![0.0];
        let mut values = vec![va];
        for i in lo..hi {
            times.push(self.times[i] - a);
            values.push(self.values[i]);
        }
        times.push(b - a);
        values.push(vb);
        SampledPath::new(times, values)
    }
}

/// Sequential evaluation at non-decreasing times in amortized O(1).
#[derive(Debug, Clone)]
pub struct PathCursor<'a> {
    path: &'a SampledPath,
    seg: usize,
}

impl PathCursor<'_> {
    pub fn value_at(&mut self, t: Time) -> Value {
        let times = &self.path.times;
        let n = times.len();
        if n == 1 {
            return self.path.values[0];
        }
        while self.seg + 2 < n && times[self.seg + 1] <= t {
            self.seg += 1;
        }
        self.path.eval_on_segment(self.seg, t)
    }
}

/// Sorted union of several time grids with exact duplicates removed.
pub fn union_times(grids: &[&[Time]]) -> Vec<Time> {
    let mut all: Vec<Time> = grids.iter().flat_map(|g| g.iter().copied()).collect();
    all.sort_by(|a, b| a.total_cmp(b));
    all.dedup();
    all
}

/// `Σ_j w_j · p_j` on the union of the sample grids, up to the shortest horizon.
pub fn weighted_sum(paths: &[&SampledPath], weights: &[f64]) -> Result<SampledPath> {
    ensure!(!paths.is_empty(), InvalidArgument, "nothing to sum");
    ensure!(paths.len() == weights.len(), InvalidArgument, "one weight per path");
    let horizon = paths.iter().map(|p| p.horizon()).fold(f64::INFINITY, f64::min);
    let grids: Vec<&[Time]> = paths.iter().map(|p| p.times()).collect();
    let times: Vec<Time> = union_times(&grids).into_iter().filter(|&t| t <= horizon).collect();
    let mut cursors: Vec<PathCursor<'_>> = paths.iter().map(|p| p.cursor()).collect();
    let values = times
        .iter()
        .map(|&t| cursors.iter_mut().zip(weights).map(|(c, w)| w * c.value_at(t)).sum())
        .collect();
    Ok(SampledPath { times, values })
}

/// Time at which the segment from `(t0, x0)` to `(t1, x1)` reaches `level`.
///
/// Always solved from the original segment endpoints, so that every caller
/// hitting the same level on the same segment gets a bit-identical time.
pub(crate) fn segment_crossing(t0: Time, x0: Value, t1: Time, x1: Value, level: Value) -> Time {
    if level == x1 && x1 != x0 {
        return t1;
    }
    if x1 == x0 || level == x0 {
        return t0;
    }
    let t = t0 + (level - x0) / (x1 - x0) * (t1 - t0);
    t.clamp(t0, t1)
}

/// `σ(X, M) = inf{t ≥ from : |X_t| ≥ M}`.
pub fn hitting_time_abs(path: &SampledPath, level: Value, from: Time) -> Result<StopTime> {
    ensure!(level > 0.0, InvalidArgument, "level must be positive, got {level}");
    let v0 = path.evaluate(from)?;
    if v0.abs() >= level {
        return Ok(StopTime::At(from));
    }
    let times = path.times();
    let values = path.values();
    let start = path.times.partition_point(|&s| s <= from);
    for i in start..times.len() {
        let x1 = values[i];
        if x1.abs() >= level {
            let target = if x1 >= level { level } else { -level };
            let t = segment_crossing(times[i - 1], values[i - 1], times[i], x1, target);
            return Ok(StopTime::At(t.max(from)));
        }
    }
    Ok(StopTime::Never)
}

/// First time `|a(t) − b(t)| ≥ eps`, evaluated up to the shorter horizon.
pub fn divergence_time(a: &SampledPath, b: &SampledPath, eps: Value) -> Result<StopTime> {
    ensure!(eps > 0.0, InvalidArgument, "eps must be positive, got {eps}");
    let diff = a.linear_combination(1.0, b, -1.0);
    hitting_time_abs(&diff, eps, 0.0)
}
