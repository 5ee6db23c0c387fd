//! Stopping-time sequences realized on a sampled path.
//!
//! A [`StoppingSequence`] stores finitely many times; every later time is `+∞`.
//! Lebesgue sequences record the successive hits of a value grid `d·ℤ + r`,
//! ignoring re-hits of the level reached last.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::paths::{segment_crossing, union_times, SampledPath, Time, Value};

/// The value grid `d·ℤ + r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    mesh: Value,
    offset: Value,
}

impl GridSpec {
    pub fn new(mesh: Value, offset: Value) -> Result<Self> {
        ensure!(mesh > 0.0 && mesh.is_finite(), InvalidArgument, "mesh must be positive, got {mesh}");
        ensure!(
            (0.0..mesh).contains(&offset),
            InvalidArgument,
            "offset {offset} outside [0, {mesh})"
        );
        Ok(GridSpec { mesh, offset })
    }

    /// `2^{-m}·ℤ`.
    pub fn dyadic(m: u32) -> Self {
        GridSpec { mesh: (-(m as f64)).exp2(), offset: 0.0 }
    }

    pub fn mesh(&self) -> Value {
        self.mesh
    }

    pub fn offset(&self) -> Value {
        self.offset
    }

    /// The level `k·d + r`.
    pub fn level(&self, k: i64) -> Value {
        k as f64 * self.mesh + self.offset
    }

    /// The largest `k` with `level(k) ≤ x`.
    pub fn floor_index(&self, x: Value) -> i64 {
        let mut k = ((x - self.offset) / self.mesh).floor() as i64;
        while self.level(k) > x {
            k -= 1;
        }
        while self.level(k + 1) <= x {
            k += 1;
        }
        k
    }
}

/// How a sequence was produced, carried along into derived curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Origin {
    Lebesgue { mesh: Value, offset: Value },
    Oscillation { threshold: Value },
    Merged,
    Explicit,
}

/// A non-decreasing list of stopping times starting at 0, with the path value at each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingSequence {
    times: Vec<Time>,
    values: Vec<Value>,
    horizon: Time,
    origin: Origin,
}

impl StoppingSequence {
    /// Times given explicitly; values are read off `path`.
    pub fn from_times(path: &SampledPath, times: Vec<Time>) -> Result<Self> {
        ensure!(times.first() == Some(&0.0), InvalidArgument, "a stopping sequence starts at 0");
        ensure!(
            times.windows(2).all(|w| w[0] <= w[1]),
            InvalidArgument,
            "stopping times must be non-decreasing"
        );
        let horizon = path.horizon();
        ensure!(
            times.iter().all(|&t| t <= horizon),
            Domain,
            "stopping time beyond the horizon {horizon}"
        );
        let mut cursor = path.cursor();
        let values = times.iter().map(|&t| cursor.value_at(t)).collect();
        Ok(StoppingSequence { times, values, horizon, origin: Origin::Explicit })
    }

    pub(crate) fn from_parts(
        times: Vec<Time>,
        values: Vec<Value>,
        horizon: Time,
        origin: Origin,
    ) -> Self {
        debug_assert_eq!(times.len(), values.len());
        StoppingSequence { times, values, horizon, origin }
    }

    /// The sequence `τ_n ∧ s` for a path truncated at `s`: times before `s`, then `s`.
    pub fn truncated(&self, path: &SampledPath, s: Time) -> Result<Self> {
        ensure!(
            (0.0..=self.horizon).contains(&s),
            Domain,
            "truncation time {s} outside [0, {}]",
            self.horizon
        );
        let k = self.times.partition_point(|&t| t < s);
        let mut times = self.times[..k].to_vec();
        let mut values = self.values[..k].to_vec();
        if times.last() != Some(&s) {
            times.push(s);
            values.push(path.evaluate(s)?);
        }
        Ok(StoppingSequence { times, values, horizon: s, origin: self.origin.clone() })
    }

    pub fn times(&self) -> &[Time] {
        &self.times
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> Time {
        *self.times.last().expect("sequence starts at 0")
    }

    /// Index of the last stopping time `≤ t`.
    pub fn index_at(&self, t: Time) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }
}

/// The Lebesgue sequence `τ(X, d, r)`.
///
/// `τ_0 = 0` and `τ_n` is the first time after `τ_{n-1}` at which the path sits
/// on a grid level other than `X(τ_{n-1})`. Hitting times come from linear
/// solves on the segment where the level is reached; stored values are the
/// grid levels themselves, except the initial value.
pub fn lebesgue_sequence(path: &SampledPath, grid: GridSpec) -> StoppingSequence {
    let times_in = path.times();
    let xs = path.values();
    let x0 = xs[0];

    let mut times = vec![0.0];
    let mut values = vec![x0];

    // Targets are the level indices `down` and `up = down + 1` or `down + 2`.
    let k0 = grid.floor_index(x0);
    let (mut down, mut up) = if grid.level(k0) == x0 { (k0 - 1, k0 + 1) } else { (k0, k0 + 1) };

    for i in 1..times_in.len() {
        let (t0, a, t1, b) = (times_in[i - 1], xs[i - 1], times_in[i], xs[i]);
        if b > a {
            while b >= grid.level(up) {
                let level = grid.level(up);
                times.push(segment_crossing(t0, a, t1, b, level));
                values.push(level);
                down = up - 1;
                up += 1;
            }
        } else if b < a {
            while b <= grid.level(down) {
                let level = grid.level(down);
                times.push(segment_crossing(t0, a, t1, b, level));
                values.push(level);
                up = down + 1;
                down -= 1;
            }
        }
    }
    StoppingSequence {
        times,
        values,
        horizon: path.horizon(),
        origin: Origin::Lebesgue { mesh: grid.mesh(), offset: grid.offset() },
    }
}

/// Outcome of [`verify_fine_cover`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub holds: bool,
    pub worst_oscillation: Value,
    /// Indices `(n, n + 1)` of the interval attaining the worst oscillation;
    /// `n + 1 == len` denotes the final interval running to the horizon.
    pub witness: (usize, usize),
}

/// `max − min` of the path over `[a, b]`.
pub fn oscillation(path: &SampledPath, a: Time, b: Time) -> Value {
    if b <= a {
        return 0.0;
    }
    let va = path.eval(a);
    let vb = path.eval(b);
    let (mut lo, mut hi) = (va.min(vb), va.max(vb));
    let ts = path.times();
    let start = ts.partition_point(|&s| s <= a);
    for (_, &v) in ts[start..].iter().zip(&path.values()[start..]).take_while(|(&t, _)| t < b) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// Checks that the path oscillates by at most `delta` between consecutive
/// stopping times, the last interval running to the horizon.
pub fn verify_fine_cover(
    path: &SampledPath,
    seq: &StoppingSequence,
    delta: Value,
) -> Result<CoverReport> {
    ensure!(delta > 0.0, InvalidArgument, "delta must be positive, got {delta}");
    let horizon = path.horizon();
    let ts = seq.times();
    let mut worst = 0.0;
    let mut witness = (0, 1);
    for n in 0..ts.len() {
        let a = ts[n].min(horizon);
        let b = if n + 1 < ts.len() { ts[n + 1].min(horizon) } else { horizon };
        let osc = oscillation(path, a, b);
        if osc > worst {
            worst = osc;
            witness = (n, n + 1);
        }
    }
    Ok(CoverReport { holds: worst <= delta, worst_oscillation: worst, witness })
}

/// Non-decreasing rearrangement of both sequences with duplicate times removed.
pub fn merge(
    a: &StoppingSequence,
    b: &StoppingSequence,
    path: &SampledPath,
) -> Result<StoppingSequence> {
    ensure!(
        a.horizon == b.horizon,
        Domain,
        "sequences realized on different horizons ({} and {})",
        a.horizon,
        b.horizon
    );
    merge_all(&[a, b], path)
}

/// [`merge`] of any number of sequences sharing a horizon.
pub fn merge_all(seqs: &[&StoppingSequence], path: &SampledPath) -> Result<StoppingSequence> {
    ensure!(!seqs.is_empty(), InvalidArgument, "nothing to merge");
    let horizon = seqs[0].horizon;
    ensure!(
        seqs.iter().all(|s| s.horizon == horizon),
        Domain,
        "sequences realized on different horizons"
    );
    let grids: Vec<&[Time]> = seqs.iter().map(|s| s.times()).collect();
    let times = union_times(&grids);
    let mut cursor = path.cursor();
    let values = times.iter().map(|&t| cursor.value_at(t)).collect();
    Ok(StoppingSequence { times, values, horizon, origin: Origin::Merged })
}

/// The grids used by the shifted family at level `m`: `m^{-2}·ℤ + k·m^{-3}`, `k < m`.
pub fn shifted_grids(m: u32) -> Result<Vec<GridSpec>> {
    ensure!(m >= 2, InvalidArgument, "shifted family needs m >= 2, got {m}");
    let mf = m as f64;
    let d = 1.0 / (mf * mf);
    (0..m).map(|k| GridSpec::new(d, k as f64 / (mf * mf * mf))).collect()
}

/// Lebesgue sequences for the `m` grids `m^{-2}·ℤ + k·m^{-3}`, `k = 0, …, m − 1`.
pub fn shifted_lebesgue_family(path: &SampledPath, m: u32) -> Result<Vec<StoppingSequence>> {
    Ok(shifted_grids(m)?.into_par_iter().map(|g| lebesgue_sequence(path, g)).collect())
}
