//! Truncated variation and level crossings.
//!
//! `TTV^c(x, [a, b]) = sup Σ max(|x(t_i) − x(t_{i−1})| − c, 0)` over partitions of
//! `[a, b]`. It equals the integral over `z` of the number of crossings of the
//! band `[z − c/2, z + c/2]`, and `c · TTV^c` converges to the quadratic
//! variation as `c → 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::partitions::{lebesgue_sequence, shifted_grids, GridSpec};
use crate::paths::{hitting_time_abs, weighted_sum, SampledPath, Time, Value};
use crate::quadvar::{simple_qv, QvCurve};
use crate::Check;

fn check_interval(path: &SampledPath, c: Value, a: Time, b: Time) -> Result<()> {
    ensure!(c > 0.0 && c.is_finite(), InvalidArgument, "truncation c must be positive, got {c}");
    ensure!(
        0.0 <= a && a < b && b <= path.horizon(),
        Domain,
        "need 0 ≤ a < b ≤ {}, got [{a}, {b}]",
        path.horizon()
    );
    Ok(())
}

/// Exact TTV by dynamic programming over all subsequences of the samples in
/// `[a, b]`, O(n²). Restricting partition points to samples loses nothing
/// because the path is monotone between samples.
pub fn ttv_dp_oracle(path: &SampledPath, c: Value, a: Time, b: Time) -> Result<Value> {
    check_interval(path, c, a, b)?;
    let x = path.window_values(a, b)?;
    let mut best = vec![0.0; x.len()];
    let mut answer: Value = 0.0;
    for i in 1..x.len() {
        let mut bi: Value = 0.0;
        for j in 0..i {
            bi = bi.max(best[j] + ((x[i] - x[j]).abs() - c).max(0.0));
        }
        best[i] = bi;
        answer = answer.max(bi);
    }
    Ok(answer)
}

/// Running state of the alternating-extrema sweep.
#[derive(Debug, Clone, Copy)]
enum Leg {
    /// No move larger than `c` yet; running extremes of the values seen.
    Start { lo: Value, hi: Value },
    /// Rising from `from`, highest value so far `peak`.
    Up { from: Value, peak: Value },
    /// Falling from `from`, lowest value so far `trough`.
    Down { from: Value, trough: Value },
}

struct Sweep {
    c: Value,
    done: Value,
    leg: Leg,
}

impl Sweep {
    fn new(x0: Value, c: Value) -> Self {
        Sweep { c, done: 0.0, leg: Leg::Start { lo: x0, hi: x0 } }
    }

    fn push(&mut self, v: Value) {
        let c = self.c;
        self.leg = match self.leg {
            Leg::Start { lo, hi } => {
                if v - lo > c {
                    Leg::Up { from: lo, peak: v }
                } else if hi - v > c {
                    Leg::Down { from: hi, trough: v }
                } else {
                    Leg::Start { lo: lo.min(v), hi: hi.max(v) }
                }
            }
            Leg::Up { from, peak } => {
                if v > peak {
                    Leg::Up { from, peak: v }
                } else if peak - v > c {
                    self.done += peak - from - c;
                    Leg::Down { from: peak, trough: v }
                } else {
                    Leg::Up { from, peak }
                }
            }
            Leg::Down { from, trough } => {
                if v < trough {
                    Leg::Down { from, trough: v }
                } else if v - trough > c {
                    self.done += from - trough - c;
                    Leg::Up { from: trough, peak: v }
                } else {
                    Leg::Down { from, trough }
                }
            }
        };
    }

    /// TTV of the values pushed so far.
    fn value(&self) -> Value {
        self.done
            + match self.leg {
                Leg::Start { .. } => 0.0,
                Leg::Up { from, peak } => peak - from - self.c,
                Leg::Down { from, trough } => from - trough - self.c,
            }
    }
}

/// TTV in one pass: the optimal partition alternates between running extrema
/// that are more than `c` apart, each leg contributing `|Δ| − c`.
pub fn ttv_sweep(path: &SampledPath, c: Value, a: Time, b: Time) -> Result<Value> {
    check_interval(path, c, a, b)?;
    let x = path.window_values(a, b)?;
    let mut sweep = Sweep::new(x[0], c);
    for &v in &x[1..] {
        sweep.push(v);
    }
    Ok(sweep.value())
}

/// `t_i ↦ TTV^c(x, [0, t_i])` at every sample time.
pub fn ttv_prefix(path: &SampledPath, c: Value) -> Result<SampledPath> {
    ensure!(c > 0.0 && c.is_finite(), InvalidArgument, "truncation c must be positive, got {c}");
    let x = path.values();
    let mut sweep = Sweep::new(x[0], c);
    let mut out = Vec::with_capacity(x.len());
    out.push(0.0);
    for &v in &x[1..] {
        sweep.push(v);
        out.push(sweep.value());
    }
    SampledPath::new(path.times().to_vec(), out)
}

/// Closed-threshold crossings of `[z − c/2, z + c/2]` by the path on `[a, b]`.
///
/// The state starts below, above or inside the band from the first value; a
/// crossing is a passage from `≤ z − c/2` to `≥ z + c/2` or back.
pub fn crossing_count(path: &SampledPath, z: Value, c: Value, a: Time, b: Time) -> Result<u64> {
    check_interval(path, c, a, b)?;
    Ok(count_crossings(&path.window_values(a, b)?, z - c / 2.0, z + c / 2.0))
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Below,
    Inside,
    Above,
}

fn count_crossings(x: &[Value], lower: Value, upper: Value) -> u64 {
    let side = |v: Value| {
        if v <= lower {
            Side::Below
        } else if v >= upper {
            Side::Above
        } else {
            Side::Inside
        }
    };
    let mut state = side(x[0]);
    let mut count = 0;
    for &v in &x[1..] {
        match (state, side(v)) {
            (Side::Below, Side::Above) | (Side::Above, Side::Below) => {
                count += 1;
                state = side(v);
            }
            (Side::Inside, s) if s != Side::Inside => state = s,
            _ => {}
        }
    }
    count
}

/// `z ↦ n^{z,c}` as a step function with compact support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingProfile {
    pub c: Value,
    /// Sorted, distinct `z` values where the count may change.
    pub breakpoints: Vec<Value>,
    /// `counts[i]` is the count on `(breakpoints[i], breakpoints[i + 1])`.
    pub counts: Vec<u64>,
}

impl CrossingProfile {
    /// `∫ n^{z,c} dz`.
    pub fn integral(&self) -> Value {
        self.breakpoints
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &n)| n as f64 * (w[1] - w[0]))
            .sum()
    }

    /// `(z_lo, z_hi, count)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (Value, Value, u64)> + '_ {
        self.breakpoints.windows(2).zip(&self.counts).map(|(w, &n)| (w[0], w[1], n))
    }
}

/// The crossing profile on `[a, b]`, exact since the count only changes where
/// `z ± c/2` meets a sample value.
pub fn crossing_profile(path: &SampledPath, c: Value, a: Time, b: Time) -> Result<CrossingProfile> {
    check_interval(path, c, a, b)?;
    let x = path.window_values(a, b)?;
    let mut breakpoints: Vec<Value> =
        x.iter().flat_map(|&v| [v - c / 2.0, v + c / 2.0]).collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let counts = breakpoints
        .par_windows(2)
        .with_min_len(64)
        .map(|w| {
            let z = 0.5 * (w[0] + w[1]);
            count_crossings(&x, z - c / 2.0, z + c / 2.0)
        })
        .collect();
    Ok(CrossingProfile { c, breakpoints, counts })
}

/// `∫ n^{z,c}(x, [a, b]) dz`, which equals `TTV^c(x, [a, b])`.
pub fn banach_indicatrix_integral(path: &SampledPath, c: Value, a: Time, b: Time) -> Result<Value> {
    Ok(crossing_profile(path, c, a, b)?.integral())
}

/// Curves `t ↦ c · TTV^c[0, t]` for each `c` of a positive decreasing schedule.
pub fn qv_from_ttv(path: &SampledPath, c_schedule: &[Value]) -> Result<Vec<(Value, SampledPath)>> {
    ensure!(!c_schedule.is_empty(), InvalidArgument, "empty c schedule");
    ensure!(c_schedule.iter().all(|&c| c > 0.0), InvalidArgument, "c values must be positive");
    ensure!(
        c_schedule.windows(2).all(|w| w[1] < w[0]),
        InvalidArgument,
        "c schedule must be decreasing"
    );
    c_schedule
        .par_iter()
        .map(|&c| Ok((c, ttv_prefix(path, c)?.map_values(|v| c * v)?)))
        .collect()
}

/// The path on `[0, σ(X, M) ∧ t]`; `None` when that interval is a single point.
fn stopped_window(path: &SampledPath, level: Value, t: Time) -> Result<Option<SampledPath>> {
    let s = hitting_time_abs(path, level, 0.0)?.min_time(t);
    if s <= 0.0 {
        return Ok(None);
    }
    Ok(Some(path.truncate(s)?))
}

/// Number of moves between adjacent grid levels in the Lebesgue sequence,
/// not counting a first move that starts off the grid.
pub fn full_cell_steps(path: &SampledPath, grid: GridSpec) -> u64 {
    let seq = lebesgue_sequence(path, grid);
    let steps = seq.len() as u64 - 1;
    let x0 = path.start_value();
    let on_grid = grid.level(grid.floor_index(x0)) == x0;
    if steps > 0 && !on_grid {
        steps - 1
    } else {
        steps
    }
}

/// All quantities of the TTV sandwich at level `m`, on `[0, σ(X, M) ∧ t]`.
///
/// With `c = m^{-2}`, a band of width `c` lies inside every cell of the
/// `(m−1)`-level grids shifted to suitable `z`, and contains a cell of the
/// `(m+1)`-level grids. Integrating crossing counts over `z` gives
///
/// ```text
/// (m−1)^{-3} Σ_{k<m−1} N_k^{(m−1)} ≤ TTV^c ≤ (m+1)^{-3} Σ_{k≤m} N_k^{(m+1)} ≤ (m+1) Σ_{k≤m} [X]^{τ^{m+1,k}}
/// ```
///
/// where `N_k` counts full-cell Lebesgue steps. The QV-weighted sums
/// `(m∓1) Σ [X]^{τ^{m∓1,k}}` are reported as well; the `m−1` one includes the
/// partial first and last increments and need not lie below `TTV^c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub m: u32,
    pub level: Value,
    pub stop: Time,
    pub ttv: Value,
    pub lower_cells: Value,
    pub upper_cells: Value,
    pub lower_qv_weighted: Value,
    pub upper_qv_weighted: Value,
    /// `lower_cells ≤ ttv`.
    pub lower: Check,
    /// `ttv ≤ upper_cells`.
    pub upper: Check,
    /// `upper_cells ≤ upper_qv_weighted`.
    pub upper_qv: Check,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower.holds && self.upper.holds && self.upper_qv.holds
    }
}

/// Evaluates the TTV sandwich for `m ≥ 3`. `level` defaults to `1 + max |X|`,
/// which leaves the path unstopped.
pub fn sandwich_check(
    path: &SampledPath,
    m: u32,
    level: Option<Value>,
    t: Time,
) -> Result<SandwichReport> {
    ensure!(m >= 3, InvalidArgument, "the sandwich needs m >= 3, got {m}");
    let level = level.unwrap_or(1.0 + path.max_abs());
    ensure!(
        (0.0..=path.horizon()).contains(&t),
        Domain,
        "t = {t} outside [0, {}]",
        path.horizon()
    );
    let mf = m as f64;
    let c = 1.0 / (mf * mf);
    let Some(y) = stopped_window(path, level, t)? else {
        let zero = Check::new(0.0, 0.0);
        return Ok(SandwichReport {
            m,
            level,
            stop: 0.0,
            ttv: 0.0,
            lower_cells: 0.0,
            upper_cells: 0.0,
            lower_qv_weighted: 0.0,
            upper_qv_weighted: 0.0,
            lower: zero,
            upper: zero,
            upper_qv: zero,
        });
    };
    let ttv = ttv_sweep(&y, c, 0.0, y.horizon())?;
    let family = |j: u32| -> Result<(f64, f64)> {
        let sums = shifted_grids(j)?
            .into_par_iter()
            .map(|g| {
                let n = full_cell_steps(&y, g) as f64;
                let q = simple_qv(&y, &lebesgue_sequence(&y, g)).final_value();
                (n, q)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        Ok(sums)
    };
    let (n_lo, q_lo) = family(m - 1)?;
    let (n_hi, q_hi) = family(m + 1)?;
    let (lo, hi) = (mf - 1.0, mf + 1.0);
    let lower_cells = n_lo / (lo * lo * lo);
    let upper_cells = n_hi / (hi * hi * hi);
    let lower_qv_weighted = lo * q_lo;
    let upper_qv_weighted = hi * q_hi;
    Ok(SandwichReport {
        m,
        level,
        stop: y.horizon(),
        ttv,
        lower_cells,
        upper_cells,
        lower_qv_weighted,
        upper_qv_weighted,
        lower: Check::new(lower_cells, ttv),
        upper: Check::new(ttv, upper_cells),
        upper_qv: Check::new(upper_cells, upper_qv_weighted),
    })
}

/// `(1/m) Σ_{k<m} [X]^{τ^{m,k} ∧ σ(X, M)}` on the full horizon; `level`
/// defaults to `1 + max |X|`.
pub fn averaged_shifted_qv(path: &SampledPath, m: u32, level: Option<Value>) -> Result<QvCurve> {
    let grids = shifted_grids(m)?;
    let level = level.unwrap_or(1.0 + path.max_abs());
    let stopped = path.stopped(hitting_time_abs(path, level, 0.0)?)?;
    let curves: Vec<QvCurve> =
        grids.into_par_iter().map(|g| simple_qv(&stopped, &lebesgue_sequence(&stopped, g))).collect();
    let refs: Vec<&SampledPath> = curves.iter().map(|q| &q.curve).collect();
    let weights = vec![1.0 / m as f64; refs.len()];
    Ok(QvCurve {
        curve: weighted_sum(&refs, &weights)?,
        source: crate::partitions::Origin::Lebesgue { mesh: 1.0 / (m as f64).powi(2), offset: 0.0 },
    })
}
