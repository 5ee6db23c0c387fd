//! Simple trading strategies, their capital processes and the model-free integral.
//!
//! A simple strategy `(c, (τ_n), (g_n))` holds `g_{n−1}` units on `[τ_{n−1}, τ_n)`;
//! its capital is `(G·X)_t = c + Σ_n g_{n−1} (X(τ_n ∧ t) − X(τ_{n−1} ∧ t))`.
//! Between the union of sample times and stopping times the capital is affine in
//! `X`, so every curve here is exact at its stamps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bdg::{certificate, sequence_along};
use crate::error::{ensure, Result};
use crate::partitions::{Origin, StoppingSequence};
use crate::paths::{hitting_time_abs, union_times, PathCursor, SampledPath, StopTime, Time, Value};
use crate::quadvar::{check_stop_budget, sup_distance};
use crate::stats::{standard_error, tree_sum};

/// `(c, (τ_n), (g_n))` with one position per stopping time.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleStrategy {
    c: Value,
    seq: StoppingSequence,
    g: Vec<Value>,
}

/// File form of a strategy: `{c, taus, gs}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub c: Value,
    pub taus: Vec<Time>,
    pub gs: Vec<Value>,
}

impl SimpleStrategy {
    pub fn new(c: Value, seq: StoppingSequence, g: Vec<Value>) -> Result<Self> {
        ensure!(c.is_finite(), InvalidArgument, "initial capital must be finite");
        ensure!(
            g.len() == seq.len(),
            InvalidArgument,
            "{} positions for {} stopping times",
            g.len(),
            seq.len()
        );
        ensure!(g.iter().all(|v| v.is_finite()), InvalidArgument, "non-finite position");
        Ok(SimpleStrategy { c, seq, g })
    }

    /// The zero strategy with capital `c` trading at time 0 only.
    pub fn zero(c: Value, path: &SampledPath) -> Result<Self> {
        SimpleStrategy::new(c, StoppingSequence::from_times(path, vec![0.0])?, vec![0.0])
    }

    pub fn initial_capital(&self) -> Value {
        self.c
    }

    pub fn sequence(&self) -> &StoppingSequence {
        &self.seq
    }

    pub fn positions(&self) -> &[Value] {
        &self.g
    }

    /// `a·self + b·other` for strategies on the same stopping sequence.
    pub fn combine(&self, a: Value, other: &SimpleStrategy, b: Value) -> Result<Self> {
        ensure!(
            self.seq.times() == other.seq.times(),
            InvalidArgument,
            "strategies must share their stopping sequence"
        );
        let g = self.g.iter().zip(&other.g).map(|(x, y)| a * x + b * y).collect();
        SimpleStrategy::new(a * self.c + b * other.c, self.seq.clone(), g)
    }

    pub fn step_process(&self) -> StepProcess {
        StepProcess::new(self.seq.times().to_vec(), self.g.clone(), self.seq.horizon())
            .expect("strategy invariants")
    }

    pub fn to_file(&self) -> StrategyFile {
        StrategyFile { c: self.c, taus: self.seq.times().to_vec(), gs: self.g.clone() }
    }

    pub fn from_file(file: StrategyFile, path: &SampledPath) -> Result<Self> {
        SimpleStrategy::new(file.c, StoppingSequence::from_times(path, file.taus)?, file.gs)
    }
}

/// The piecewise-constant position path `t ↦ g_{n−1}` on `[τ_{n−1}, τ_n)`.
///
/// Runs of equal stopping times are collapsed to their last position, since
/// the intermediate intervals are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepProcess {
    times: Vec<Time>,
    g: Vec<Value>,
    horizon: Time,
}

impl StepProcess {
    pub fn new(times: Vec<Time>, g: Vec<Value>, horizon: Time) -> Result<Self> {
        ensure!(times.len() == g.len() && !times.is_empty(), InvalidArgument, "one position per time");
        ensure!(times[0] == 0.0, InvalidArgument, "a step process starts at 0");
        ensure!(
            times.windows(2).all(|w| w[0] <= w[1]),
            InvalidArgument,
            "times must be non-decreasing"
        );
        let mut ts: Vec<Time> = Vec::with_capacity(times.len());
        let mut gs: Vec<Value> = Vec::with_capacity(g.len());
        for (t, v) in times.into_iter().zip(g) {
            if ts.last() == Some(&t) {
                *gs.last_mut().expect("non-empty") = v;
            } else {
                ts.push(t);
                gs.push(v);
            }
        }
        Ok(StepProcess { times: ts, g: gs, horizon })
    }

    /// The constant process `g`.
    pub fn constant(g: Value, horizon: Time) -> Self {
        StepProcess { times: vec![0.0], g: vec![g], horizon }
    }

    pub fn times(&self) -> &[Time] {
        &self.times
    }

    pub fn positions(&self) -> &[Value] {
        &self.g
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn value_at(&self, t: Time) -> Value {
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        self.g[i]
    }

    fn cursor(&self) -> StepCursor<'_> {
        StepCursor { p: self, i: 0 }
    }

    /// The pointwise product, a step process on the merged times.
    pub fn product(&self, other: &StepProcess) -> StepProcess {
        let times = union_times(&[&self.times, &other.times]);
        let (mut a, mut b) = (self.cursor(), other.cursor());
        let g = times.iter().map(|&t| a.value_at(t) * b.value_at(t)).collect();
        StepProcess { times, g, horizon: self.horizon.min(other.horizon) }
    }

    /// The strategy with these positions and capital `c`, trading on `path`.
    pub fn to_strategy(&self, c: Value, path: &SampledPath) -> Result<SimpleStrategy> {
        let times: Vec<Time> =
            self.times.iter().copied().filter(|&t| t <= path.horizon()).collect();
        let g = self.g[..times.len()].to_vec();
        SimpleStrategy::new(c, StoppingSequence::from_times(path, times)?, g)
    }
}

struct StepCursor<'a> {
    p: &'a StepProcess,
    i: usize,
}

impl StepCursor<'_> {
    fn value_at(&mut self, t: Time) -> Value {
        while self.i + 1 < self.p.times.len() && self.p.times[self.i + 1] <= t {
            self.i += 1;
        }
        self.p.g[self.i]
    }
}

/// `Σ g_{n−1}(v(τ_n ∧ t) − v(τ_{n−1} ∧ t))` for every stamp `t` of the union of
/// `v`'s samples and `times`, starting from `c`.
fn accumulate(c: Value, times: &[Time], g: &[Value], v: &SampledPath) -> SampledPath {
    let horizon = v.horizon();
    let stamps: Vec<Time> = union_times(&[v.times(), times]).into_iter().filter(|&t| t <= horizon).collect();
    let mut cv = v.cursor();
    let mut next = 1;
    let mut sum = c;
    let mut anchor = v.start_value();
    let mut pos = g[0];
    let mut values = Vec::with_capacity(stamps.len());
    for &t in &stamps {
        let vt = cv.value_at(t);
        while next < times.len() && times[next] <= t {
            // stopping times are stamps: any τ_n ≤ t reached here equals t
            sum += pos * (vt - anchor);
            anchor = vt;
            pos = g[next];
            next += 1;
        }
        values.push(sum + pos * (vt - anchor));
    }
    SampledPath::new(stamps, values).expect("stamps sorted from 0")
}

/// `t ↦ (G·X)_t` on the union of the path samples and the stopping times.
pub fn capital_process(strategy: &SimpleStrategy, x: &SampledPath) -> SampledPath {
    accumulate(strategy.c, strategy.seq.times(), &strategy.g, x)
}

/// The stopping times before `s`, then `s` itself, and the path values there.
fn sequence_until(seq: &StoppingSequence, x: &SampledPath, s: StopTime) -> StoppingSequence {
    let Some(s) = s.finite().filter(|&s| s <= seq.horizon()) else {
        return seq.clone();
    };
    let k = seq.times().partition_point(|&t| t < s);
    let mut times = seq.times()[..k].to_vec();
    let mut values = seq.values()[..k].to_vec();
    if times.is_empty() || times.last() != Some(&s) {
        times.push(s);
        values.push(x.eval(s));
    }
    StoppingSequence::from_parts(times, values, seq.horizon(), seq.origin().clone())
}

/// The strategy `g_n = 2(X(τ_n) − X(0))` for `τ_n < σ(X, M)`, `0` afterwards.
///
/// Its capital is `(X(t ∧ σ) − X(0))² − [X]^τ_{t ∧ σ}`. The stop `σ` is inserted
/// into the sequence with position 0 so that the identity holds at every stamp,
/// not only before `σ`.
pub fn witness_strategy_qv(
    x: &SampledPath,
    seq: &StoppingSequence,
    level: Value,
) -> Result<SimpleStrategy> {
    let sigma = hitting_time_abs(x, level, 0.0)?;
    let seq = sequence_until(seq, x, sigma);
    let x0 = x.start_value();
    let g = seq
        .times()
        .iter()
        .map(|&t| if sigma.is_after(t) { 2.0 * (x.eval(t) - x0) } else { 0.0 })
        .collect();
    SimpleStrategy::new(0.0, seq, g)
}

/// Which inequality a BDG witness trades for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BdgSide {
    /// The maximal inequality: `h` (p = 1) or `g` (p > 1).
    #[default]
    Upper,
    /// The bracket inequality: `h` (p = 1) or `f` (p > 1).
    Lower,
}

/// The strategy trading the BDG integrand along `seq`, stopped at
/// `σ(X, M) ∧ ρ` where `ρ` is an extra stop (e.g. a divergence time between
/// QV curves; `StopTime::Never` when unused).
pub fn bdg_witness_strategy(
    x: &SampledPath,
    seq: &StoppingSequence,
    p: f64,
    level: Value,
    rho: StopTime,
    side: BdgSide,
) -> Result<SimpleStrategy> {
    ensure!(p >= 1.0, InvalidArgument, "p must be at least 1, got {p}");
    let cert = certificate(&sequence_along(x, seq, true)?, p)?;
    let integrand = match (side, p == 1.0) {
        (_, true) => &cert.h,
        (BdgSide::Upper, false) => &cert.g,
        (BdgSide::Lower, false) => &cert.f,
    };
    let stop = hitting_time_abs(x, level, 0.0)?.min(rho);
    let stopped = sequence_until(seq, x, stop);
    let g = stopped
        .times()
        .iter()
        .enumerate()
        .map(|(n, &t)| if stop.is_after(t) { integrand[n] } else { 0.0 })
        .collect();
    SimpleStrategy::new(0.0, stopped, g)
}

/// `F^m`: positions `F(τ_n)` at the times where `F` has moved by `2^{-m}` from its
/// value at the previous stop.
///
/// The anchors are `F(0) + k·2^{-m}`, so the stops are hits of a grid through
/// `F(0)` and `|F − F^m| ≤ 2^{-m}` holds everywhere.
pub fn step_approximation(f: &SampledPath, m: u32) -> Result<StepProcess> {
    Ok(step_sequence(f, m)?.1)
}

fn step_sequence(f: &SampledPath, m: u32) -> Result<(StoppingSequence, StepProcess)> {
    let theta = (-(m as f64)).exp2();
    check_stop_budget(f, theta)?;
    let (ts, xs) = (f.times(), f.values());
    let f0 = xs[0];
    let level = |k: i64| f0 + k as f64 * theta;
    let mut k: i64 = 0;
    let mut times = vec![0.0];
    let mut values = vec![f0];
    for i in 1..ts.len() {
        let (t0, a, t1, b) = (ts[i - 1], xs[i - 1], ts[i], xs[i]);
        if b > a {
            while b >= level(k + 1) {
                k += 1;
                times.push(crate::paths::segment_crossing(t0, a, t1, b, level(k)));
                values.push(level(k));
            }
        } else if b < a {
            while b <= level(k - 1) {
                k -= 1;
                times.push(crate::paths::segment_crossing(t0, a, t1, b, level(k)));
                values.push(level(k));
            }
        }
    }
    let seq = StoppingSequence::from_parts(
        times.clone(),
        values.clone(),
        f.horizon(),
        Origin::Oscillation { threshold: theta },
    );
    Ok((seq, StepProcess::new(times, values, f.horizon())?))
}

/// The curves `F^m·X`, `m = 0, …, m_max`, and their consecutive sup-distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub curves: Vec<SampledPath>,
    pub cauchy: Vec<Value>,
}

impl IntegralReport {
    pub fn estimate(&self) -> &SampledPath {
        self.curves.last().expect("at least one level")
    }
}

/// `F^m·X` for the step approximations of `f`; the last curve estimates `∫ F dX`.
pub fn model_free_integral(f: &SampledPath, x: &SampledPath, m_max: u32) -> Result<IntegralReport> {
    ensure!(m_max >= 1, InvalidArgument, "m_max must be at least 1");
    ensure!(
        f.horizon() >= x.horizon(),
        Domain,
        "integrand horizon {} shorter than the integrator's {}",
        f.horizon(),
        x.horizon()
    );
    let curves = (0..=m_max)
        .into_par_iter()
        .map(|m| Ok(capital_process(&step_approximation(f, m)?.to_strategy(0.0, x)?, x)))
        .collect::<Result<Vec<_>>>()?;
    let cauchy = curves.windows(2).map(|w| sup_distance(&w[0], &w[1])).collect();
    Ok(IntegralReport { curves, cauchy })
}

/// An integrand for Stieltjes integrals.
#[derive(Debug, Clone, Copy)]
pub enum Integrand<'a> {
    Step(&'a StepProcess),
    /// Evaluated at the left end of each mesh interval.
    Sampled(&'a SampledPath),
}

impl Integrand<'_> {
    fn times(&self) -> &[Time] {
        match self {
            Integrand::Step(s) => s.times(),
            Integrand::Sampled(p) => p.times(),
        }
    }
}

/// `∫_0^t g dv` for a curve `v` of finite variation.
///
/// Exact for step integrands; sampled integrands use left-point sums on the
/// union of both meshes.
pub fn stieltjes_integral(g: Integrand<'_>, v: &SampledPath, t: Time) -> Result<Value> {
    ensure!(
        (0.0..=v.horizon()).contains(&t),
        Domain,
        "t = {t} outside [0, {}]",
        v.horizon()
    );
    let v = if t < v.horizon() { v.truncate(t)? } else { v.clone() };
    ensure!(v.total_variation().is_finite(), Domain, "integrator of infinite variation");
    match g {
        Integrand::Step(s) => {
            let times: Vec<Time> = s.times().iter().copied().filter(|&u| u <= t).collect();
            Ok(accumulate(0.0, &times, &s.positions()[..times.len()], &v).end_value())
        }
        Integrand::Sampled(p) => {
            ensure!(p.horizon() >= t, Domain, "integrand shorter than the integration range");
            let stamps = union_times(&[v.times(), p.times()]);
            let mut cg = p.cursor();
            let mut cv = v.cursor();
            let mut terms = Vec::with_capacity(stamps.len());
            let (mut g_prev, mut v_prev) = (cg.value_at(0.0), cv.value_at(0.0));
            for &s in stamps.iter().skip(1).take_while(|&&s| s <= t) {
                let vs = cv.value_at(s);
                terms.push(g_prev * (vs - v_prev));
                g_prev = cg.value_at(s);
                v_prev = vs;
            }
            Ok(tree_sum(&terms))
        }
    }
}

/// `∫_0^s (G − H)² dv` with the integrand evaluated at the left end of each
/// interval of the union mesh (exact when both are step processes).
pub fn squared_difference_integral(
    g: Integrand<'_>,
    h: Integrand<'_>,
    v: &SampledPath,
    s: Time,
) -> Value {
    squared_difference_integrals(g, h, v, &[s])[0]
}

enum IntegrandCursor<'a> {
    Step(StepCursor<'a>),
    Sampled(PathCursor<'a>),
}

impl IntegrandCursor<'_> {
    fn value_at(&mut self, t: Time) -> Value {
        match self {
            IntegrandCursor::Step(c) => c.value_at(t),
            IntegrandCursor::Sampled(c) => c.value_at(t),
        }
    }
}

impl<'a> Integrand<'a> {
    fn cursor(&self) -> IntegrandCursor<'a> {
        match *self {
            Integrand::Step(s) => IntegrandCursor::Step(s.cursor()),
            Integrand::Sampled(p) => IntegrandCursor::Sampled(p.cursor()),
        }
    }
}

/// [`squared_difference_integral`] at each of the nondecreasing `stops`, in one pass.
fn squared_difference_integrals(g: Integrand<'_>, h: Integrand<'_>, v: &SampledPath, stops: &[Time]) -> Vec<Value> {
    let stops: Vec<Time> = stops.iter().map(|&s| s.clamp(0.0, v.horizon())).collect();
    debug_assert!(stops.windows(2).all(|w| w[0] <= w[1]));
    let last = stops.last().copied().unwrap_or(0.0);
    let stamps = union_times(&[v.times(), g.times(), h.times(), &stops]);
    let (mut cg, mut ch, mut cv) = (g.cursor(), h.cursor(), v.cursor());
    let mut out = Vec::with_capacity(stops.len());
    let mut terms = Vec::new();
    let mut next = 0;
    let mut v_prev = cv.value_at(0.0);
    let mut d_prev = cg.value_at(0.0) - ch.value_at(0.0);
    while next < stops.len() && stops[next] <= 0.0 {
        out.push(0.0);
        next += 1;
    }
    for &t in stamps.iter().skip_while(|&&t| t <= 0.0).take_while(|&&t| t <= last) {
        let vt = cv.value_at(t);
        terms.push(d_prev * d_prev * (vt - v_prev));
        d_prev = cg.value_at(t) - ch.value_at(t);
        v_prev = vt;
        while next < stops.len() && stops[next] <= t {
            out.push(tree_sum(&terms));
            next += 1;
        }
    }
    let total = tree_sum(&terms);
    out.resize(stops.len(), total);
    out
}

/// Monte Carlo surrogate of a localized pseudo-distance
/// `Σ_N 2^{-N} E[D_N]`, with `D_N` a per-path quantity on `[0, σ(X, N) ∧ T]`.
///
/// Levels above `n_max` are represented by the full-horizon value, weighted by
/// the remaining mass `2^{-n_max}`. Empirical surrogate: the mean replaces the
/// outer expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistanceReport {
    pub n_max: u32,
    pub paths: usize,
    /// `Σ_N 2^{-N} D_N` for each path.
    pub per_path: Vec<Value>,
    /// `E[D_N]` for `N = 1, …, n_max`, then the full-horizon mean.
    pub per_level_means: Vec<Value>,
    pub value: Value,
    pub standard_error: Value,
}

impl EmpiricalDistanceReport {
    /// `terms[i]` holds `D_1, …, D_{n_max}, D_∞` for path `i`.
    pub fn from_terms(n_max: u32, terms: &[Vec<Value>]) -> Result<Self> {
        ensure!(!terms.is_empty(), InvalidArgument, "empty path set");
        let levels = n_max as usize + 1;
        ensure!(terms.iter().all(|t| t.len() == levels), InvalidArgument, "ragged terms");
        let weight = |j: usize| (-((j + 1).min(n_max as usize) as f64)).exp2();
        let per_path: Vec<Value> = terms
            .iter()
            .map(|t| t.iter().enumerate().map(|(j, v)| weight(j) * v).sum())
            .collect();
        let per_level_means = (0..levels)
            .map(|j| tree_sum(&terms.iter().map(|t| t[j]).collect::<Vec<_>>()) / terms.len() as f64)
            .collect();
        let value = tree_sum(&per_path) / per_path.len() as f64;
        Ok(EmpiricalDistanceReport {
            n_max,
            paths: terms.len(),
            standard_error: standard_error(&per_path),
            per_path,
            per_level_means,
            value,
        })
    }
}

/// One path of a `d_QV` ensemble: the integrator, its QV curve and two integrands.
#[derive(Debug, Clone, Copy)]
pub struct DqvCase<'a> {
    pub x: &'a SampledPath,
    pub qv: &'a SampledPath,
    pub g: Integrand<'a>,
    pub h: Integrand<'a>,
}

fn localization_times(x: &SampledPath, n_max: u32) -> Result<Vec<Time>> {
    let horizon = x.horizon();
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 1..=n_max {
        out.push(hitting_time_abs(x, n as f64, 0.0)?.min_time(horizon));
    }
    out.push(horizon);
    Ok(out)
}

/// `D_N = (∫_0^{σ(X,N)} (G − H)² d[X])^{1/2}` for `N = 1, …, n_max`, then the
/// full-horizon value, for one path.
pub fn dqv_terms(case: &DqvCase<'_>, n_max: u32) -> Result<Vec<Value>> {
    let stops = localization_times(case.x, n_max)?;
    Ok(squared_difference_integrals(case.g, case.h, case.qv, &stops)
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect())
}

/// Empirical `d_QV` over an ensemble; `qv` should be nondecreasing (see
/// [`crate::quadvar::qv_along_stops`]).
pub fn empirical_dqv(cases: &[DqvCase<'_>], n_max: u32) -> Result<EmpiricalDistanceReport> {
    ensure!(n_max >= 1, InvalidArgument, "n_max must be at least 1");
    let terms = cases.par_iter().map(|c| dqv_terms(c, n_max)).collect::<Result<Vec<_>>>()?;
    EmpiricalDistanceReport::from_terms(n_max, &terms)
}

/// One path of a `d_∞` ensemble.
#[derive(Debug, Clone, Copy)]
pub struct DinfCase<'a> {
    pub x: &'a SampledPath,
    pub y: &'a SampledPath,
    pub z: &'a SampledPath,
}

/// `sup_{s ≤ t} |p(s)|` for a piecewise-linear `p`.
fn running_sup_until(p: &SampledPath, t: Time) -> Value {
    let k = p.times().partition_point(|&s| s <= t);
    let head = p.values()[..k].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    head.max(p.eval(t.min(p.horizon())).abs())
}

/// `D_N = sup_{s ≤ σ(X,N)} |Y_s − Z_s|` for `N = 1, …, n_max`, then the
/// full-horizon value, for one path.
pub fn dinf_terms(case: &DinfCase<'_>, n_max: u32) -> Result<Vec<Value>> {
    let diff = case.y.linear_combination(1.0, case.z, -1.0);
    let stops = localization_times(case.x, n_max)?;
    Ok(stops.iter().map(|&s| running_sup_until(&diff, s)).collect())
}

/// Empirical `d_∞` over an ensemble.
pub fn empirical_dinf(cases: &[DinfCase<'_>], n_max: u32) -> Result<EmpiricalDistanceReport> {
    ensure!(n_max >= 1, InvalidArgument, "n_max must be at least 1");
    let terms = cases.par_iter().map(|c| dinf_terms(c, n_max)).collect::<Result<Vec<_>>>()?;
    EmpiricalDistanceReport::from_terms(n_max, &terms)
}

/// `F·X` for `F` localized at `σ(F, N)` along an increasing schedule of `N`.
///
/// Consecutive integrals must agree on `[0, σ(F, N)]`; a disagreement is a
/// consistency error. Returns the integral for the largest `N`.
pub fn localized_integral(
    f: &SampledPath,
    x: &SampledPath,
    n_schedule: &[Value],
    m_max: u32,
) -> Result<SampledPath> {
    ensure!(!n_schedule.is_empty(), InvalidArgument, "empty localization schedule");
    ensure!(
        n_schedule.windows(2).all(|w| w[0] < w[1]) && n_schedule[0] > 0.0,
        InvalidArgument,
        "localization levels must be positive and increasing"
    );
    let mut previous: Option<(Time, SampledPath)> = None;
    for &n in n_schedule {
        let sigma = hitting_time_abs(f, n, 0.0)?;
        let stopped = f.stopped(sigma)?;
        let curve = model_free_integral(&stopped, x, m_max)?.curves.pop().expect("levels");
        if let Some((s_prev, prev)) = &previous {
            let mut ca = prev.cursor();
            let mut cb = curve.cursor();
            for &t in union_times(&[prev.times(), curve.times()]).iter().filter(|&&t| t <= *s_prev) {
                let (a, b) = (ca.value_at(t), cb.value_at(t));
                ensure!(
                    (a - b).abs() <= 1e-9 * (1.0 + a.abs()),
                    Consistency,
                    "localized integrals differ at t = {t}: {a} vs {b}"
                );
            }
        }
        previous = Some((sigma.min_time(x.horizon()), curve));
    }
    Ok(previous.expect("non-empty schedule").1)
}
