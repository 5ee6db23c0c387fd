//! Simple quadratic variation and covariation along stopping sequences.
//!
//! `[X, Y]^τ_t = Σ_n (X(τ_n ∧ t) − X(τ_{n−1} ∧ t))·(Y(τ_n ∧ t) − Y(τ_{n−1} ∧ t))`,
//! i.e. the completed increments up to `t` plus the running one from the last
//! stopping time `≤ t` to `t`. Curves are stamped at the union of the sample
//! times and the stopping times and are exact at every stamp.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::partitions::{
    lebesgue_sequence, merge, verify_fine_cover, GridSpec, Origin, StoppingSequence,
};
use crate::paths::{union_times, SampledPath, Time, Value};
use crate::Check;

/// Stop-count ceiling for dyadic estimates.
pub const MAX_STOPS: f64 = 1e8;

/// A quadratic (co)variation curve together with the sequence it was taken along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QvCurve {
    pub curve: SampledPath,
    pub source: Origin,
}

impl QvCurve {
    pub fn at(&self, t: Time) -> Result<Value> {
        self.curve.evaluate(t)
    }

    pub fn final_value(&self) -> Value {
        self.curve.end_value()
    }
}

/// `[X, Y]^τ_t` at a single time, computed directly from the definition.
pub fn covariation_at(
    x: &SampledPath,
    y: &SampledPath,
    seq: &StoppingSequence,
    t: Time,
) -> Result<Value> {
    let (xt, yt) = (x.evaluate(t)?, y.evaluate(t)?);
    let ts = seq.times();
    let mut sum = 0.0;
    let (mut xa, mut ya) = (x.eval(0.0), y.eval(0.0));
    for &s in &ts[1..] {
        if s > t {
            break;
        }
        let (xb, yb) = (x.eval(s), y.eval(s));
        sum += (xb - xa) * (yb - ya);
        xa = xb;
        ya = yb;
    }
    Ok(sum + (xt - xa) * (yt - ya))
}

/// `t ↦ [X, Y]^τ_t` on the union of the sample times of both paths and the
/// stopping times, up to the shorter horizon.
pub fn simple_qcov(x: &SampledPath, y: &SampledPath, seq: &StoppingSequence) -> QvCurve {
    let horizon = x.horizon().min(y.horizon());
    let stamps: Vec<Time> = if std::ptr::eq(x, y) {
        union_times(&[x.times(), seq.times()])
    } else {
        union_times(&[x.times(), y.times(), seq.times()])
    };
    let ts = seq.times();
    let mut cx = x.cursor();
    let mut cy = y.cursor();
    let mut next = 1;
    let mut sum = 0.0;
    let (mut xa, mut ya) = (x.eval(0.0), y.eval(0.0));
    let mut times = Vec::with_capacity(stamps.len());
    let mut values = Vec::with_capacity(stamps.len());
    for t in stamps.into_iter().filter(|&t| t <= horizon) {
        let (xt, yt) = (cx.value_at(t), cy.value_at(t));
        // Complete every increment ending at or before t. Stopping times
        // are stamps, so any τ_n ≤ t beyond the first equals t.
        while next < ts.len() && ts[next] <= t {
            let s = ts[next];
            let (xb, yb) = if s == t { (xt, yt) } else { (x.eval(s), y.eval(s)) };
            sum += (xb - xa) * (yb - ya);
            xa = xb;
            ya = yb;
            next += 1;
        }
        times.push(t);
        values.push(sum + (xt - xa) * (yt - ya));
    }
    let curve = SampledPath::new(times, values).expect("stamps are sorted and start at 0");
    QvCurve { curve, source: seq.origin().clone() }
}

/// `t ↦ [X]^τ_t`.
pub fn simple_qv(x: &SampledPath, seq: &StoppingSequence) -> QvCurve {
    simple_qcov(x, x, seq)
}

/// `[X]^τ` through its values at the stopping times and at the horizon,
/// linear in between: a nondecreasing curve, usable as an integrator.
pub fn qv_along_stops(x: &SampledPath, seq: &StoppingSequence) -> QvCurve {
    let mut times = seq.times().to_vec();
    times.dedup();
    if seq.last_time() < x.horizon() {
        times.push(x.horizon());
    }
    let mut c = x.cursor();
    let mut prev = c.value_at(0.0);
    let mut sum = 0.0;
    let values = times
        .iter()
        .map(|&t| {
            let v = c.value_at(t);
            sum += (v - prev) * (v - prev);
            prev = v;
            sum
        })
        .collect();
    let curve = SampledPath::new(times, values).expect("deduplicated stopping times");
    QvCurve { curve, source: seq.origin().clone() }
}

/// `¼[X + Y]^τ − ¼[X − Y]^τ`.
pub fn polarization_qcov(x: &SampledPath, y: &SampledPath, seq: &StoppingSequence) -> QvCurve {
    let sum = x.linear_combination(1.0, y, 1.0);
    let diff = x.linear_combination(1.0, y, -1.0);
    let qp = simple_qv(&sum, seq);
    let qm = simple_qv(&diff, seq);
    QvCurve { curve: qp.curve.linear_combination(0.25, &qm.curve, -0.25), source: qp.source }
}

/// Outcome of [`merge_error_bound_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MergeBoundReport {
    /// `[[X]^σ − [X]^υ]^υ ≤ 4δ²[X]^υ` at the horizon.
    Evaluated(Check),
    /// `sigma` does not finely cover the path with accuracy `delta`.
    Inapplicable { worst_oscillation: Value },
}

impl MergeBoundReport {
    pub fn holds(&self) -> Option<bool> {
        match self {
            MergeBoundReport::Evaluated(c) => Some(c.holds),
            MergeBoundReport::Inapplicable { .. } => None,
        }
    }
}

/// The error made by replacing `[X]^σ` with `[X]^υ`, `υ = merge(σ, τ)`, measured
/// by the simple quadratic variation along `υ` of the difference of both curves.
pub fn merge_error_bound_check(
    x: &SampledPath,
    sigma: &StoppingSequence,
    tau: &StoppingSequence,
    delta: Value,
) -> Result<MergeBoundReport> {
    let cover = verify_fine_cover(x, sigma, delta)?;
    if !cover.holds {
        return Ok(MergeBoundReport::Inapplicable { worst_oscillation: cover.worst_oscillation });
    }
    let upsilon = merge(sigma, tau, x)?;
    let q_sigma = simple_qv(x, sigma);
    let q_upsilon = simple_qv(x, &upsilon);
    let diff = q_sigma.curve.linear_combination(1.0, &q_upsilon.curve, -1.0);
    let lhs = simple_qv(&diff, &upsilon).final_value();
    let rhs = 4.0 * delta * delta * q_upsilon.final_value();
    Ok(MergeBoundReport::Evaluated(Check::new(lhs, rhs)))
}

/// `[X]^{τ(X, 2^{-m}, 0)}` for `m = 0, …, m_max`.
pub fn qv_estimate_dyadic(path: &SampledPath, m_max: u32) -> Result<Vec<QvCurve>> {
    ensure!(m_max >= 1, InvalidArgument, "m_max must be at least 1");
    check_stop_budget(path, (-(m_max as f64)).exp2())?;
    Ok((0..=m_max)
        .map(|m| simple_qv(path, &lebesgue_sequence(path, GridSpec::dyadic(m))))
        .collect())
}

/// Fails when a grid of mesh `d` could produce more than [`MAX_STOPS`] stops.
pub fn check_stop_budget(path: &SampledPath, d: Value) -> Result<()> {
    let bound = path.total_variation() / d + 1.0;
    ensure!(
        bound <= MAX_STOPS,
        ResourceLimit,
        "mesh {d} may produce up to {bound:.3e} stopping times"
    );
    Ok(())
}

/// `sup_t |a(t) − b(t)|` over the common horizon, exact for piecewise-linear curves.
pub fn sup_distance(a: &SampledPath, b: &SampledPath) -> Value {
    a.linear_combination(1.0, b, -1.0).max_abs()
}

/// Sup-distances between consecutive curves, the Cauchy diagnostic of a refinement.
pub fn consecutive_sup_distances(curves: &[QvCurve]) -> Vec<Value> {
    curves.windows(2).map(|w| sup_distance(&w[0].curve, &w[1].curve)).collect()
}

/// `max_n |Y(τ_n ∧ t)|`.
pub fn sup_along(seq: &StoppingSequence, path: &SampledPath, t: Time) -> Result<Value> {
    let yt = path.evaluate(t)?;
    let mut best: Value = 0.0;
    for &s in seq.times() {
        if s >= t {
            best = best.max(yt.abs());
            break;
        }
        best = best.max(path.eval(s).abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> SampledPath {
        SampledPath::new(vec![0.0, 1.0], vec![0.0, 2.5]).unwrap()
    }

    fn zigzag() -> SampledPath {
        SampledPath::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0, 1.0]).unwrap()
    }

    fn leb(p: &SampledPath, d: f64) -> StoppingSequence {
        lebesgue_sequence(p, GridSpec::new(d, 0.0).unwrap())
    }

    #[test]
    fn simple_qv_examples() {
        let r = ramp();
        let q = simple_qv(&r, &leb(&r, 1.0));
        assert!((q.final_value() - 2.25).abs() < 1e-12);
        assert_eq!(q.curve.times(), &[0.0, 0.4, 0.8, 1.0]);

        let c = SampledPath::constant(1.0, 2.0).unwrap();
        assert_eq!(simple_qv(&c, &leb(&c, 0.1)).curve.max_abs(), 0.0);

        let z = SampledPath::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        let s = StoppingSequence::from_times(&z, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(simple_qv(&z, &s).final_value(), 2.0);
    }

    #[test]
    fn along_stops_is_monotone_and_agrees_at_stops() {
        let z = zigzag();
        let s = StoppingSequence::from_times(&z, vec![0.0, 0.5, 2.2]).unwrap();
        let full = simple_qv(&z, &s);
        let q = qv_along_stops(&z, &s);
        assert_eq!(q.curve.times(), &[0.0, 0.5, 2.2, 3.0]);
        assert!(q.curve.values().windows(2).all(|w| w[1] >= w[0]));
        for &t in q.curve.times() {
            assert!((q.at(t).unwrap() - full.at(t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_matches_pointwise_definition() {
        let z = zigzag();
        let s = StoppingSequence::from_times(&z, vec![0.0, 0.5, 2.2]).unwrap();
        let q = simple_qv(&z, &s);
        assert_eq!(q.curve.times(), &[0.0, 0.5, 1.0, 2.0, 2.2, 3.0]);
        for &t in q.curve.times() {
            assert!((q.at(t).unwrap() - covariation_at(&z, &z, &s, t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn qcov_examples() {
        let r = ramp();
        let s = leb(&r, 1.0);
        let neg = r.map_values(|v| -v).unwrap();
        assert_eq!(simple_qcov(&r, &r, &s), simple_qv(&r, &s));
        let q = simple_qcov(&r, &neg, &s);
        assert!((q.final_value() + 2.25).abs() < 1e-12);

        let x = SampledPath::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]).unwrap();
        let y = SampledPath::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        let s = StoppingSequence::from_times(&x, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(simple_qcov(&x, &y, &s).final_value(), 0.0);
    }

    #[test]
    fn polarization_examples() {
        let r = ramp();
        let s = leb(&r, 1.0);
        let p = polarization_qcov(&r, &r, &s);
        assert!(sup_distance(&p.curve, &simple_qv(&r, &s).curve) < 1e-12);
        let c = SampledPath::constant(3.0, 1.0).unwrap();
        assert!(polarization_qcov(&r, &c, &s).curve.max_abs() < 1e-12);
    }

    #[test]
    fn merge_bound_examples() {
        let z = zigzag();
        let sigma = leb(&z, 1.0);
        let tau = StoppingSequence::from_times(&z, vec![0.0, 0.5]).unwrap();
        let rep = merge_error_bound_check(&z, &sigma, &tau, 1.0).unwrap();
        assert_eq!(rep.holds(), Some(true));

        let sub = StoppingSequence::from_times(&z, vec![0.0, 2.0]).unwrap();
        match merge_error_bound_check(&z, &sigma, &sub, 1.0).unwrap() {
            MergeBoundReport::Evaluated(c) => {
                assert_eq!(c.lhs, 0.0);
                assert!(c.holds);
            }
            other => panic!("{other:?}"),
        }

        let c = SampledPath::constant(0.0, 1.0).unwrap();
        let s = leb(&c, 1.0);
        match merge_error_bound_check(&c, &s, &s, 1.0).unwrap() {
            MergeBoundReport::Evaluated(ch) => assert_eq!((ch.lhs, ch.rhs), (0.0, 0.0)),
            other => panic!("{other:?}"),
        }

        let r = ramp();
        let coarse = StoppingSequence::from_times(&r, vec![0.0]).unwrap();
        assert_eq!(merge_error_bound_check(&r, &coarse, &coarse, 1.0).unwrap().holds(), None);
    }

    #[test]
    fn dyadic_examples() {
        let line = SampledPath::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let curves = qv_estimate_dyadic(&line, 3).unwrap();
        assert_eq!(curves.len(), 4);
        assert!((curves[3].final_value() - 0.125).abs() < 1e-15);

        let c = SampledPath::constant(0.0, 1.0).unwrap();
        assert!(qv_estimate_dyadic(&c, 5).unwrap().iter().all(|q| q.curve.max_abs() == 0.0));
        assert!(qv_estimate_dyadic(&c, 0).is_err());

        let big = SampledPath::new(vec![0.0, 1.0], vec![0.0, 1e3]).unwrap();
        assert!(matches!(qv_estimate_dyadic(&big, 20), Err(crate::Error::ResourceLimit(_))));
    }

    #[test]
    fn sup_along_examples() {
        let r = ramp();
        let s0 = StoppingSequence::from_times(&r, vec![0.0]).unwrap();
        assert_eq!(sup_along(&s0, &r, 0.0).unwrap(), 0.0);
        let z = zigzag();
        assert_eq!(sup_along(&leb(&z, 1.0), &z, 3.0).unwrap(), 1.0);
        let s = StoppingSequence::from_times(&r, vec![0.0, 0.4, 0.8]).unwrap();
        assert!((sup_along(&s, &r, 0.6).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_qv_means_constant() {
        let wiggle = SampledPath::new(vec![0.0, 1.0, 2.0], vec![0.0, 1e-3, 0.0]).unwrap();
        let top = qv_estimate_dyadic(&wiggle, 12).unwrap();
        assert!(top.last().unwrap().final_value() > 0.0);
        let c = SampledPath::constant(0.7, 2.0).unwrap();
        let top = qv_estimate_dyadic(&c, 12).unwrap();
        assert_eq!(top.last().unwrap().curve.max_abs(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_path() -> impl Strategy<Value = SampledPath> {
            prop::collection::vec((0.01f64..1.0, -0.6f64..0.6), 1..50).prop_map(|steps| {
                let (mut t, mut x) = (0.0, 0.0);
                let mut times = vec![0.0];
                let mut values = vec![0.0];
                for (dt, dx) in steps {
                    t += dt;
                    x += dx;
                    times.push(t);
                    values.push(x);
                }
                SampledPath::new(times, values).unwrap()
            })
        }

        fn arb_pair() -> impl Strategy<Value = (SampledPath, SampledPath, Vec<f64>)> {
            (arb_path(), prop::collection::vec(-0.6f64..0.6, 50), prop::collection::vec(0.0f64..1.0, 0..20))
                .prop_map(|(x, dy, fracs)| {
                    let mut y = vec![0.0];
                    for i in 1..x.len() {
                        y.push(y[i - 1] + dy[i % dy.len()]);
                    }
                    let y = SampledPath::new(x.times().to_vec(), y).unwrap();
                    (x, y, fracs)
                })
        }

        fn explicit_seq(p: &SampledPath, fracs: &[f64]) -> StoppingSequence {
            let mut times: Vec<f64> = fracs.iter().map(|f| f * p.horizon()).collect();
            times.push(0.0);
            times.sort_by(f64::total_cmp);
            StoppingSequence::from_times(p, times).unwrap()
        }

        proptest! {
            #[test]
            fn polarization_identity((x, y, fracs) in arb_pair()) {
                let s = explicit_seq(&x, &fracs);
                let a = simple_qcov(&x, &y, &s);
                let b = polarization_qcov(&x, &y, &s);
                prop_assert!(sup_distance(&a.curve, &b.curve) <= 1e-12 * (1.0 + a.curve.max_abs()));
            }

            #[test]
            fn qv_monotone_and_telescoping(p in arb_path(), d in 0.05f64..1.0, fracs in prop::collection::vec(0.0f64..1.0, 0..20)) {
                for s in [leb(&p, d), explicit_seq(&p, &fracs)] {
                    let q = simple_qv(&p, &s);
                    prop_assert_eq!(q.curve.start_value(), 0.0);
                    // the open last increment can shrink, so monotonicity holds along the stops
                    let along: Vec<f64> = s.times().iter().map(|&t| q.at(t).unwrap()).collect();
                    prop_assert!(along.windows(2).all(|w| w[1] >= w[0] - 1e-12));
                    // increments along the sequence, closed at the horizon, telescope
                    let mut pts: Vec<f64> = s.times().iter().map(|&t| p.evaluate(t).unwrap()).collect();
                    pts.push(p.end_value());
                    let total: f64 = pts.windows(2).map(|w| w[1] - w[0]).sum();
                    prop_assert!((total - (p.end_value() - p.start_value())).abs() < 1e-9);
                }
            }

            #[test]
            fn merge_bound_holds(p in arb_path(), d in 0.05f64..1.0, fracs in prop::collection::vec(0.0f64..1.0, 0..20)) {
                let sigma = leb(&p, d);
                let delta = crate::partitions::verify_fine_cover(&p, &sigma, 1e18).unwrap().worst_oscillation.max(1e-12);
                let tau = explicit_seq(&p, &fracs);
                let rep = merge_error_bound_check(&p, &sigma, &tau, delta).unwrap();
                prop_assert_eq!(rep.holds(), Some(true), "{:?}", rep);
            }
        }
    }
}
