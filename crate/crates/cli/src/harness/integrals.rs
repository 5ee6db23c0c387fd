//! Model-free integrals, their pseudo-distances and the covariation of integrals.

use pwcalc_core::integration::{
    capital_process, dinf_terms, dqv_terms, model_free_integral, squared_difference_integral,
    step_approximation, stieltjes_integral, DinfCase, DqvCase, EmpiricalDistanceReport, Integrand,
};
use pwcalc_core::partitions::{lebesgue_sequence, merge_all};
use pwcalc_core::paths::generate;
use pwcalc_core::quadvar::{qv_along_stops, simple_qcov};
use pwcalc_core::stats::Estimate;
use pwcalc_core::{GridSpec, SampledPath, SimpleStrategy, StepProcess, StoppingSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{column_medians, decreasing, ensemble, fmt_list, member_seed, ExperimentConfig, Report, Result, Table, Verdict};

/// Positions of the random step strategies change at `k·T/STRATEGY_STEPS`.
const STRATEGY_STEPS: usize = 8;
const COVARIATION_LEVELS: u32 = 4;
/// Salts separating the auxiliary random streams of a member from its path.
const SECOND_PATH_SALT: u64 = 0x5EC0_4D9A_7E11;
const STRATEGY_SALT: u64 = 0x0057_A7E6_C1E5;

fn random_strategy(rng: &mut ChaCha8Rng, path: &SampledPath) -> Result<SimpleStrategy> {
    let h = path.horizon();
    let times: Vec<f64> = (0..STRATEGY_STEPS).map(|k| k as f64 * h / STRATEGY_STEPS as f64).collect();
    let g = (0..STRATEGY_STEPS).map(|_| rng.random_range(-1.0..1.0)).collect();
    Ok(SimpleStrategy::new(0.0, StoppingSequence::from_times(path, times)?, g)?)
}

struct IntegralMember {
    cauchy: Vec<f64>,
    ito_error: Vec<f64>,
    step_bound_violations: u64,
    covariation_error: Vec<f64>,
}

/// `F^m·X` with `F = X` for `m` in range, the deterministic step bound, and
/// `[G·X, H·Y]` against `∫GH d[X, Y]` for random step strategies.
pub(super) fn integral_converge(config: &ExperimentConfig) -> Result<Report> {
    let (lo, hi) = config.m_range();
    let top = config.qv_level();
    let cov_levels: Vec<u32> = (top.saturating_sub(COVARIATION_LEVELS)..=top).collect();
    let rho = config.correlation();
    let per_member = ensemble(config, |i, x| {
        let horizon = x.horizon();
        let rep = model_free_integral(x, x, hi.max(1))?;
        let qv_ref = qv_along_stops(x, &lebesgue_sequence(x, GridSpec::dyadic(top)));
        let (x0, xt) = (x.start_value(), x.end_value());
        let ito = 0.5 * (xt * xt - x0 * x0) - 0.5 * qv_ref.final_value();
        let cauchy = (lo..hi).map(|m| rep.cauchy[m as usize]).collect();
        let ito_error = (lo..=hi).map(|m| (rep.curves[m as usize].end_value() - ito).abs()).collect();
        let mut step_bound_violations = 0;
        for m in lo..=hi {
            let fm = step_approximation(x, m)?;
            let lhs = squared_difference_integral(Integrand::Sampled(x), Integrand::Step(&fm), &qv_ref.curve, horizon);
            let rhs = (-2.0 * f64::from(m)).exp2() * qv_ref.final_value();
            if lhs > rhs + 1e-9 * (1.0 + rhs) {
                step_bound_violations += 1;
            }
        }

        let w = generate(&config.generator.with_seed(member_seed(config.seed ^ SECOND_PATH_SALT, i as u64)))?;
        let y = x.linear_combination(rho, &w, (1.0 - rho * rho).sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(member_seed(config.seed ^ STRATEGY_SALT, i as u64));
        let (g, h) = (random_strategy(&mut rng, x)?, random_strategy(&mut rng, &y)?);
        let (gx, hy) = (capital_process(&g, x), capital_process(&h, &y));
        let gh = g.step_process().product(&h.step_process());
        let grid = GridSpec::dyadic(top);
        let plus_path = x.linear_combination(1.0, &y, 1.0);
        let minus_path = x.linear_combination(1.0, &y, -1.0);
        let plus = qv_along_stops(&plus_path, &lebesgue_sequence(&plus_path, grid));
        let minus = qv_along_stops(&minus_path, &lebesgue_sequence(&minus_path, grid));
        let cov = plus.curve.linear_combination(0.25, &minus.curve, -0.25);
        let reference = stieltjes_integral(Integrand::Step(&gh), &cov, horizon)?;
        let covariation_error = cov_levels
            .iter()
            .map(|&j| {
                let grid = GridSpec::dyadic(j);
                let seqs = [
                    lebesgue_sequence(x, grid),
                    lebesgue_sequence(&y, grid),
                    lebesgue_sequence(&gx, grid),
                    lebesgue_sequence(&hy, grid),
                    g.sequence().clone(),
                    h.sequence().clone(),
                ];
                let refs: Vec<&StoppingSequence> = seqs.iter().collect();
                let upsilon = merge_all(&refs, x)?;
                Ok((simple_qcov(&gx, &hy, &upsilon).final_value() - reference).abs())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntegralMember { cauchy, ito_error, step_bound_violations, covariation_error })
    })?;

    let cauchy_med = column_medians(&per_member.iter().map(|r| r.cauchy.clone()).collect::<Vec<_>>());
    let ito_med = column_medians(&per_member.iter().map(|r| r.ito_error.clone()).collect::<Vec<_>>());
    let cov_med = column_medians(&per_member.iter().map(|r| r.covariation_error.clone()).collect::<Vec<_>>());
    let mut integral = Table::new("integral", &["m", "median_sup_distance_to_next", "median_ito_error"]);
    for (j, m) in (lo..=hi).enumerate() {
        integral.push(vec![f64::from(m), cauchy_med.get(j).copied().unwrap_or(f64::NAN), ito_med[j]]);
    }
    let mut covariation = Table::new("covariation", &["level", "median_abs_error"]);
    for (j, &l) in cov_levels.iter().enumerate() {
        covariation.push(vec![f64::from(l), cov_med[j]]);
    }

    let mut report = Report::new(config);
    let violations = per_member.iter().map(|r| r.step_bound_violations).sum();
    let cases = (per_member.len() * (hi - lo + 1) as usize) as u64;
    report.verdicts.push(Verdict::pathwise("invariant:step-bound", violations, cases));
    report.verdicts.push(Verdict::statistical(
        "invariant:integral-cauchy-decreasing",
        decreasing(&cauchy_med),
        cauchy_med.last().copied().unwrap_or(0.0),
        "median sup-distance between consecutive F^m·X strictly decreasing",
        format!("medians: {}", fmt_list(&cauchy_med)),
    ));
    let finest = cov_med.last().copied().unwrap_or(0.0);
    report.verdicts.push(Verdict::statistical(
        "acceptance:covariation-decreasing",
        decreasing(&cov_med),
        finest,
        "median error strictly decreasing under refinement",
        format!("medians for levels {:?}: {}", cov_levels, fmt_list(&cov_med)),
    ));
    report.verdicts.push(Verdict::statistical(
        "acceptance:covariation-small",
        finest < 0.02,
        finest,
        "< 0.02 at the finest mesh",
        format!("median |[G·X, H·Y] − ∫GH d[X,Y]| = {finest:.5} at level {top}"),
    ));
    report.tables.push(integral);
    report.tables.push(covariation);
    Ok(report)
}

struct RateMember {
    /// `d_QV(F^m, F)` terms per `m`.
    to_f: Vec<Vec<f64>>,
    /// `(d_QV(F^m, F^{m'}), d_∞(F^m·X, F^{m'}·X))` terms per pair.
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

fn pairs(lo: u32, hi: u32) -> Vec<(u32, u32)> {
    (lo..=hi).flat_map(|a| (a + 1..=hi).map(move |b| (a, b))).collect()
}

/// Empirical `d_QV(F^m, F)` against `12.5·2^{-m}`, and `d_∞(F^m·X, F^{m'}·X)`
/// against `6·d_QV(F^m, F^{m'})`, with `F = X`.
pub(super) fn distance_rates(config: &ExperimentConfig) -> Result<Report> {
    let (lo, hi) = config.m_range();
    let n_max = config.n_max();
    let top = config.qv_level();
    let pair_list = pairs(lo, hi);
    let per_member = ensemble(config, |_, x| {
        let qv = qv_along_stops(x, &lebesgue_sequence(x, GridSpec::dyadic(top)));
        let steps: Vec<StepProcess> = (lo..=hi).map(|m| step_approximation(x, m)).collect::<pwcalc_core::Result<_>>()?;
        let integrals: Vec<SampledPath> = steps
            .iter()
            .map(|s| Ok(capital_process(&s.to_strategy(0.0, x)?, x)))
            .collect::<Result<_>>()?;
        let to_f = steps
            .iter()
            .map(|s| {
                let case = DqvCase { x, qv: &qv.curve, g: Integrand::Step(s), h: Integrand::Sampled(x) };
                Ok(dqv_terms(&case, n_max)?)
            })
            .collect::<Result<_>>()?;
        let pairs = pair_list
            .iter()
            .map(|&(a, b)| {
                let (i, j) = ((a - lo) as usize, (b - lo) as usize);
                let q = DqvCase { x, qv: &qv.curve, g: Integrand::Step(&steps[i]), h: Integrand::Step(&steps[j]) };
                let d = DinfCase { x, y: &integrals[i], z: &integrals[j] };
                Ok((dqv_terms(&q, n_max)?, dinf_terms(&d, n_max)?))
            })
            .collect::<Result<_>>()?;
        Ok(RateMember { to_f, pairs })
    })?;

    let mut report = Report::new(config);
    let mut rates = Table::new("step_rate", &["m", "d_qv", "se", "bound"]);
    let (mut rate_ok, mut worst_rate_z) = (true, f64::NEG_INFINITY);
    for (j, m) in (lo..=hi).enumerate() {
        let terms: Vec<Vec<f64>> = per_member.iter().map(|r| r.to_f[j].clone()).collect();
        let d = EmpiricalDistanceReport::from_terms(n_max, &terms)?;
        let bound = 12.5 * (-f64::from(m)).exp2();
        rates.push(vec![f64::from(m), d.value, d.standard_error, bound]);
        rate_ok &= d.value <= bound + 3.0 * d.standard_error;
        worst_rate_z = worst_rate_z.max(Estimate { mean: d.value, se: d.standard_error, n: d.paths }.z_score(bound));
    }
    report.verdicts.push(
        Verdict::statistical(
            "acceptance:step-rate",
            rate_ok,
            worst_rate_z,
            "d_QV(F^m, F) <= 12.5·2^{-m} + 3 SE for every m",
            format!("empirical surrogate, m = {lo}..{hi}, N_max = {n_max}, reference QV level {top}"),
        )
        .with_z(worst_rate_z),
    );

    let mut cont = Table::new("continuity", &["m", "m_prime", "d_inf", "se_d_inf", "d_qv", "se_d_qv", "z"]);
    let (mut cont_ok, mut worst_z) = (true, f64::NEG_INFINITY);
    for (k, &(a, b)) in pair_list.iter().enumerate() {
        let q_terms: Vec<Vec<f64>> = per_member.iter().map(|r| r.pairs[k].0.clone()).collect();
        let y_terms: Vec<Vec<f64>> = per_member.iter().map(|r| r.pairs[k].1.clone()).collect();
        let q = EmpiricalDistanceReport::from_terms(n_max, &q_terms)?;
        let y = EmpiricalDistanceReport::from_terms(n_max, &y_terms)?;
        // paired per path: d_∞ − 6·d_QV
        let diff: Vec<f64> = y.per_path.iter().zip(&q.per_path).map(|(y, q)| y - 6.0 * q).collect();
        let z = Estimate::of(&diff).z_score(0.0);
        cont.push(vec![f64::from(a), f64::from(b), y.value, y.standard_error, q.value, q.standard_error, z]);
        cont_ok &= z <= 3.0;
        worst_z = worst_z.max(z);
    }
    report.verdicts.push(
        Verdict::statistical(
            "acceptance:integration-continuity",
            cont_ok,
            worst_z,
            "d_∞(F^m·X, F^m'·X) <= 6·d_QV(F^m, F^m') + 3 SE (paired) for every pair",
            format!("{} pairs, worst paired z = {worst_z:.3}", pair_list.len()),
        )
        .with_z(worst_z),
    );
    report.tables.push(rates);
    report.tables.push(cont);
    Ok(report)
}
