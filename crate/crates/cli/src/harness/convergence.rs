//! Refinement experiments for the QV estimators.

use pwcalc_core::partitions::{lebesgue_sequence, verify_fine_cover};
use pwcalc_core::quadvar::{qv_estimate_dyadic, simple_qv, sup_distance};
use pwcalc_core::stats::Estimate;
use pwcalc_core::truncvar::{averaged_shifted_qv, banach_indicatrix_integral, ttv_dp_oracle, ttv_prefix, ttv_sweep};
use pwcalc_core::{GridSpec, PathKind};

use super::{column_medians, decreasing, ensemble, fmt_list, ExperimentConfig, Report, Result, RunOptions, Table, Verdict};

/// Oracle work is capped to windows of this many samples because the DP is quadratic.
const ORACLE_SAMPLES: usize = 200;

/// `vol²·T` when the generator has a known quadratic variation.
fn known_qv(config: &ExperimentConfig) -> Option<f64> {
    let g = &config.generator;
    match g.kind {
        PathKind::Wiener | PathKind::WienerLattice => Some(g.volatility * g.volatility * g.horizon),
        PathKind::Constant => Some(0.0),
        _ => None,
    }
}

struct QvMember {
    sup: Vec<f64>,
    finals: Vec<f64>,
    cover_violations: u64,
}

/// Dyadic Lebesgue QV at `m = lo..=hi+1`: consecutive sup-distances and final values.
pub(super) fn qv_converge(config: &ExperimentConfig, options: RunOptions) -> Result<Report> {
    let (lo, hi) = config.m_range();
    let per_member = ensemble(config, |_, path| {
        let curves = qv_estimate_dyadic(path, hi + 1)?;
        let sup = (lo..=hi)
            .map(|m| sup_distance(&curves[m as usize].curve, &curves[m as usize + 1].curve))
            .collect();
        let finals = (lo..=hi).map(|m| curves[m as usize].final_value()).collect();
        let mut cover_violations = 0;
        if options.oracle {
            for m in lo..=hi {
                let g = GridSpec::dyadic(m);
                let seq = lebesgue_sequence(path, g);
                if !verify_fine_cover(path, &seq, 2.0 * g.mesh())?.holds {
                    cover_violations += 1;
                }
            }
        }
        Ok(QvMember { sup, finals, cover_violations })
    })?;

    let sup_rows: Vec<Vec<f64>> = per_member.iter().map(|r| r.sup.clone()).collect();
    let medians = column_medians(&sup_rows);
    let mut table = Table::new("qv", &["m", "median_sup_distance_to_next", "mean_qv", "se_qv"]);
    let mut estimates = Vec::new();
    for (j, m) in (lo..=hi).enumerate() {
        let e = Estimate::of(&per_member.iter().map(|r| r.finals[j]).collect::<Vec<_>>());
        table.push(vec![f64::from(m), medians[j], e.mean, e.se]);
        estimates.push(e);
    }

    let mut report = Report::new(config);
    report.verdicts.push(Verdict::statistical(
        "acceptance:qv-sup-distance-decreasing",
        decreasing(&medians),
        medians.last().copied().unwrap_or(0.0),
        "median sup-distance strictly decreasing in m",
        format!("medians for m = {lo}..{hi}: {}", fmt_list(&medians)),
    ));
    if let (Some(target), Some(top)) = (known_qv(config), estimates.last()) {
        let z = top.z_score(target);
        report.verdicts.push(
            Verdict::statistical(
                "acceptance:qv-mean",
                z.abs() <= 3.0,
                top.mean,
                "within 3 SE of vol²·T",
                format!("mean [X]_T at m = {hi}: {:.6} ± {:.6}, target {target}", top.mean, top.se),
            )
            .with_z(z),
        );
    }
    if options.oracle {
        let v: u64 = per_member.iter().map(|r| r.cover_violations).sum();
        report
            .verdicts
            .push(Verdict::pathwise("invariant:fine-cover", v, (per_member.len() * (hi - lo + 1) as usize) as u64));
    }
    report.tables.push(table);
    Ok(report)
}

struct TtvMember {
    errors: Vec<f64>,
    scaled: Vec<f64>,
    oracle_mismatches: u64,
    oracle_cases: u64,
}

/// `c·TTV^c_T` against the dyadic QV estimate at `qv_level`.
pub(super) fn ttv_converge(config: &ExperimentConfig, options: RunOptions) -> Result<Report> {
    let cs = config.c_schedule();
    let level = config.qv_level();
    let per_member = ensemble(config, |_, path| {
        let horizon = path.horizon();
        let est = simple_qv(path, &lebesgue_sequence(path, GridSpec::dyadic(level))).final_value();
        let mut errors = Vec::with_capacity(cs.len());
        let mut scaled = Vec::with_capacity(cs.len());
        for &c in &cs {
            let v = c * ttv_sweep(path, c, 0.0, horizon)?;
            errors.push((v - est).abs());
            scaled.push(v);
        }
        let (mut oracle_mismatches, mut oracle_cases) = (0, 0);
        if options.oracle {
            let b = path.times()[path.len().min(ORACLE_SAMPLES) - 1];
            for &c in &cs {
                let sweep = ttv_sweep(path, c, 0.0, b)?;
                let dp = ttv_dp_oracle(path, c, 0.0, b)?;
                let ind = banach_indicatrix_integral(path, c, 0.0, b)?;
                let tol = 1e-9 * (1.0 + sweep.abs());
                oracle_cases += 1;
                if (sweep - dp).abs() > tol || (sweep - ind).abs() > tol {
                    oracle_mismatches += 1;
                }
            }
        }
        Ok(TtvMember { errors, scaled, oracle_mismatches, oracle_cases })
    })?;

    let err_rows: Vec<Vec<f64>> = per_member.iter().map(|r| r.errors.clone()).collect();
    let medians = column_medians(&err_rows);
    let mut table = Table::new("ttv", &["c", "median_abs_error", "mean_c_ttv", "se_c_ttv"]);
    for (j, &c) in cs.iter().enumerate() {
        let e = Estimate::of(&per_member.iter().map(|r| r.scaled[j]).collect::<Vec<_>>());
        table.push(vec![c, medians[j], e.mean, e.se]);
    }
    let last = medians.last().copied().unwrap_or(0.0);
    let mut report = Report::new(config);
    report.verdicts.push(Verdict::statistical(
        "acceptance:ttv-error-decreasing",
        decreasing(&medians),
        last,
        "median |c·TTV^c − [X]^est| strictly decreasing as c shrinks",
        format!("medians: {}", fmt_list(&medians)),
    ));
    report.verdicts.push(Verdict::statistical(
        "acceptance:ttv-error-small",
        last < 0.05,
        last,
        "< 0.05 at the finest c",
        format!("median error {last:.5} at c = {:.5e}, reference level m = {level}", cs.last().copied().unwrap_or(0.0)),
    ));
    if options.oracle {
        let mism = per_member.iter().map(|r| r.oracle_mismatches).sum();
        let cases = per_member.iter().map(|r| r.oracle_cases).sum();
        report.verdicts.push(Verdict::pathwise("invariant:banach-indicatrix", mism, cases));
    }
    report.tables.push(table);
    Ok(report)
}

/// Refinement level `i`: dyadic mesh `4^{-i}`, the shifted family of `k = 2^i`
/// grids of the same mesh `k⁻²`, and truncation `c = k⁻²`.
pub(super) fn compare_qv_estimators(config: &ExperimentConfig) -> Result<Report> {
    let (lo, hi) = config.m_range();
    let per_member = ensemble(config, |_, path| {
        let mut row = Vec::new();
        for i in lo..=hi {
            let k = 1u32 << i;
            let c = 1.0 / f64::from(k * k);
            let dyadic = simple_qv(path, &lebesgue_sequence(path, GridSpec::dyadic(2 * i))).curve;
            let shifted = averaged_shifted_qv(path, k, None)?.curve;
            let ttv = ttv_prefix(path, c)?.map_values(|v| c * v)?;
            row.push(sup_distance(&dyadic, &shifted));
            row.push(sup_distance(&dyadic, &ttv));
            row.push(sup_distance(&shifted, &ttv));
        }
        Ok(row)
    })?;
    let medians = column_medians(&per_member);
    let mut table = Table::new(
        "compare_qv",
        &["level", "k", "median_dyadic_vs_shifted", "median_dyadic_vs_ttv", "median_shifted_vs_ttv"],
    );
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for (n, i) in (lo..=hi).enumerate() {
        let r = &medians[3 * n..3 * n + 3];
        table.push(vec![f64::from(i), f64::from(1u32 << i), r[0], r[1], r[2]]);
        for (col, v) in cols.iter_mut().zip(r) {
            col.push(*v);
        }
    }
    let mut report = Report::new(config);
    for (name, col) in ["dyadic-vs-shifted", "dyadic-vs-ttv", "shifted-vs-ttv"].iter().zip(&cols) {
        report.verdicts.push(Verdict::statistical(
            &format!("invariant:estimators-agree:{name}"),
            decreasing(col),
            col.last().copied().unwrap_or(0.0),
            "median sup-distance strictly decreasing in the refinement level",
            format!("medians: {}", fmt_list(col)),
        ));
    }
    report.tables.push(table);
    Ok(report)
}
