//! Experiments whose every check is a theorem on each path.

use pwcalc_core::bdg::certify_path;
use pwcalc_core::integration::{bdg_witness_strategy, capital_process, BdgSide};
use pwcalc_core::partitions::lebesgue_sequence;
use pwcalc_core::truncvar::sandwich_check;
use pwcalc_core::{GridSpec, StopTime};

use super::{column_mean, ensemble, ExperimentConfig, Report, Result, Table, Verdict};

#[derive(Debug, Clone, Copy, Default)]
struct BdgCell {
    cases: u64,
    violations: u64,
    worst_margin: f64,
    witness_mismatches: u64,
}

/// Certificates for every `(path, m, p)`, and the witness capital against the
/// certificate integrals.
pub(super) fn bdg_certify(config: &ExperimentConfig) -> Result<Report> {
    let (lo, hi) = config.m_range();
    let ps = config.p_list();
    let per_member = ensemble(config, |_, path| {
        let level = 2.0 * path.max_abs() + 1.0;
        let mut cells = Vec::new();
        for m in lo..=hi {
            let seq = lebesgue_sequence(path, GridSpec::dyadic(m));
            for &p in &ps {
                let cert = certify_path(path, &seq, p, true)?;
                let w = bdg_witness_strategy(path, &seq, p, level, StopTime::Never, BdgSide::Upper)?;
                let cp = capital_process(&w, path);
                let integral = cert.upper_integral();
                let mut times = seq.times().to_vec();
                if times.len() < integral.len() {
                    times.push(path.horizon());
                }
                let mismatches = times
                    .iter()
                    .zip(integral)
                    .filter(|(&t, &v)| {
                        let c = cp.evaluate(t).expect("stopping times lie on the horizon");
                        (c - v).abs() > 1e-9 * (1.0 + v.abs())
                    })
                    .count() as u64;
                cells.push(BdgCell {
                    cases: 1,
                    violations: cert.violations() as u64,
                    worst_margin: cert.worst_relative_margin(),
                    witness_mismatches: mismatches,
                });
            }
        }
        Ok(cells)
    })?;

    let mut totals = vec![BdgCell { worst_margin: f64::INFINITY, ..Default::default() }; per_member[0].len()];
    for member in &per_member {
        for (t, c) in totals.iter_mut().zip(member) {
            t.cases += c.cases;
            t.violations += c.violations;
            t.worst_margin = t.worst_margin.min(c.worst_margin);
            t.witness_mismatches += c.witness_mismatches;
        }
    }
    let mut table = Table::new("bdg", &["m", "p", "cases", "violations", "worst_relative_margin", "witness_mismatches"]);
    let (mut p1, mut p1_cases, mut pp, mut pp_cases, mut wit, mut wit_cases) = (0, 0, 0, 0, 0, 0);
    let mut k = 0;
    for m in lo..=hi {
        for &p in &ps {
            let t = totals[k];
            k += 1;
            table.push(vec![
                f64::from(m),
                p,
                t.cases as f64,
                t.violations as f64,
                t.worst_margin,
                t.witness_mismatches as f64,
            ]);
            if p == 1.0 {
                p1 += t.violations;
                p1_cases += t.cases;
            } else {
                pp += t.violations;
                pp_cases += t.cases;
            }
            wit += t.witness_mismatches;
            wit_cases += t.cases;
        }
    }
    let mut report = Report::new(config);
    if p1_cases > 0 {
        report.verdicts.push(Verdict::pathwise("acceptance:bdg-p1", p1, p1_cases));
    }
    if pp_cases > 0 {
        report.verdicts.push(Verdict::pathwise("acceptance:bdg-p>1", pp, pp_cases));
    }
    report.verdicts.push(Verdict::pathwise("acceptance:witness-bdg", wit, wit_cases));
    report.tables.push(table);
    Ok(report)
}

/// Truncated-variation sandwich for every `(path, m)` at the horizon.
pub(super) fn sandwich(config: &ExperimentConfig) -> Result<Report> {
    let (lo, hi) = config.m_range();
    let per_member = ensemble(config, |_, path| {
        (lo..=hi)
            .map(|m| Ok(sandwich_check(path, m, None, path.horizon())?))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Table::new(
        "sandwich",
        &["m", "cases", "failures", "mean_lower_cells", "mean_ttv", "mean_upper_cells", "mean_upper_qv_weighted"],
    );
    let (mut failures, mut cases) = (0u64, 0u64);
    for (j, m) in (lo..=hi).enumerate() {
        let col: Vec<_> = per_member.iter().map(|r| &r[j]).collect();
        let fails = col.iter().filter(|r| !r.holds()).count() as u64;
        failures += fails;
        cases += col.len() as u64;
        let mean = |f: &dyn Fn(&pwcalc_core::truncvar::SandwichReport) -> f64| {
            column_mean(&col.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        table.push(vec![
            f64::from(m),
            col.len() as f64,
            fails as f64,
            mean(&|r| r.lower_cells),
            mean(&|r| r.ttv),
            mean(&|r| r.upper_cells),
            mean(&|r| r.upper_qv_weighted),
        ]);
    }
    let mut report = Report::new(config);
    report.verdicts.push(Verdict::pathwise("acceptance:sandwich", failures, cases));
    report.tables.push(table);
    Ok(report)
}
