//! Ensemble means standing in for upper expectations.

use pwcalc_core::bdg::{bdg_constant, certificate, sequence_along};
use pwcalc_core::integration::{capital_process, witness_strategy_qv};
use pwcalc_core::partitions::lebesgue_sequence;
use pwcalc_core::paths::hitting_time_abs;
use pwcalc_core::quadvar::simple_qv;
use pwcalc_core::stats::Estimate;
use pwcalc_core::GridSpec;

use super::{ensemble, ExperimentConfig, Report, Result, Table, Verdict};

/// Witness identities are checked on this many leading members.
pub const WITNESS_MEMBERS: usize = 1000;

/// Stamps at which the witness capital may differ from the identity.
fn witness_mismatches(path: &pwcalc_core::SampledPath, m: u32, level: f64) -> Result<u64> {
    let seq = lebesgue_sequence(path, GridSpec::dyadic(m));
    let w = witness_strategy_qv(path, &seq, level)?;
    let cp = capital_process(&w, path);
    let stopped = path.stopped(hitting_time_abs(path, level, 0.0)?)?;
    let qv = simple_qv(&stopped, w.sequence());
    let x0 = path.start_value();
    let mut bad = 0;
    let (mut cs, mut cq) = (stopped.cursor(), qv.curve.cursor());
    for (&t, &c) in cp.times().iter().zip(cp.values()) {
        let dx = cs.value_at(t) - x0;
        if (c - (dx * dx - cq.value_at(t))).abs() > 1e-9 {
            bad += 1;
        }
    }
    Ok(bad)
}

struct IsoMember {
    sq: f64,
    qv: f64,
    witness_cases: u64,
    witness_bad: u64,
}

/// `E(X_T − X_0)²` against `E[X]^{τ^m}_T`, plus the witness identity.
pub(super) fn isometry(config: &ExperimentConfig) -> Result<Report> {
    let m = config.m_range().1;
    let per_member = ensemble(config, |i, path| {
        let dx = path.end_value() - path.start_value();
        let qv = simple_qv(path, &lebesgue_sequence(path, GridSpec::dyadic(m))).final_value();
        let (mut witness_cases, mut witness_bad) = (0, 0);
        if i < WITNESS_MEMBERS {
            // inactive localization, then one that stops the path
            for level in [2.0 * path.max_abs() + 1.0, 0.5 * path.max_abs()] {
                if level > path.start_value().abs() {
                    witness_cases += 1;
                    witness_bad += witness_mismatches(path, m, level)?;
                }
            }
        }
        Ok(IsoMember { sq: dx * dx, qv, witness_cases, witness_bad })
    })?;
    let sq = Estimate::of(&per_member.iter().map(|r| r.sq).collect::<Vec<_>>());
    let qv = Estimate::of(&per_member.iter().map(|r| r.qv).collect::<Vec<_>>());
    let diff = Estimate::of(&per_member.iter().map(|r| r.sq - r.qv).collect::<Vec<_>>());
    let z = diff.z_score(0.0);
    let mut table = Table::new(
        "isometry",
        &["m", "paths", "mean_sq_increment", "se_sq_increment", "mean_qv", "se_qv", "mean_difference", "se_difference"],
    );
    table.push(vec![f64::from(m), sq.n as f64, sq.mean, sq.se, qv.mean, qv.se, diff.mean, diff.se]);
    let mut report = Report::new(config);
    report.verdicts.push(
        Verdict::statistical(
            "acceptance:isometry",
            z.abs() <= 3.0,
            diff.mean,
            "|paired z| <= 3",
            format!(
                "E(X_T−X_0)² = {:.6} ± {:.6}, E[X]^τ_T = {:.6} ± {:.6}, paired z = {z:.3}",
                sq.mean, sq.se, qv.mean, qv.se
            ),
        )
        .with_z(z),
    );
    let bad = per_member.iter().map(|r| r.witness_bad).sum();
    let cases = per_member.iter().map(|r| r.witness_cases).sum();
    report.verdicts.push(Verdict::pathwise("acceptance:witness-qv", bad, cases));
    report.tables.push(table);
    Ok(report)
}

struct BdgMember {
    star_p: Vec<f64>,
    bracket_p: Vec<f64>,
    violations: u64,
}

/// Ensemble BDG: `E(x*)^p` against `C_p E[x]^{p/2}` both ways, along the
/// Lebesgue sequence at level `m`, with per-path certificates.
pub(super) fn bdg(config: &ExperimentConfig) -> Result<Report> {
    let m = config.m_range().1;
    let ps = config.p_list();
    let per_member = ensemble(config, |_, path| {
        let x = sequence_along(path, &lebesgue_sequence(path, GridSpec::dyadic(m)), true)?;
        let (star, bracket) = (*x.star().last().expect("non-empty"), *x.bracket().last().expect("non-empty"));
        let mut violations = 0;
        for &p in &ps {
            violations += u64::from(!certificate(&x, p)?.holds());
        }
        Ok(BdgMember {
            star_p: ps.iter().map(|&p| star.powf(p)).collect(),
            bracket_p: ps.iter().map(|&p| bracket.powf(p / 2.0)).collect(),
            violations,
        })
    })?;
    let mut table = Table::new("bdg_mc", &["p", "c_p", "mean_star_p", "se_star_p", "mean_bracket_p2", "se_bracket_p2"]);
    let mut report = Report::new(config);
    for (j, &p) in ps.iter().enumerate() {
        let c = bdg_constant(p);
        let a: Vec<f64> = per_member.iter().map(|r| r.star_p[j]).collect();
        let b: Vec<f64> = per_member.iter().map(|r| r.bracket_p[j]).collect();
        let (ea, eb) = (Estimate::of(&a), Estimate::of(&b));
        table.push(vec![p, c, ea.mean, ea.se, eb.mean, eb.se]);
        for (name, lhs, rhs) in [("upper", &a, &b), ("lower", &b, &a)] {
            // paired: E[C_p·rhs − lhs] >= −3 SE
            let d = Estimate::of(&lhs.iter().zip(rhs.iter()).map(|(l, r)| c * r - l).collect::<Vec<_>>());
            let z = d.z_score(0.0);
            report.verdicts.push(
                Verdict::statistical(
                    &format!("invariant:bdg-mc-{name}:p={p}"),
                    z >= -3.0,
                    d.mean,
                    "mean margin >= −3 SE",
                    format!("mean margin {:.6} ± {:.6}", d.mean, d.se),
                )
                .with_z(z),
            );
        }
    }
    let v = per_member.iter().map(|r| r.violations).sum();
    report
        .verdicts
        .push(Verdict::pathwise("invariant:bdg-certificates", v, (per_member.len() * ps.len()) as u64));
    report.tables.push(table);
    Ok(report)
}
