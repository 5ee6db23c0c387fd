use pwcalc_core::bdg::{bdg_constant, certify_path};
use pwcalc_core::integration::{bdg_witness_strategy, capital_process, BdgSide};
use pwcalc_core::partitions::lebesgue_sequence;
use pwcalc_core::paths::{generate, IncrementLaw};
use pwcalc_core::quadvar::simple_qv;
use pwcalc_core::{GridSpec, PathGeneratorConfig, PathKind, StopTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn bdg_witness_capital_matches_certificates() {
    let laws = [IncrementLaw::Gaussian, IncrementLaw::Rademacher, IncrementLaw::Uniform, IncrementLaw::Laplace];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..1000 {
        let mut cfg = PathGeneratorConfig::new(PathKind::CustomSeeded, 1.0, 1.0 / 128.0, rng.random());
        cfg.increment_law = laws[case % laws.len()];
        cfg.initial = rng.random_range(-1.0..1.0);
        let x = generate(&cfg).unwrap();
        let grid = GridSpec::new(rng.random_range(0.02..0.5), rng.random_range(0.0..0.02)).unwrap();
        let seq = lebesgue_sequence(&x, grid);
        let p = [1.0, 1.5, 2.0, 3.0][case % 4];
        let cert = certify_path(&x, &seq, p, true).unwrap();
        assert!(cert.holds(), "case {case}: worst margin {}", cert.worst_relative_margin());
        let level = 2.0 * x.max_abs() + 1.0;
        let lower = if p == 1.0 { &cert.hx } else { &cert.fx };
        for (side, integral) in [(BdgSide::Upper, cert.upper_integral()), (BdgSide::Lower, lower.as_slice())] {
            let cp = capital_process(&bdg_witness_strategy(&x, &seq, p, level, StopTime::Never, side).unwrap(), &x);
            let mut times = seq.times().to_vec();
            if times.len() < integral.len() {
                times.push(x.horizon());
            }
            for (&t, &v) in times.iter().zip(integral) {
                let c = cp.evaluate(t).unwrap();
                assert!((c - v).abs() <= 1e-9 * (1.0 + v.abs()), "case {case}, {side:?}, t = {t}: {c} vs {v}");
            }
        }
    }
}

#[test]
fn certificate_constant_grows_with_p() {
    let cs: Vec<f64> = [1.5, 2.0, 3.0, 4.0].iter().map(|&p| bdg_constant(p)).collect();
    assert!(cs.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(bdg_constant(2.0), 36.0);
}

#[test]
fn lattice_paths_have_exact_lebesgue_qv_at_their_spacing() {
    let step = 1.0 / 4096.0;
    for seed in 0..20 {
        let x = generate(&PathGeneratorConfig::new(PathKind::WienerLattice, 1.0, step, seed)).unwrap();
        let delta = step.sqrt();
        let seq = lebesgue_sequence(&x, GridSpec::dyadic(6));
        // every lattice visit is a stop, so [X]^τ sums the squared lattice steps
        assert_eq!(seq.len(), x.len() - 1);
        let closed = (seq.len() - 1) as f64 * delta * delta;
        let last = x.end_value() - seq.values()[seq.len() - 1];
        let qv = simple_qv(&x, &seq).final_value();
        assert!((qv - closed - last * last).abs() < 1e-12, "seed {seed}: {qv} vs {closed}");
    }
}
