use pwcalc_core::integration::{
    dinf_terms, dqv_terms, empirical_dinf, empirical_dqv, step_approximation, DinfCase, DqvCase,
    EmpiricalDistanceReport, Integrand,
};
use pwcalc_core::partitions::lebesgue_sequence;
use pwcalc_core::paths::generate;
use pwcalc_core::quadvar::qv_along_stops;
use pwcalc_core::{GridSpec, PathGeneratorConfig, PathKind, SampledPath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N_MAX: u32 = 4;

fn path(rng: &mut ChaCha8Rng, n: std::ops::Range<usize>, vol: f64) -> SampledPath {
    let n = rng.random_range(n);
    let mut cfg = PathGeneratorConfig::new(PathKind::CustomSeeded, 1.0, 1.0 / n as f64, rng.random());
    cfg.volatility = vol;
    generate(&cfg).unwrap()
}

fn weighted(terms: &[f64]) -> f64 {
    EmpiricalDistanceReport::from_terms(N_MAX, &[terms.to_vec()]).unwrap().value
}

#[test]
fn d_qv_triangle_inequality_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let vol = rng.random_range(0.5..3.0);
        let x = path(&mut rng, 16..256, vol);
        let qv = qv_along_stops(&x, &lebesgue_sequence(&x, GridSpec::dyadic(6))).curve;
        let f = step_approximation(&x, rng.random_range(0..6)).unwrap();
        let g = path(&mut rng, 4..64, 1.0);
        let h = path(&mut rng, 4..64, 1.0);
        let abc = [Integrand::Step(&f), Integrand::Sampled(&g), Integrand::Sampled(&h)];
        let d = |i: usize, j: usize| dqv_terms(&DqvCase { x: &x, qv: &qv, g: abc[i], h: abc[j] }, N_MAX).unwrap();
        let (ab, bc, ac) = (d(0, 1), d(1, 2), d(0, 2));
        for k in 0..ab.len() {
            assert!(ab[k] >= 0.0 && bc[k] >= 0.0 && ac[k] >= 0.0);
            assert!(ac[k] <= ab[k] + bc[k] + 1e-12 * (1.0 + ac[k]), "level {k}: {} > {} + {}", ac[k], ab[k], bc[k]);
        }
        assert!(weighted(&ac) <= weighted(&ab) + weighted(&bc) + 1e-12);
        assert_eq!(d(1, 1).iter().sum::<f64>(), 0.0);
    }
}

#[test]
fn d_qv_terms_are_nondecreasing_in_the_localization_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..50 {
        let x = path(&mut rng, 200..201, 2.0);
        let qv = qv_along_stops(&x, &lebesgue_sequence(&x, GridSpec::dyadic(5))).curve;
        let f = step_approximation(&x, 2).unwrap();
        let terms = dqv_terms(&DqvCase { x: &x, qv: &qv, g: Integrand::Step(&f), h: Integrand::Sampled(&x) }, N_MAX)
            .unwrap();
        assert!(terms.windows(2).all(|w| w[0] <= w[1] + 1e-15), "{terms:?}");
    }
}

#[test]
fn d_inf_scales_and_satisfies_the_triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let x = path(&mut rng, 16..256, 2.0);
        let y = path(&mut rng, 16..256, 1.0);
        let z = path(&mut rng, 16..256, 1.0);
        let base = dinf_terms(&DinfCase { x: &x, y: &y, z: &z }, N_MAX).unwrap();
        let doubled = y.linear_combination(2.0, &z, -1.0);
        let twice = dinf_terms(&DinfCase { x: &x, y: &doubled, z: &z }, N_MAX).unwrap();
        for (a, b) in base.iter().zip(&twice) {
            assert!((b - 2.0 * a).abs() <= 1e-12 * (1.0 + b));
        }
        let zero = dinf_terms(&DinfCase { x: &x, y: &y, z: &y }, N_MAX).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let yx = dinf_terms(&DinfCase { x: &x, y: &y, z: &x }, N_MAX).unwrap();
        let xz = dinf_terms(&DinfCase { x: &x, y: &x, z: &z }, N_MAX).unwrap();
        for k in 0..base.len() {
            assert!(base[k] <= yx[k] + xz[k] + 1e-12);
        }
    }
}

#[test]
fn ensemble_reports_are_nonnegative_and_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let xs: Vec<SampledPath> = (0..30).map(|_| path(&mut rng, 128..129, 1.0)).collect();
    let ys: Vec<SampledPath> = (0..30).map(|_| path(&mut rng, 64..65, 1.0)).collect();
    let qvs: Vec<SampledPath> =
        xs.iter().map(|x| qv_along_stops(x, &lebesgue_sequence(x, GridSpec::dyadic(5))).curve).collect();
    let fs: Vec<_> = xs.iter().map(|x| step_approximation(x, 3).unwrap()).collect();
    let dq_cases: Vec<DqvCase<'_>> = (0..30)
        .map(|i| DqvCase { x: &xs[i], qv: &qvs[i], g: Integrand::Step(&fs[i]), h: Integrand::Sampled(&xs[i]) })
        .collect();
    let di_cases: Vec<DinfCase<'_>> = (0..30).map(|i| DinfCase { x: &xs[i], y: &ys[i], z: &xs[i] }).collect();
    for report in [empirical_dqv(&dq_cases, N_MAX).unwrap(), empirical_dinf(&di_cases, N_MAX).unwrap()] {
        assert_eq!(report.paths, 30);
        assert_eq!(report.per_level_means.len(), N_MAX as usize + 1);
        assert!(report.per_path.iter().chain(&report.per_level_means).all(|&v| v >= 0.0));
        assert!(report.value >= 0.0 && report.standard_error >= 0.0);
        let mean = report.per_path.iter().sum::<f64>() / 30.0;
        assert!((mean - report.value).abs() <= 1e-12 * (1.0 + mean));
    }
    assert!(empirical_dqv(&dq_cases, 0).is_err());
    assert!(empirical_dinf(&[], N_MAX).is_err());
}
