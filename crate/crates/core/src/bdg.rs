//! Pathwise Burkholder-Davis-Gundy inequalities.
//!
//! For a real sequence `x_0, …, x_K` with running maximum `x*_k = max_{l≤k} |x_l|`
//! and bracket `[x]_k = x_0² + Σ_{l≤k} (x_l − x_{l−1})²`, explicit predictable
//! integrands `h` (p = 1) and `f`, `g` (p > 1) make the BDG inequalities hold
//! for every `k` without any probability:
//!
//! ```text
//! x*_k ≤ 6 √[x]_k + 2 (h·x)_k              √[x]_k ≤ 3 x*_k − (h·x)_k
//! (x*_k)^p ≤ C_p [x]_k^{p/2} + 2 (g·x)_k    [x]_k^{p/2} ≤ C_p (x*_k)^p − (f·x)_k
//! ```
//!
//! with `(h·x)_k = Σ_{l=1}^{k} h_{l−1} (x_l − x_{l−1})` and `C_p = 6^p (p − 1)^{p−1}`.
//! Every `0/0` is resolved to `0`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::partitions::StoppingSequence;
use crate::paths::{SampledPath, Value};
use crate::Check;

/// A finite real sequence with its running maximum and bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSequence {
    x: Vec<Value>,
    star: Vec<Value>,
    bracket: Vec<Value>,
}

impl DiscreteSequence {
    pub fn new(x: Vec<Value>) -> Result<Self> {
        ensure!(!x.is_empty(), InvalidArgument, "a sequence needs at least one term");
        ensure!(x.iter().all(|v| v.is_finite()), InvalidArgument, "non-finite term");
        let mut star = Vec::with_capacity(x.len());
        let mut bracket = Vec::with_capacity(x.len());
        let (mut s, mut b) = (x[0].abs(), x[0] * x[0]);
        star.push(s);
        bracket.push(b);
        for w in x.windows(2) {
            s = s.max(w[1].abs());
            b += (w[1] - w[0]) * (w[1] - w[0]);
            star.push(s);
            bracket.push(b);
        }
        Ok(DiscreteSequence { x, star, bracket })
    }

    pub fn x(&self) -> &[Value] {
        &self.x
    }

    /// `x*_k`.
    pub fn star(&self) -> &[Value] {
        &self.star
    }

    /// `[x]_k`.
    pub fn bracket(&self) -> &[Value] {
        &self.bracket
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `(a·x)_k = Σ_{l=1}^{k} a_{l−1} (x_l − x_{l−1})` for every `k`.
    pub fn integral(&self, a: &[Value]) -> Vec<Value> {
        let mut out = Vec::with_capacity(self.x.len());
        let mut acc = 0.0;
        out.push(0.0);
        for l in 1..self.x.len() {
            acc += a[l - 1] * (self.x[l] - self.x[l - 1]);
            out.push(acc);
        }
        out
    }
}

/// `num / den` with `0/0 = 0`.
fn ratio(num: Value, den: Value) -> Value {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `C_p`: 6 for `p = 1`, `6^p (p − 1)^{p−1}` otherwise.
pub fn bdg_constant(p: f64) -> f64 {
    if p == 1.0 {
        6.0
    } else {
        6f64.powf(p) * (p - 1.0).powf(p - 1.0)
    }
}

/// The integrands of the pathwise BDG inequalities together with both
/// inequalities evaluated at every index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdgCertificate {
    pub p: f64,
    pub c_p: f64,
    pub x: Vec<Value>,
    /// p = 1 integrand (empty for p > 1).
    pub h: Vec<Value>,
    /// p > 1 integrand of the lower inequality (empty for p = 1).
    pub f: Vec<Value>,
    /// p > 1 integrand of the upper inequality (empty for p = 1).
    pub g: Vec<Value>,
    pub hx: Vec<Value>,
    pub fx: Vec<Value>,
    pub gx: Vec<Value>,
    /// Upper inequality `x*` side at each k.
    pub lhs1: Vec<Value>,
    pub rhs1: Vec<Value>,
    /// Lower inequality `[x]` side at each k.
    pub lhs2: Vec<Value>,
    pub rhs2: Vec<Value>,
    pub margin1: Vec<Value>,
    pub margin2: Vec<Value>,
}

impl BdgCertificate {
    fn assemble(
        p: f64,
        seq: &DiscreteSequence,
        (h, f, g): (Vec<Value>, Vec<Value>, Vec<Value>),
        sides: [Vec<Value>; 4],
    ) -> Self {
        let hx = if h.is_empty() { Vec::new() } else { seq.integral(&h) };
        let fx = if f.is_empty() { Vec::new() } else { seq.integral(&f) };
        let gx = if g.is_empty() { Vec::new() } else { seq.integral(&g) };
        let [lhs1, rhs1, lhs2, rhs2] = sides;
        let mut cert = BdgCertificate {
            p,
            c_p: bdg_constant(p),
            x: seq.x().to_vec(),
            h,
            f,
            g,
            hx,
            fx,
            gx,
            lhs1,
            rhs1,
            lhs2,
            rhs2,
            margin1: Vec::new(),
            margin2: Vec::new(),
        };
        cert.fill_sides(seq);
        cert
    }

    fn fill_sides(&mut self, seq: &DiscreteSequence) {
        let n = seq.len();
        let (c, p) = (self.c_p, self.p);
        for k in 0..n {
            let (s, b) = (seq.star()[k], seq.bracket()[k]);
            if p == 1.0 {
                self.lhs1.push(s);
                self.rhs1.push(6.0 * b.sqrt() + 2.0 * self.hx[k]);
                self.lhs2.push(b.sqrt());
                self.rhs2.push(3.0 * s - self.hx[k]);
            } else {
                let sp = s.powf(p);
                let bp = b.powf(p / 2.0);
                self.lhs1.push(sp);
                self.rhs1.push(c * bp + 2.0 * self.gx[k]);
                self.lhs2.push(bp);
                self.rhs2.push(c * sp - self.fx[k]);
            }
        }
        self.margin1 = self.rhs1.iter().zip(&self.lhs1).map(|(r, l)| r - l).collect();
        self.margin2 = self.rhs2.iter().zip(&self.lhs2).map(|(r, l)| r - l).collect();
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The integrand of the upper (maximal-function) inequality: `h` or `g`.
    pub fn upper_integrand(&self) -> &[Value] {
        if self.p == 1.0 {
            &self.h
        } else {
            &self.g
        }
    }

    /// Its discrete integral: `h·x` or `g·x`.
    pub fn upper_integral(&self) -> &[Value] {
        if self.p == 1.0 {
            &self.hx
        } else {
            &self.gx
        }
    }

    /// Both inequalities at index `k`.
    pub fn checks_at(&self, k: usize) -> [Check; 2] {
        [Check::new(self.lhs1[k], self.rhs1[k]), Check::new(self.lhs2[k], self.rhs2[k])]
    }

    /// Number of indices at which either inequality fails.
    pub fn violations(&self) -> usize {
        (0..self.len()).filter(|&k| self.checks_at(k).iter().any(|c| !c.holds)).count()
    }

    pub fn holds(&self) -> bool {
        self.violations() == 0
    }

    /// Smallest relative margin `(rhs − lhs) / (1 + |rhs|)` over both inequalities.
    pub fn worst_relative_margin(&self) -> Value {
        let rel = |m: &[Value], r: &[Value]| {
            m.iter().zip(r).map(|(m, r)| m / (1.0 + r.abs())).fold(f64::INFINITY, f64::min)
        };
        rel(&self.margin1, &self.rhs1).min(rel(&self.margin2, &self.rhs2))
    }
}

/// `h_l = x_l / √([x]_l + (x*_l)²)`, which lies in `[−1, 1]`.
///
/// The running maximum enters squared, as in the original pathwise BDG
/// construction; this is also the `l = 0` term `e^{(0)}_l` of the p > 1 family.
pub fn h_sequence(seq: &DiscreteSequence) -> Vec<Value> {
    (0..seq.len())
        .map(|l| {
            let s = seq.star()[l];
            ratio(seq.x()[l], (seq.bracket()[l] + s * s).sqrt())
        })
        .collect()
}

/// The p = 1 certificate.
pub fn certificate_p1(seq: &DiscreteSequence) -> BdgCertificate {
    let h = h_sequence(seq);
    BdgCertificate::assemble(1.0, seq, (h, Vec::new(), Vec::new()), Default::default())
}

/// `f_k` and `g_k` for every k, by the double sum over `l ≤ k`.
///
/// `e_k^{(l)} = (x_k − x_{l−1}) / √([x]_k − [x]_{l−1} + max_{l≤m≤k} (x_m − x_{l−1})²)`
/// with `x_{−1} = [x]_{−1} = x*_{−1} = 0`. The inner loop runs `l` downwards so
/// the maximum is maintained from the running extremes of `x_m`, `m ∈ [l, k]`.
pub fn fg_sequences(seq: &DiscreteSequence, p: f64) -> (Vec<Value>, Vec<Value>) {
    let n = seq.len();
    let (x, b, s) = (seq.x(), seq.bracket(), seq.star());
    let q = p - 1.0;
    // weights w_l = √([x]_l^{p−1}) − √([x]_{l−1}^{p−1}) and u_l = (x*_l)^{p−1} − (x*_{l−1})^{p−1}
    let pow_b: Vec<Value> = b.iter().map(|v| v.powf(q / 2.0)).collect();
    let pow_s: Vec<Value> = s.iter().map(|v| v.powf(q)).collect();
    let w: Vec<Value> = (0..n).map(|l| pow_b[l] - if l > 0 { pow_b[l - 1] } else { 0.0 }).collect();
    let u: Vec<Value> = (0..n).map(|l| pow_s[l] - if l > 0 { pow_s[l - 1] } else { 0.0 }).collect();

    let mut f = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for k in 0..n {
        let (mut fk, mut gk) = (0.0, 0.0);
        let (mut lo, mut hi) = (x[k], x[k]);
        for l in (0..=k).rev() {
            lo = lo.min(x[l]);
            hi = hi.max(x[l]);
            let (prev_x, prev_b) = if l > 0 { (x[l - 1], b[l - 1]) } else { (0.0, 0.0) };
            let m = (hi - prev_x).abs().max((lo - prev_x).abs());
            let den = (b[k] - prev_b + m * m).sqrt();
            let e = ratio(x[k] - prev_x, den);
            fk += w[l] * e;
            gk += u[l] * e;
        }
        f.push(p * p * fk);
        g.push(p * p * gk);
    }
    (f, g)
}

/// `e_k^{(l)}` for a single pair `l ≤ k`, straight from the definition.
pub fn e_term(seq: &DiscreteSequence, k: usize, l: usize) -> Value {
    let x = seq.x();
    let (prev_x, prev_b) = if l > 0 { (x[l - 1], seq.bracket()[l - 1]) } else { (0.0, 0.0) };
    let m = x[l..=k].iter().map(|v| (v - prev_x) * (v - prev_x)).fold(0.0, f64::max);
    ratio(x[k] - prev_x, (seq.bracket()[k] - prev_b + m).sqrt())
}

/// The p > 1 certificate.
pub fn certificate_p(seq: &DiscreteSequence, p: f64) -> Result<BdgCertificate> {
    ensure!(p > 1.0 && p.is_finite(), InvalidArgument, "certificate_p needs p > 1, got {p}");
    let (f, g) = fg_sequences(seq, p);
    Ok(BdgCertificate::assemble(p, seq, (Vec::new(), f, g), Default::default()))
}

/// Dispatches to [`certificate_p1`] or [`certificate_p`].
pub fn certificate(seq: &DiscreteSequence, p: f64) -> Result<BdgCertificate> {
    ensure!(p >= 1.0, InvalidArgument, "p must be at least 1, got {p}");
    if p == 1.0 {
        Ok(certificate_p1(seq))
    } else {
        certificate_p(seq, p)
    }
}

/// The sequence `x̃_k = X(τ_k ∧ T) − X(0)` (or without the shift), closed by
/// the horizon value when the last stopping time falls before the horizon `T`.
pub fn sequence_along(
    path: &SampledPath,
    seq: &StoppingSequence,
    shift_to_zero: bool,
) -> Result<DiscreteSequence> {
    let x0 = if shift_to_zero { path.start_value() } else { 0.0 };
    let mut cursor = path.cursor();
    let mut xs: Vec<Value> = seq.times().iter().map(|&t| cursor.value_at(t) - x0).collect();
    if seq.last_time() < path.horizon() {
        xs.push(path.end_value() - x0);
    }
    DiscreteSequence::new(xs)
}

/// Certificate for the values of a path along a stopping sequence. The
/// integrals `(h·x)`, `(g·x)`, `(f·x)` are the gains of simple strategies
/// trading at the stopping times (see `integration::bdg_witness_strategy`).
pub fn certify_path(
    path: &SampledPath,
    seq: &StoppingSequence,
    p: f64,
    shift_to_zero: bool,
) -> Result<BdgCertificate> {
    certificate(&sequence_along(path, seq, shift_to_zero)?, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{lebesgue_sequence, GridSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(x: &[f64]) -> DiscreteSequence {
        DiscreteSequence::new(x.to_vec()).unwrap()
    }

    #[test]
    fn caches() {
        let s = seq(&[1.0, -2.0, 0.0]);
        assert_eq!(s.star(), &[1.0, 2.0, 2.0]);
        assert_eq!(s.bracket(), &[1.0, 10.0, 14.0]);
        assert!(DiscreteSequence::new(vec![]).is_err());
    }

    #[test]
    fn p1_examples() {
        let c = certificate_p1(&seq(&[0.0]));
        assert_eq!(c.h, vec![0.0]);
        assert_eq!((c.lhs1[0], c.rhs1[0], c.lhs2[0], c.rhs2[0]), (0.0, 0.0, 0.0, 0.0));
        assert!(c.holds());

        let c = certificate_p1(&seq(&[0.0, 1.0, 0.0]));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(c.h[0], 0.0);
        assert!((c.h[1] - r).abs() < 1e-15);
        assert_eq!(c.h[2], 0.0);
        assert!((c.hx[2] + r).abs() < 1e-15);
        assert!((c.rhs1[2] - (6.0 * 2f64.sqrt() - 2.0 * r)).abs() < 1e-12);
        assert!((c.rhs2[2] - (3.0 + r)).abs() < 1e-12);
        assert!(c.holds());

        let c = certificate_p1(&seq(&[-1.5; 5]));
        assert!(c.hx.iter().all(|&v| v == 0.0));
        assert!(c.lhs1.iter().all(|&v| v == 1.5));
        assert!(c.rhs1.iter().all(|&v| v == 9.0));
        assert!(c.rhs2.iter().all(|&v| v == 4.5));
    }

    #[test]
    fn p_examples() {
        let c = certificate_p(&seq(&[0.0; 4]), 2.0).unwrap();
        assert!(c.f.iter().chain(&c.g).all(|&v| v == 0.0));
        assert!(c.holds());

        // x = (0, 1), p = 2: [x] = (0, 1), x* = (0, 1), f_0 = g_0 = 0,
        // e_1^{(0)} = 1/√2, e_1^{(1)} = 1/√2, weights at l = 1 are 1: f_1 = g_1 = 4/√2
        let c = certificate_p(&seq(&[0.0, 1.0]), 2.0).unwrap();
        assert_eq!(c.c_p, 36.0);
        assert_eq!((c.f[0], c.g[0]), (0.0, 0.0));
        assert!((c.f[1] - 4.0 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((c.g[1] - c.f[1]).abs() < 1e-12);
        assert_eq!((c.gx[1], c.fx[1]), (0.0, 0.0));
        assert_eq!((c.lhs1[1], c.rhs1[1]), (1.0, 36.0));
        assert!(c.holds());
        assert!(certificate_p(&seq(&[0.0]), 1.0).is_err());
    }

    #[test]
    fn constants() {
        assert_eq!(bdg_constant(1.0), 6.0);
        assert_eq!(bdg_constant(2.0), 36.0);
        assert!((bdg_constant(3.0) - 216.0 * 4.0).abs() < 1e-9);
    }

    #[test]
    fn fast_fg_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.random_range(1..20);
            let mut x = vec![rng.random_range(-1.0..1.0)];
            for _ in 1..n {
                let last = *x.last().unwrap();
                x.push(last + rng.random_range(-1.0..1.0));
            }
            let s = seq(&x);
            let p = 2.5;
            let (f, g) = fg_sequences(&s, p);
            for k in 0..n {
                let (mut fk, mut gk) = (0.0, 0.0);
                for l in 0..=k {
                    let pb = |j: usize| s.bracket()[j].powf((p - 1.0) / 2.0);
                    let ps = |j: usize| s.star()[j].powf(p - 1.0);
                    let w = pb(l) - if l > 0 { pb(l - 1) } else { 0.0 };
                    let u = ps(l) - if l > 0 { ps(l - 1) } else { 0.0 };
                    fk += w * e_term(&s, k, l);
                    gk += u * e_term(&s, k, l);
                }
                assert!((f[k] - p * p * fk).abs() < 1e-10 * (1.0 + f[k].abs()));
                assert!((g[k] - p * p * gk).abs() < 1e-10 * (1.0 + g[k].abs()));
            }
        }
    }

    #[test]
    fn unsquared_maximum_breaks_the_lower_inequality() {
        // x_k = 1000·k: with x*_l unsquared the integrand grows like √k and
        // √[x]_k ≤ 3x*_k − (h·x)_k fails; the squared form keeps |h| ≤ 1
        let s = seq(&(0..30).map(|k| 1000.0 * k as f64).collect::<Vec<_>>());
        let unsquared: Vec<f64> = (0..s.len())
            .map(|l| ratio(s.x()[l], (s.bracket()[l] + s.star()[l]).sqrt()))
            .collect();
        let hx = s.integral(&unsquared);
        let k = s.len() - 1;
        assert!(unsquared.iter().any(|h| h.abs() > 1.0));
        assert!(s.bracket()[k].sqrt() > 3.0 * s.star()[k] - hx[k]);
        let c = certificate_p1(&s);
        assert!(c.holds());
        assert!(c.h.iter().all(|h| h.abs() <= 1.0));
    }

    #[test]
    fn certify_path_examples() {
        let c = SampledPath::constant(2.0, 1.0).unwrap();
        let s = lebesgue_sequence(&c, GridSpec::new(0.5, 0.0).unwrap());
        let cert = certify_path(&c, &s, 1.0, true).unwrap();
        assert!(cert.x.iter().chain(&cert.hx).all(|&v| v == 0.0));

        let z = SampledPath::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let s = lebesgue_sequence(&z, GridSpec::new(1.0, 0.0).unwrap());
        let cert = certify_path(&z, &s, 1.0, true).unwrap();
        assert_eq!(cert.x, vec![0.0, 1.0, 0.0, 1.0]);
        assert!(cert.holds());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_seq() -> impl Strategy<Value = DiscreteSequence> {
            (prop::collection::vec(-2.0f64..2.0, 1..40), -6i32..4).prop_map(|(inc, e)| {
                let scale = 10f64.powi(e);
                let mut x = Vec::with_capacity(inc.len());
                let mut acc = 0.0;
                for (i, d) in inc.iter().enumerate() {
                    acc = if i == 0 { d * scale } else { acc + d * scale };
                    x.push(acc);
                }
                DiscreteSequence::new(x).unwrap()
            })
        }

        proptest! {
            #[test]
            fn h_and_e_bounded(s in arb_seq()) {
                prop_assert!(h_sequence(&s).iter().all(|h| h.abs() <= 1.0));
                for k in 0..s.len() {
                    for l in 0..=k {
                        prop_assert!(e_term(&s, k, l).abs() <= 1.0 + 1e-15);
                    }
                }
            }

            #[test]
            fn inequalities_hold(s in arb_seq(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
                let c = certificate(&s, p).unwrap();
                prop_assert!(c.holds(), "worst margin {}", c.worst_relative_margin());
            }

            #[test]
            fn prefix_consistent(s in arb_seq(), p in prop::sample::select(vec![1.0, 2.0]), cut in 0usize..40) {
                let j = cut.min(s.len() - 1);
                let head = DiscreteSequence::new(s.x()[..=j].to_vec()).unwrap();
                let full = certificate(&s, p).unwrap();
                let part = certificate(&head, p).unwrap();
                prop_assert_eq!(&full.upper_integrand()[..=j], part.upper_integrand());
                prop_assert_eq!(&full.lhs1[..=j], &part.lhs1[..]);
            }
        }
    }
}
