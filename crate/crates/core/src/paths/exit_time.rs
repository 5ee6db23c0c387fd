//! Exact sampling of the exit time of standard Brownian motion from `(-1, 1)`.
//!
//! The law has Laplace transform `1 / cosh(√(2λ))`. Its density is the
//! alternating series `Σ (-1)^n a_n(x)`, with one representation of `a_n`
//! below the split point and another above; the sampler draws from the
//! envelope `a_0` and accepts with the alternating-series test.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

const SPLIT: f64 = 0.64;
/// `2 · erfc(1 / √(2·SPLIT))`: envelope mass on `(0, SPLIT]`.
const LEFT_MASS: f64 = 2.0 * 0.211_299_547_333_710_5;
/// `(4/π) · exp(-π² · SPLIT / 8)`: envelope mass on `(SPLIT, ∞)`.
const RIGHT_MASS: f64 = 0.578_102_623_468_294_4;

fn series_term(n: u32, x: f64) -> f64 {
    let k = n as f64 + 0.5;
    if x > SPLIT {
        PI * k * (-k * k * PI * PI * x / 2.0).exp()
    } else {
        PI * k * (2.0 / (PI * x)).powf(1.5) * (-2.0 * k * k / x).exp()
    }
}

/// One draw of `inf{t : |W_t| = 1}` for a standard Brownian motion `W`.
pub fn sample_unit_exit_time<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let right_prob = RIGHT_MASS / (RIGHT_MASS + LEFT_MASS);
    loop {
        let x = if rng.random::<f64>() < right_prob {
            let e: f64 = Exp1.sample(rng);
            SPLIT + e * 8.0 / (PI * PI)
        } else {
            1.0 / normal_tail_square(rng, 1.0 / SPLIT.sqrt())
        };
        let mut s = series_term(0, x);
        let y = rng.random::<f64>() * s;
        let mut n = 0;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= series_term(n, x);
                if y <= s {
                    return x;
                }
            } else {
                s += series_term(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}

/// `Z²` for a standard normal `Z` conditioned on `|Z| ≥ z0` (exponential rejection).
fn normal_tail_square<R: Rng + ?Sized>(rng: &mut R, z0: f64) -> f64 {
    loop {
        let e1: f64 = Exp1.sample(rng);
        let e2: f64 = Exp1.sample(rng);
        let x = e1 / z0;
        if 2.0 * e2 > x * x {
            let z = z0 + x;
            return z * z;
        }
    }
}
