//! Binomial and beta identities, and the ball/sphere constants.

use crate::error::{invalid, Result};
use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::{E, PI};

/// Exact binomial coefficient (panics on overflow past `u128`).
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if n <= 120 {
        binomial_u128(n, k) as f64
    } else {
        (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)).exp()
    }
}

/// Generalized binomial `C(x, k)` for real `x`, integer `k`.
pub fn binomial_real(x: f64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

pub fn factorial(n: u64) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `(n/k)^k <= C(n,k) < (e n/k)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomBounds {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl BinomBounds {
    pub fn holds(&self) -> bool {
        self.lower <= self.value && self.value < self.upper
    }
}

pub fn binom_bounds(n: u64, k: u64) -> Result<BinomBounds> {
    if k < 1 || k > n {
        return Err(invalid(format!("binom_bounds needs 1 <= k <= n, got n={n}, k={k}")));
    }
    let ratio = n as f64 / k as f64;
    Ok(BinomBounds {
        lower: ratio.powi(k as i32),
        value: binomial(n, k),
        upper: (E * ratio).powi(k as i32),
    })
}

/// `int_0^1 s^a (1-s)^b ds = 1 / ((a+b+1) C(a+b, a))` for integers `a, b >= 0`.
pub fn beta_integral(a: i64, b: i64) -> Result<f64> {
    if a < 0 || b < 0 {
        return Err(invalid(format!("beta_integral needs a, b >= 0, got ({a}, {b})")));
    }
    let (a, b) = (a as u64, b as u64);
    Ok(1.0 / ((a + b + 1) as f64 * binomial(a + b, a)))
}

/// Euler beta function for real arguments.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0 + 1.0)
}

/// Surface area of `S^{n-1}` (the total mass of the surface measure `dθ`).
pub fn sphere_area(n: usize) -> f64 {
    if n == 1 {
        return 2.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

pub use statrs::function::gamma::gamma as gamma_fn;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_examples() {
        let b = binom_bounds(4, 2).unwrap();
        assert_eq!((b.lower, b.value), (4.0, 6.0));
        assert!((b.upper - (2.0 * E).powi(2)).abs() < 1e-12);
        assert!((b.upper - 29.556).abs() < 1e-3);
        let b = binom_bounds(10, 5).unwrap();
        assert_eq!((b.lower, b.value), (32.0, 252.0));
        assert!((b.upper - 32.0 * E.powi(5)).abs() < 1e-9);
        for n in 1..30u64 {
            let b = binom_bounds(n, 1).unwrap();
            assert_eq!((b.lower, b.value), (n as f64, n as f64));
            assert!((b.upper - E * n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn binom_range_errors() {
        assert!(binom_bounds(3, 0).is_err());
        assert!(binom_bounds(3, 4).is_err());
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_integral(0, 0).unwrap(), 1.0);
        assert!((beta_integral(1, 1).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert!((beta_integral(3, 5).unwrap() - 1.0 / 504.0).abs() < 1e-17);
        assert!(beta_integral(-1, 2).is_err());
        assert!((beta_fn(4.0, 5.0) - beta_integral(3, 4).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn exact_binomials() {
        assert_eq!(binomial_u128(60, 30), 118_264_581_564_861_424);
        assert_eq!(binomial(5, 2), 10.0);
    }

    #[test]
    fn ball_constants() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        for n in 1..8 {
            assert!((sphere_area(n) - n as f64 * unit_ball_volume(n)).abs() < 1e-12);
        }
    }
}
