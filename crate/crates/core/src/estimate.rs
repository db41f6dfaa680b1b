use serde::{Deserialize, Serialize};

/// A Monte Carlo or quadrature result with its uncertainty.
///
/// For mean-type estimates `std_error` is the sample standard deviation
/// divided by `sqrt(n_samples)`. Deterministic grid computations carry a
/// resolution error in `std_error` and `seed = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    #[serde(rename = "n")]
    pub n_samples: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn new(value: f64, std_error: f64, n_samples: u64, seed: u64) -> Self {
        Self {
            value,
            std_error: std_error.abs(),
            n_samples,
            seed,
        }
    }

    /// An exact value (closed form): zero error.
    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0, 1, 0)
    }

    /// Mean and standard error of a sample.
    pub fn from_samples(values: &[f64], seed: u64) -> Self {
        let (mean, se) = mean_and_se(values);
        Self::new(mean, se, values.len() as u64, seed)
    }

    /// Whether `other` is within `k` combined standard errors, plus `slack`.
    pub fn agrees_with(&self, other: &Estimate, k: f64, slack: f64) -> bool {
        let combined = self.std_error.hypot(other.std_error);
        (self.value - other.value).abs() <= k * combined + slack
    }

    /// Whether `target` is within `k` standard errors, plus `slack`.
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + slack
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.std_error / self.value.abs()
        }
    }

    /// `self * c` for a known constant `c`.
    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.value * c, self.std_error * c.abs(), self.n_samples, self.seed)
    }

    /// `self^p`, first-order error propagation.
    pub fn powf(&self, p: f64) -> Self {
        let v = self.value.powf(p);
        let se = (p * self.value.powf(p - 1.0) * self.std_error).abs();
        Self::new(v, se, self.n_samples, self.seed)
    }

    /// Ratio of two independent estimates, first-order error propagation.
    pub fn ratio(&self, other: &Estimate) -> Self {
        let v = self.value / other.value;
        let rel = self.relative_error().hypot(other.relative_error());
        let se = if rel.is_finite() {
            (v * rel).abs()
        } else {
            f64::INFINITY
        };
        Self::new(v, se, self.n_samples.min(other.n_samples), self.seed)
    }

    /// Product of two independent estimates, first-order error propagation.
    pub fn product(&self, other: &Estimate) -> Self {
        let v = self.value * other.value;
        let se = (self.value * other.std_error).hypot(other.value * self.std_error);
        Self::new(v, se, self.n_samples.min(other.n_samples), self.seed)
    }
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_with_short_sample_key() {
        let e = Estimate::new(1.5, 0.25, 10, 7);
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"value":1.5,"std_error":0.25,"n":10,"seed":7}"#);
        let back: Estimate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn sample_standard_error() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 0);
        assert_eq!(e.value, 2.5);
        // sample sd = sqrt(5/3)
        assert!((e.std_error - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn agreement_uses_combined_error() {
        let a = Estimate::new(1.0, 0.03, 100, 1);
        let b = Estimate::new(1.1, 0.04, 100, 2);
        assert!(a.agrees_with(&b, 3.0, 0.0));
        assert!(!a.agrees_with(&b, 1.0, 0.0));
    }
}
