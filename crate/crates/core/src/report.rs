//! Small statistics helpers shared by experiments.

use serde::Serialize;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        if samples.is_empty() {
            return Self { mean: 0.0, stderr: 0.0, trials: 0 };
        }
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self { mean, stderr: (var / n).sqrt(), trials: samples.len() as u64 }
    }

    pub fn bernoulli(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self { mean: 0.0, stderr: 0.0, trials };
        }
        let p = successes as f64 / trials as f64;
        Self { mean: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials }
    }

    /// Is `value` within `sigmas` standard errors of the mean? A zero
    /// stderr falls back to the binomial error implied by `value` itself.
    pub fn consistent_with(&self, value: f64, sigmas: f64) -> bool {
        let spread = if self.stderr > 0.0 {
            self.stderr
        } else {
            (value * (1.0 - value) / self.trials.max(1) as f64).sqrt()
        };
        (self.mean - value).abs() <= sigmas * spread
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimates() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!(e.mean, 2.0);
        assert!((e.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let b = Estimate::bernoulli(25, 100);
        assert!((b.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-12);
        assert!(Estimate::bernoulli(0, 1000).consistent_with(0.001, 3.0));
    }
}
