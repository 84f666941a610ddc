//! Monte Carlo point estimates with standard errors and intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided standard normal quantile for confidence level `level`.
pub fn z_value(level: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    n.inverse_cdf(0.5 + level / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicates: usize,
    pub confidence: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    /// Sample mean with a normal-approximation interval.
    pub fn from_samples(samples: &[f64], confidence: f64) -> Self {
        let n = samples.len().max(1);
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64
        } else {
            0.0
        };
        let se = (var / n as f64).sqrt();
        let z = z_value(confidence);
        Self {
            mean,
            std_error: se,
            replicates: n,
            confidence,
            lower: mean - z * se,
            upper: mean + z * se,
        }
    }

    /// Binomial proportion with the Wilson score interval, which stays
    /// informative when no or all trials succeed.
    pub fn proportion(successes: usize, trials: usize, confidence: f64) -> Self {
        let n = trials.max(1) as f64;
        let p = successes as f64 / n;
        let z = z_value(confidence);
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            mean: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            replicates: trials.max(1),
            confidence,
            lower: (centre - half).clamp(0.0, p),
            upper: (centre + half).clamp(p, 1.0),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// `|self - other| <= k * sqrt(se1^2 + se2^2)`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * combined_se(self.std_error, other.std_error)
    }
}

pub fn combined_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_values() {
        assert!((z_value(0.95) - 1.959_964).abs() < 1e-5);
        assert!((z_value(0.99) - 2.575_829).abs() < 1e-5);
    }

    #[test]
    fn proportion_interval() {
        let e = Estimate::proportion(0, 100, 0.95);
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.std_error, 0.0);
        assert!(e.upper > 0.0 && e.upper < 0.05);
        let e = Estimate::proportion(30, 100, 0.95);
        assert!(e.contains(0.3));
        assert!((e.std_error - (0.3f64 * 0.7 / 100.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sample_mean() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 0.95);
        assert_eq!(e.mean, 2.5);
        assert!((e.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
        assert!(e.lower < e.mean && e.mean < e.upper);
    }
}
