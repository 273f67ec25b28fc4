//! Order-stable summaries of replica samples.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// `sqrt(s^2 / n)` with the unbiased sample variance; 0 when `n < 2`.
    pub std_error: f64,
}

/// Sums are accumulated in slice order, so equal inputs give identical bits.
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            n,
            mean: 0.0,
            std_error: 0.0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_error = if n < 2 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1) as f64 / n as f64).sqrt()
    };
    Summary { n, mean, std_error }
}

/// Standard error of a difference of independent estimates.
pub fn combined_se(a: f64, b: f64) -> f64 {
    a.hypot(b)
}
