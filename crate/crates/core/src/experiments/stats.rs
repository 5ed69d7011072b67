use crate::error::{Error, Result};

/// sup_x |F̂ₙ(x) − F(x)| over the sample, checking both sides of every jump.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        worst = worst.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(worst)
}

/// √(p(1−p)/n).
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// 95% Wilson score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let n = n as f64;
    let p = hits as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let centre = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
    // Clamped to contain p: at 0 or n hits the bounds cancel only up to rounding.
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ks_trivial_cases() {
        assert_eq!(ks_statistic(&[0.3, 1.0, 2.0], |_| 0.0).unwrap(), 1.0);
        assert_eq!(ks_statistic(&[0.0], |x| if x < 0.0 { 0.0 } else { 0.5 }).unwrap(), 0.5);
        assert_eq!(ks_statistic(&[], |x| x), Err(Error::EmptySample));
    }

    #[test]
    fn ks_uniform_grid() {
        // Points at (i − ½)/n against U(0,1): distance exactly 1/(2n).
        let s: Vec<f64> = (1..=10).map(|i| (i as f64 - 0.5) / 10.0).collect();
        assert_relative_eq!(ks_statistic(&s, |x| x).unwrap(), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(50, 1000);
        assert!(lo < 0.05 && 0.05 < hi);
        // Reference values from statsmodels (method="wilson").
        assert_relative_eq!(lo, 0.038_130_262_392_748_81, epsilon = 1e-12);
        assert_relative_eq!(hi, 0.065_313_820_244_250_81, epsilon = 1e-12);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
    }
}
