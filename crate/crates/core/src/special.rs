//! Standard normal density and tail.

use libm::erfc;

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// φ(z).
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// Ψ(u) = P(Z > u), accurate deep into the upper tail.
pub fn normal_tail(u: f64) -> f64 {
    0.5 * erfc(u / std::f64::consts::SQRT_2)
}

/// Closed-form Pickands constant for α ∈ {1, 2}; `None` otherwise.
pub fn pickands_closed_form(alpha: f64) -> Option<f64> {
    if alpha == 1.0 {
        Some(1.0)
    } else if alpha == 2.0 {
        Some(1.0 / std::f64::consts::PI.sqrt())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tail_values() {
        // Ψ(3) and Ψ(5) from mpmath at 30 digits.
        assert_relative_eq!(normal_tail(3.0), 1.349_898_031_630_094_6e-3, max_relative = 1e-13);
        assert_relative_eq!(normal_tail(5.0), 2.866_515_718_791_939e-7, max_relative = 1e-12);
        assert_relative_eq!(normal_tail(0.0), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn tail_plus_head_is_one() {
        for &u in &[-3.0, -0.5, 0.7, 2.2] {
            assert_relative_eq!(normal_tail(u) + normal_tail(-u), 1.0, max_relative = 1e-14);
        }
    }
}
