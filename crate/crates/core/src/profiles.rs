//! Shared scalar profiles for data, targets, and potential families.

use crate::scalar::exp;

/// Smooth compactly supported bump: `exp(1 - 1/(1-t^2))` for `|t| < 1`,
/// zero outside, normalized to 1 at the center.
pub fn bump(t: f64) -> f64 {
    if t * t < 1.0 {
        exp(1.0 - 1.0 / (1.0 - t * t))
    } else {
        0.0
    }
}

/// Unnormalized Gaussian `exp(-t^2/2)`.
pub fn gaussian(t: f64) -> f64 {
    exp(-0.5 * t * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support_and_peak() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.5), 0.0);
        assert!(bump(0.5) > 0.0 && bump(0.5) < 1.0);
    }
}
