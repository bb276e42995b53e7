//! Shared report types for finite-difference gradient checks.

use serde::{Deserialize, Serialize};

/// Relative error with an absolute floor so near-zero gradients do not
/// register as spurious failures of the difference quotient.
pub const REL_ERROR_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradGroup {
    pub name: String,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradReport {
    pub seed: u64,
    pub groups: Vec<GradGroup>,
}

impl GradReport {
    pub fn worst(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.max_rel_error)
            .fold(0.0, f64::max)
    }

    pub fn all_below(&self, tolerance: f64) -> bool {
        self.groups.iter().all(|g| g.max_rel_error < tolerance)
    }
}

/// Max over entries of `|a - n| / max(|a|, |n|, floor)`.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric.iter())
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(REL_ERROR_FLOOR))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_has_zero_error() {
        assert_eq!(max_rel_error(&[1.0, -2.0], &[1.0, -2.0]), 0.0);
    }

    #[test]
    fn sabotaged_entry_is_detected() {
        let analytic = [0.05, 0.01];
        let mut broken = analytic;
        broken[0] += 0.05;
        assert!(max_rel_error(&broken, &analytic) > 1e-2);
    }

    #[test]
    fn tiny_gradients_fall_under_the_floor() {
        // absolute difference 1e-12 on ~1e-9 gradients is noise, not error
        assert!(max_rel_error(&[1e-9], &[1e-9 + 1e-12]) < 1e-4);
    }
}
