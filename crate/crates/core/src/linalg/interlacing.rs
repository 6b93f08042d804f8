use serde::Serialize;

use crate::error::{Error, Result};

use super::SpectralSummary;

/// Outcome of checking that a sub-spectrum interlaces a full spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterlacingReport {
    pub holds: bool,
    /// Largest amount by which any inequality fails; 0 when all hold exactly.
    pub max_violation: f64,
    pub checked_inequalities: usize,
    pub tolerance: f64,
}

/// Checks `λ_i ≥ μ_i ≥ λ_{i+k}` for `i = 1..m`, where the full spectrum has
/// `n` eigenvalues, the sub-spectrum `m = n − k`, both sorted descending.
/// With `k = 1` this is the classical chain `λ₁ ≥ μ₁ ≥ λ₂ ≥ … ≥ μ_{n−1} ≥ λ_n`.
pub fn check_interlacing(
    full: &SpectralSummary,
    sub: &SpectralSummary,
    tolerance: f64,
) -> Result<InterlacingReport> {
    let n = full.eigenvalues.len();
    let m = sub.eigenvalues.len();
    if m == 0 || m >= n {
        return Err(Error::input(format!(
            "sub-spectrum must be non-empty and strictly smaller than the full spectrum ({m} vs {n})"
        )));
    }
    let k = n - m;
    let lambda = &full.eigenvalues;
    let mut max_violation = 0.0_f64;
    for (i, &mu) in sub.eigenvalues.iter().enumerate() {
        max_violation = max_violation.max(mu - lambda[i]).max(lambda[i + k] - mu);
    }
    Ok(InterlacingReport {
        holds: max_violation <= tolerance,
        max_violation,
        checked_inequalities: 2 * m,
        tolerance,
    })
}
