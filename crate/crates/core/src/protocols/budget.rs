//! Hoeffding sample budgets.

use crate::error::{Error, Result};
use crate::qstate::Observable;
use crate::scalar::Real;

/// `range² / (2δ²) · ln(2/ε)`.
pub fn hoeffding_bound(range: f64, delta: f64, eps: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::param("delta", "must be positive and finite"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", "must lie strictly between 0 and 1"));
    }
    if !(range >= 0.0) || !range.is_finite() {
        return Err(Error::param("range", "must be non-negative and finite"));
    }
    Ok(range * range / (2.0 * delta * delta) * (2.0 / eps).ln())
}

/// Smallest integer strictly above the Hoeffding bound for an outcome
/// spread of `range`. A bound within rounding of an integer `k` counts as
/// exactly `k`, so the answer is `k + 1`.
pub fn required_ancillas_for_range(range: f64, delta: f64, eps: f64) -> Result<usize> {
    let bound = hoeffding_bound(range, delta, eps)?;
    let nearest = bound.round();
    let snapped = if (bound - nearest).abs() <= 1e-12 * nearest.max(1.0) {
        nearest
    } else {
        bound.floor()
    };
    if snapped >= usize::MAX as f64 {
        return Err(Error::param("delta", "budget does not fit in a machine word"));
    }
    Ok(snapped as usize + 1)
}

/// `N > (O_max - O_min)² / (2δ²) · ln(2/ε)`.
pub fn required_ancillas<T: Real>(obs: &Observable<T>, delta: f64, eps: f64) -> Result<usize> {
    required_ancillas_for_range(obs.range().as_f64(), delta, eps)
}
