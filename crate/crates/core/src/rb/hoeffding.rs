//! Hoeffding sample sizes for means of outcomes in `[−1, 1]`.

/// Width of the outcome range.
const RANGE: f64 = 2.0;

/// Samples needed so the empirical mean lies within `epsilon` of the true
/// mean with probability at least `1 − delta`.
///
/// `m = ⌈R² ln(2/δ) / (2ε²)⌉` with `R = 2`.
pub fn hoeffding_samples(epsilon: f64, delta: f64) -> u64 {
    assert!(epsilon > 0.0 && delta > 0.0 && delta < 1.0);
    (RANGE * RANGE * (2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64
}

/// Half-width guaranteed by `m` samples at failure probability `delta`.
pub fn hoeffding_half_width(m: u64, delta: f64) -> f64 {
    assert!(m > 0 && delta > 0.0 && delta < 1.0);
    RANGE * ((2.0 / delta).ln() / (2.0 * m as f64)).sqrt()
}
