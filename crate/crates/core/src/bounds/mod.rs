//! Bounds on the identity weight `χ₀₀` of composed maps, Clifford+T
//! decompositions, and fidelity bounds for non-Clifford targets.

mod decompose;
mod pipeline;

pub use decompose::{
    decompose_circuit, decompose_t, fidelity_from_combination, CircuitGate, DecomposeOptions,
    LinearCombination, Term, T_MAX,
};
pub use pipeline::{bound_nonclifford_fidelity, BoundConfig, NonCliffordBound};

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance, in angle, for treating touching constraint ranges as touching.
const ANGLE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub valid: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, valid: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// The invalid interval returned when no value is consistent.
    pub fn empty() -> Self {
        Self {
            lo: f64::NAN,
            hi: f64::NAN,
            valid: false,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn check_unit(what: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::out_of_range(what, v, "[0, 1]"));
    }
    Ok(())
}

/// Unclipped endpoints `χ_A χ_B ∓ (2√((1−χ_A)χ_A(1−χ_B)χ_B) + (1−χ_A)(1−χ_B))`.
///
/// The upper endpoint is evaluated as `1 − (√(χ_A(1−χ_B)) − √(χ_B(1−χ_A)))²`,
/// the same quantity written so that it is exactly 1 when `χ_A = χ_B`.
fn composed_endpoints(a: f64, b: f64) -> (f64, f64) {
    let cross = 2.0 * ((1.0 - a) * a * (1.0 - b) * b).sqrt();
    let lo = a * b - cross - (1.0 - a) * (1.0 - b);
    let gap = (a * (1.0 - b)).sqrt() - (b * (1.0 - a)).sqrt();
    (lo, 1.0 - gap * gap)
}

/// Interval for `χ₀₀` of `A∘B` given `χ₀₀` of `A` and of `B`, clipped to `[0, 1]`.
pub fn bound_composed_chi00(chi_a: f64, chi_b: f64) -> Result<Interval> {
    check_unit("chi_a", chi_a)?;
    check_unit("chi_b", chi_b)?;
    let (lo, hi) = composed_endpoints(chi_a, chi_b);
    Ok(Interval::new(lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)))
}

/// `θ ∈ [0, π/2]` with `cos²θ = x`.
fn angle(x: f64) -> f64 {
    x.sqrt().min(1.0).acos()
}

/// The set of `χ_A ∈ [0, 1]` for which `chi_ab` lies in the composed bound
/// with `chi_b`.
///
/// With `χ_A = cos²α`, `χ_B = cos²β`, `χ_AB = cos²γ`, the upper endpoint is
/// `cos²(α−β)`, so that constraint reads `|α − β| ≤ γ`. The lower endpoint is
/// `½cos2β + ½R cos(2α + φ)` with `R = √(1 + sin²2β)`, `tan φ = sin2β`, which
/// gives a second range of `α` in closed form. The result is the image of
/// their intersection.
pub fn bound_deconvolved_chi00(chi_ab: f64, chi_b: f64) -> Result<Interval> {
    check_unit("chi_ab", chi_ab)?;
    check_unit("chi_b", chi_b)?;
    let beta = angle(chi_b);
    let gamma = angle(chi_ab);
    let mut lo_angle = (beta - gamma).max(0.0);
    let mut hi_angle = (beta + gamma).min(FRAC_PI_2);

    let s = (2.0 * beta).sin();
    let r = (1.0 + s * s).sqrt();
    let phi = s.atan();
    let q = (2.0 * chi_ab - (2.0 * beta).cos()) / r;
    if q < -1.0 {
        return Ok(Interval::empty());
    }
    if q < 1.0 {
        let w = q.acos();
        lo_angle = lo_angle.max((w - phi) / 2.0);
        hi_angle = hi_angle.min((2.0 * PI - w - phi) / 2.0);
    }
    if lo_angle > hi_angle {
        if lo_angle - hi_angle > ANGLE_SLACK {
            return Ok(Interval::empty());
        }
        let mid = 0.5 * (lo_angle + hi_angle);
        lo_angle = mid;
        hi_angle = mid;
    }
    let cos2 = |t: f64| {
        if t >= FRAC_PI_2 - ANGLE_SLACK {
            return 0.0;
        }
        let c = t.cos();
        (c * c).clamp(0.0, 1.0)
    };
    Ok(Interval::new(cos2(hi_angle), cos2(lo_angle)))
}

/// Prior-work bound: centre `(d²−1)χ_AB/(d²χ_B)`, half-width
/// `|χ_B − centre| + ((d²−1)/d² − χ_B)`, not clipped.
///
/// It is flagged valid when the half-width is non-negative and the lower
/// end of [`bound_deconvolved_chi00`] guarantees `χ_A ≥ 2χ_B − 1`, the
/// `χ₀₀` form of `F̄(A) ≥ 2F̄(B) − 1`.
pub fn mgj_bound_chi00(chi_ab: f64, chi_b: f64, d: usize) -> Result<Interval> {
    check_unit("chi_ab", chi_ab)?;
    check_unit("chi_b", chi_b)?;
    if chi_b == 0.0 {
        return Err(Error::out_of_range("chi_b", chi_b, "(0, 1]"));
    }
    if d < 2 {
        return Err(Error::Invalid(format!("dimension {d} must be at least 2")));
    }
    let d2 = (d * d) as f64;
    let centre = (d2 - 1.0) * chi_ab / (d2 * chi_b);
    let e = (chi_b - centre).abs() + ((d2 - 1.0) / d2 - chi_b);
    let ours = bound_deconvolved_chi00(chi_ab, chi_b)?;
    let valid = e >= 0.0 && ours.valid && ours.lo >= 2.0 * chi_b - 1.0;
    Ok(Interval {
        lo: centre - e,
        hi: centre + e,
        valid,
    })
}

/// One row of the bound comparison table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub chi_ab: f64,
    pub ours: Interval,
    pub mgj: Interval,
}

/// Both bounds over `points` evenly spaced `χ_AB ∈ [0, 1]`.
pub fn bound_curves(chi_b: f64, points: usize, d: usize) -> Result<Vec<BoundRow>> {
    if points < 2 {
        return Err(Error::Invalid("bound curves need at least 2 grid points".into()));
    }
    (0..points)
        .map(|i| {
            let chi_ab = i as f64 / (points - 1) as f64;
            Ok(BoundRow {
                chi_ab,
                ours: bound_deconvolved_chi00(chi_ab, chi_b)?,
                mgj: mgj_bound_chi00(chi_ab, chi_b, d)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composed_examples() {
        let i = bound_composed_chi00(0.7, 1.0).unwrap();
        assert!((i.lo - 0.7).abs() < 1e-15 && (i.hi - 0.7).abs() < 1e-15);
        for a in [0.1, 0.5, 0.93, 0.995] {
            assert_eq!(bound_composed_chi00(a, a).unwrap().hi, 1.0);
        }
        let (a, b): (f64, f64) = (0.9, 0.8);
        let hw = 2.0 * ((1.0 - a) * a * (1.0 - b) * b).sqrt() + (1.0 - a) * (1.0 - b);
        let i = bound_composed_chi00(a, b).unwrap();
        assert!((i.hi - (a * b + hw)).abs() < 1e-14);
        assert!((i.lo - (a * b - hw)).abs() < 1e-14);
        assert!(bound_composed_chi00(1.1, 0.5).is_err());
    }

    #[test]
    fn deconvolved_identity_noise() {
        for c in [0.0, 0.3, 0.99] {
            let i = bound_deconvolved_chi00(c, 1.0).unwrap();
            assert!(i.valid);
            assert!((i.lo - c).abs() < 1e-9 && (i.hi - c).abs() < 1e-9, "{i:?}");
        }
    }

    #[test]
    fn deconvolved_is_inverse_of_forward() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let (a, b) = (next(), next());
            let f = bound_composed_chi00(a, b).unwrap();
            let mid = 0.5 * (f.lo + f.hi);
            let inv = bound_deconvolved_chi00(mid, b).unwrap();
            assert!(inv.valid && inv.lo - 1e-9 <= a && a <= inv.hi + 1e-9, "{a} {b} {inv:?}");
        }
    }

    #[test]
    fn upper_end_reaches_one_on_diagonal() {
        assert_eq!(bound_deconvolved_chi00(0.995, 0.995).unwrap().hi, 1.0);
    }

    #[test]
    fn mgj_example() {
        let i = mgj_bound_chi00(0.99, 0.995, 2).unwrap();
        let centre = 3.0 * 0.99 / (4.0 * 0.995);
        assert!(((i.lo + i.hi) / 2.0 - centre).abs() < 1e-12);
        assert!((centre - 0.74623).abs() < 1e-5);
        let e = (0.995 - centre).abs() + (0.75 - 0.995);
        assert!(((i.hi - i.lo) / 2.0 - e).abs() < 1e-12);
        assert!(mgj_bound_chi00(0.5, 0.0, 2).is_err());
    }
}
