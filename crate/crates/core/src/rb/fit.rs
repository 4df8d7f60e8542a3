use serde::{Deserialize, Serialize};

use super::DecayRecord;
use crate::error::{Error, Result};

/// Least-squares fit of `A₀ pᵏ + B₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a0: f64,
    pub b0: f64,
    pub p: f64,
    pub residual: f64,
}

// Best (A, B, sse) for fixed p; the model is linear in A and B.
fn linear_part(ks: &[f64], ys: &[f64], w: &[f64], p: f64) -> (f64, f64, f64) {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&k, &y), &wi) in ks.iter().zip(ys).zip(w) {
        let x = p.powf(k);
        sw += wi;
        sx += wi * x;
        sy += wi * y;
        sxx += wi * x * x;
        sxy += wi * x * y;
    }
    let det = sw * sxx - sx * sx;
    let (a, b) = if det.abs() < 1e-300 {
        (0.0, sy / sw)
    } else {
        ((sw * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det)
    };
    let sse = ks
        .iter()
        .zip(ys)
        .zip(w)
        .map(|((&k, &y), &wi)| wi * (y - a * p.powf(k) - b).powi(2))
        .sum();
    (a, b, sse)
}

/// Fits `A₀ pᵏ + B₀` by variable projection: `A₀, B₀` are solved in closed
/// form for each `p`, and `p ∈ [−1, 1]` is found by a grid scan refined with
/// golden-section search. Records with a positive `stderr` are weighted by
/// its inverse square.
pub fn fit_decay(records: &[DecayRecord]) -> Result<DecayFit> {
    let mut distinct: Vec<usize> = records.iter().map(|r| r.k).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Invalid(format!(
            "decay fit needs at least 3 distinct lengths, got {}",
            distinct.len()
        )));
    }
    let ks: Vec<f64> = records.iter().map(|r| r.k as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.mean).collect();
    let weighted = records.iter().all(|r| r.stderr > 0.0 && r.stderr.is_finite());
    let w: Vec<f64> = records
        .iter()
        .map(|r| if weighted { 1.0 / (r.stderr * r.stderr) } else { 1.0 })
        .collect();
    let sse = |p: f64| linear_part(&ks, &ys, &w, p).2;

    const GRID: usize = 2000;
    let step = 2.0 / GRID as f64;
    let best = (0..=GRID)
        .map(|i| -1.0 + i as f64 * step)
        .min_by(|a, b| sse(*a).total_cmp(&sse(*b)))
        .expect("non-empty grid");
    let (mut lo, mut hi) = ((best - step).max(-1.0), (best + step).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..200 {
        if hi - lo < 1e-14 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sse(x2);
        }
    }
    let p = [lo, hi, best, (lo + hi) / 2.0]
        .into_iter()
        .min_by(|a, b| sse(*a).total_cmp(&sse(*b)))
        .expect("candidates");
    let (a0, b0, residual) = linear_part(&ks, &ys, &w, p);
    Ok(DecayFit { a0, b0, p, residual })
}
