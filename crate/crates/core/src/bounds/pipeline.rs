use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bound_deconvolved_chi00, fidelity_from_combination, Interval, LinearCombination};
use crate::channel::{make_channel, ChannelSpec, PauliLiouvilleMap};
use crate::clifford::CliffordElement;
use crate::error::{Error, Result};
use crate::rb::{
    chunk_rng, estimate_fidelity_to_clifford, EstimateOptions, FidelityEstimate, RbModel, RbSource,
    SamplingMode,
};

/// Points per box edge when extremizing the deconvolved bound.
const BOX_SAMPLES: usize = 257;

/// Widening of every `χ` range to absorb rounding in exact inputs.
const ROUNDING_SLACK: f64 = 1e-12;

fn identity_spec() -> ChannelSpec {
    ChannelSpec::identity(1)
}

fn one() -> u64 {
    1
}

/// The RB experiment shared by every term: map under test, noise, SPAM.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundConfig {
    pub n: usize,
    pub e_map: ChannelSpec,
    #[serde(default = "identity_spec")]
    pub noise_map: ChannelSpec,
    #[serde(default)]
    pub eta_prep: f64,
    #[serde(default)]
    pub eta_meas: f64,
    #[serde(default = "one")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
}

impl BoundConfig {
    pub fn new(e_map: ChannelSpec, noise_map: ChannelSpec) -> Self {
        Self {
            n: 1,
            e_map,
            noise_map,
            eta_prep: 0.0,
            eta_meas: 0.0,
            shots: 1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonCliffordBound {
    /// Interval on `F̄(E, U)`.
    pub interval: Interval,
    /// The same interval on `χ₀₀`.
    pub chi_interval: Interval,
    /// Combined estimate of `F̄(E∘N, U)`.
    pub f_en: FidelityEstimate,
    /// Estimate of `F̄(N, 𝕀)`.
    pub f_noise: FidelityEstimate,
    /// Probability with which the interval holds.
    pub confidence: f64,
    pub samples_used: u64,
}

fn to_chi(f: f64, d: f64) -> f64 {
    ((d + 1.0) * f - 1.0) / d
}

fn to_fidelity(chi: f64, d: f64) -> f64 {
    (d * chi + 1.0) / (d + 1.0)
}

/// Smallest lower end and largest upper end of the deconvolved bound over
/// `χ_AB ∈ ab`, `χ_B ∈ b`.
///
/// The lower end grows with both arguments, so it is read off the lower
/// corner and the lower edges. The upper end, for fixed `χ_B`, peaks at
/// `χ_AB = χ_B`, so it is maximized along `χ_AB = clamp(χ_B)`.
fn extremize(ab: (f64, f64), b: (f64, f64)) -> Result<Interval> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut consider = |c: f64, bb: f64| -> Result<()> {
        let i = bound_deconvolved_chi00(c, bb)?;
        if i.valid {
            lo = lo.min(i.lo);
            hi = hi.max(i.hi);
        }
        Ok(())
    };
    for s in 0..BOX_SAMPLES {
        let t = s as f64 / (BOX_SAMPLES - 1) as f64;
        let bb = b.0 + (b.1 - b.0) * t;
        let c = ab.0 + (ab.1 - ab.0) * t;
        consider(ab.0, bb)?;
        consider(c, b.0)?;
        consider(bb.clamp(ab.0, ab.1), bb)?;
    }
    for (c, bb) in [(ab.0, b.1), (ab.1, b.0), (ab.1, b.1)] {
        consider(c, bb)?;
    }
    if lo > hi {
        return Ok(Interval::empty());
    }
    Ok(Interval::new(lo, hi))
}

/// Exact decay parameter of a model from its sequence averages.
fn analytic_fidelity(model: &RbModel) -> Result<FidelityEstimate> {
    let (a0, b0) = model.spam_constants();
    if a0.abs() < 1e-12 {
        return Err(Error::Divergent("A0 vanishes; the decay is not observable".into()));
    }
    let p = (model.exact_f_k(1) - b0) / a0;
    Ok(FidelityEstimate::exact(crate::channel::fidelity_from_decay(p, model.dim())))
}

/// Bounds `F̄(E, U)` for a non-Clifford `U = Σ β_i C_i`.
///
/// Each `F̄(E∘N, C_i)` is estimated to `ε/Σ|β_i|` with failure probability
/// `δ/N_U` and combined, `F̄(N, 𝕀)` is estimated to `(ε, δ)`, and the
/// deconvolved `χ₀₀` bound is extremized over both confidence ranges.
/// Analytic mode uses exact sequence averages and zero-width ranges.
pub fn bound_nonclifford_fidelity(
    cfg: &BoundConfig,
    combo: &LinearCombination,
    epsilon: f64,
    delta: f64,
    mode: SamplingMode,
) -> Result<NonCliffordBound> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::out_of_range("epsilon", epsilon, "(0, 1)"));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::out_of_range("delta", delta, "(0, 0.5)"));
    }
    if combo.is_empty() || combo.n != cfg.n {
        return Err(Error::Invalid("combination is empty or has the wrong qubit count".into()));
    }
    let e = make_channel(&cfg.e_map)?;
    let noise = make_channel(&cfg.noise_map)?;
    let d = 1usize << cfg.n;
    let df = d as f64;
    let model = |map: &PauliLiouvilleMap, target: &CliffordElement, tag: u64| {
        RbModel::new(
            map.clone(),
            noise.clone(),
            target.clone(),
            cfg.eta_prep,
            cfg.eta_meas,
            cfg.shots,
            chunk_rng(cfg.seed, u64::MAX - 2, tag).next_u64(),
        )
    };
    // A requested fidelity accuracy ε_F needs ε_p = ε_F d/(d−1) on p.
    let p_scale = df / (df - 1.0);
    let estimate = |m: RbModel, eps_f: f64, delta: f64| -> Result<FidelityEstimate> {
        if mode == SamplingMode::Analytic {
            return analytic_fidelity(&m);
        }
        let opts = EstimateOptions::new((eps_f * p_scale).min(0.999), delta);
        let mut src = RbSource::new(m, mode);
        estimate_fidelity_to_clifford(&mut src, &opts)
    };

    let count = combo.len();
    let eps_term = epsilon / combo.one_norm;
    let delta_term = delta / count as f64;
    let terms: Vec<FidelityEstimate> = combo
        .terms
        .par_iter()
        .enumerate()
        .map(|(i, t)| estimate(model(&e, &t.clifford, i as u64)?, eps_term, delta_term))
        .collect::<Result<_>>()?;
    let f_en = fidelity_from_combination(&terms, combo, d)?;
    let id = PauliLiouvilleMap::identity(cfg.n);
    let f_noise = estimate(model(&id, &CliffordElement::identity(cfg.n), u64::MAX)?, epsilon, delta)?;

    let range = |f: &FidelityEstimate| {
        let c = to_chi(f.f_hat, df);
        let w = (df + 1.0) / df * f.epsilon + ROUNDING_SLACK;
        ((c - w).clamp(0.0, 1.0), (c + w).clamp(0.0, 1.0))
    };
    let chi_interval = extremize(range(&f_en), range(&f_noise))?;
    let interval = if chi_interval.valid {
        Interval::new(to_fidelity(chi_interval.lo, df), to_fidelity(chi_interval.hi, df))
    } else {
        chi_interval
    };
    let confidence = if mode == SamplingMode::Analytic {
        1.0
    } else {
        1.0 - 2.0 * delta
    };
    Ok(NonCliffordBound {
        interval,
        chi_interval,
        f_en,
        f_noise,
        confidence,
        samples_used: f_en.samples_used + f_noise.samples_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::decompose_t;
    use crate::channel::{average_fidelity, pl_from_unitary, t_unitary};

    fn t_spec() -> ChannelSpec {
        ChannelSpec::Pl {
            matrix: crate::linalg::rmatrix_to_rows(pl_from_unitary(&t_unitary()).unwrap().matrix()),
        }
    }

    #[test]
    fn analytic_perfect_t() {
        let cfg = BoundConfig::new(t_spec(), ChannelSpec::identity(1));
        let b = bound_nonclifford_fidelity(&cfg, &decompose_t(), 0.02, 0.05, SamplingMode::Analytic).unwrap();
        assert!(b.interval.contains(1.0));
        assert!(b.interval.width() < 1e-6, "{:?}", b.interval);
    }

    #[test]
    fn analytic_noisy_t() {
        let cfg = BoundConfig::new(t_spec(), ChannelSpec::Depolarizing { delta: 0.99, qubits: 1 });
        let b = bound_nonclifford_fidelity(&cfg, &decompose_t(), 0.02, 0.05, SamplingMode::Analytic).unwrap();
        assert!(b.interval.contains(1.0), "{:?}", b.interval);
        let noise = make_channel(&cfg.noise_map).unwrap();
        let f_noise = average_fidelity(&noise, &PauliLiouvilleMap::identity(1)).unwrap();
        assert!((b.f_noise.f_hat - f_noise).abs() < 1e-12);
    }

    #[test]
    fn sampled_covers_truth() {
        let mut cfg = BoundConfig::new(t_spec(), ChannelSpec::Depolarizing { delta: 0.99, qubits: 1 });
        cfg.seed = 4;
        let b = bound_nonclifford_fidelity(&cfg, &decompose_t(), 0.05, 0.05, SamplingMode::Collapsed).unwrap();
        assert!(b.interval.contains(1.0), "{:?}", b.interval);
        assert!(b.samples_used > 0);
        assert!((b.confidence - 0.9).abs() < 1e-15);
    }
}
