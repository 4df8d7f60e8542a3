use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::hoeffding::{hoeffding_half_width, hoeffding_samples};
use super::{sample_collapsed, sample_sequences, Closing, RbConfig, RbModel, SamplingMode};
use crate::error::{Error, Result};

/// Longest sequence used to reach the decay floor before falling back to
/// randomly closed sequences.
pub const K_MAX: usize = 2048;

/// Residual `|p|^{k∞}` targeted when choosing the floor length.
const FLOOR_RESIDUAL: f64 = 1e-4;

/// Sequence family: the experiment itself, or the noise-only family used
/// to lower-bound `A₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Main,
    Aux,
}

/// Anything that can produce sample means of RB survival data.
pub trait DecaySource {
    fn dim(&self) -> usize;

    /// Mean of `m` independent sequence outcomes at length `k`.
    fn sample_mean(&mut self, family: Family, k: usize, m: u64) -> Result<f64>;

    /// Mean of `m` outcomes whose expectation is exactly `B₀`.
    fn sample_floor(&mut self, m: u64) -> Result<f64>;
}

/// Simulated RB experiment together with its noise-only family.
#[derive(Clone, Debug)]
pub struct RbSource {
    main: RbModel,
    aux: RbModel,
    mode: SamplingMode,
    calls: u64,
}

impl RbSource {
    pub fn new(main: RbModel, mode: SamplingMode) -> Self {
        let aux = main.aux();
        Self {
            main,
            aux,
            mode,
            calls: 0,
        }
    }

    pub fn from_config(cfg: &RbConfig, mode: SamplingMode) -> Result<Self> {
        Ok(Self::new(RbModel::from_config(cfg)?, mode))
    }

    pub fn model(&self) -> &RbModel {
        &self.main
    }

    fn next_stream(&mut self) -> u64 {
        self.calls += 1;
        // Disjoint from the per-length streams used by `simulate_f_k`.
        (1 << 40) + self.calls
    }

    fn draw(&mut self, family: Family, k: usize, closing: Closing, m: u64) -> f64 {
        let stream = self.next_stream();
        let model = match family {
            Family::Main => &self.main,
            Family::Aux => &self.aux,
        };
        match self.mode {
            SamplingMode::Analytic => model.exact_mean(k, closing),
            SamplingMode::Sequences => {
                sample_sequences(model, k, closing, m, model.shots(), stream).mean()
            }
            SamplingMode::Collapsed => {
                sample_collapsed(model.exact_mean(k, closing), m, model.seed(), stream).mean()
            }
        }
    }
}

impl DecaySource for RbSource {
    fn dim(&self) -> usize {
        self.main.dim()
    }

    fn sample_mean(&mut self, family: Family, k: usize, m: u64) -> Result<f64> {
        Ok(self.draw(family, k, Closing::Inverse, m))
    }

    fn sample_floor(&mut self, m: u64) -> Result<f64> {
        Ok(self.draw(Family::Main, 0, Closing::Random, m))
    }
}

/// `A₀ pᵏ + B₀` curves for both families, exact or with single-shot noise.
#[derive(Clone, Debug)]
pub struct SyntheticDecay {
    pub d: usize,
    pub a0: f64,
    pub b0: f64,
    pub p_main: f64,
    pub p_aux: f64,
    rng: Option<ChaCha8Rng>,
}

impl SyntheticDecay {
    pub fn exact(d: usize, a0: f64, b0: f64, p_main: f64, p_aux: f64) -> Self {
        Self {
            d,
            a0,
            b0,
            p_main,
            p_aux,
            rng: None,
        }
    }

    /// Means are averages of `m` ±1 outcomes.
    pub fn sampled(d: usize, a0: f64, b0: f64, p_main: f64, p_aux: f64, seed: u64) -> Self {
        Self {
            rng: Some(ChaCha8Rng::seed_from_u64(seed)),
            ..Self::exact(d, a0, b0, p_main, p_aux)
        }
    }

    fn observe(&mut self, mean: f64, m: u64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&mean) {
            return Err(Error::out_of_range("synthetic survival", mean, "[-1, 1]"));
        }
        Ok(match &mut self.rng {
            None => mean,
            Some(rng) => {
                let ones = Binomial::new(m, (1.0 + mean) / 2.0)
                    .expect("valid probability")
                    .sample(rng);
                2.0 * ones as f64 / m as f64 - 1.0
            }
        })
    }
}

impl DecaySource for SyntheticDecay {
    fn dim(&self) -> usize {
        self.d
    }

    fn sample_mean(&mut self, family: Family, k: usize, m: u64) -> Result<f64> {
        let p = match family {
            Family::Main => self.p_main,
            Family::Aux => self.p_aux,
        };
        self.observe(self.a0 * p.powi(k as i32) + self.b0, m)
    }

    fn sample_floor(&mut self, m: u64) -> Result<f64> {
        self.observe(self.b0, m)
    }
}

/// How `F_∞` is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorMethod {
    /// Long sequences of length `k∞` chosen from a pilot estimate of `|p|`,
    /// falling back to `RandomClosing` when `k∞` would exceed [`K_MAX`].
    LongSequence,
    /// Length-0 sequences closed by a uniformly random Clifford.
    RandomClosing,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub epsilon: f64,
    pub delta: f64,
    /// Upper limit on the total number of sequences.
    pub max_samples: u64,
    /// Share of the auxiliary-stage sample size used per pilot point.
    pub pilot_fraction: f64,
    pub floor: FloorMethod,
}

impl EstimateOptions {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            max_samples: 10_000_000_000,
            pilot_fraction: 0.1,
            floor: FloorMethod::LongSequence,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PEstimate {
    pub p_hat: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub a_lower: f64,
    pub clamped_to_zero: bool,
    pub samples_used: u64,
    pub f1: f64,
    pub f2: f64,
    pub f_inf: f64,
    /// Floor sequence length, absent when randomly closed sequences were used.
    pub k_inf: Option<usize>,
    /// Accuracy `ε′` of each survival estimate in the main stage.
    pub epsilon_prime: f64,
    /// Range of `(F₂ − F_∞)/(F₁ − F_∞)` over the `±ε′` boxes, or `[−ε, ε]`
    /// when clamped.
    pub p_interval: (f64, f64),
}

/// Average fidelity with its `(ε, δ)` confidence metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub f_hat: f64,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub samples_used: u64,
}

impl FidelityEstimate {
    /// Converts a decay estimate with `F = ((d−1)p + 1)/d`.
    pub fn from_p(p: &PEstimate, d: usize) -> Self {
        let d = d as f64;
        Self {
            f_hat: ((d - 1.0) * p.p_hat + 1.0) / d,
            epsilon: (d - 1.0) / d * p.epsilon,
            delta: p.delta,
            samples_used: p.samples_used,
        }
    }

    pub fn exact(f_hat: f64) -> Self {
        Self {
            f_hat,
            epsilon: 0.0,
            delta: 0.0,
            samples_used: 0,
        }
    }
}

struct Ledger {
    used: u64,
    limit: u64,
}

impl Ledger {
    fn reserve(&self, extra: u64) -> Result<()> {
        let needed = self.used.saturating_add(extra);
        if needed > self.limit {
            return Err(Error::BudgetExceeded {
                needed,
                limit: self.limit,
            });
        }
        Ok(())
    }

    fn mean<S: DecaySource + ?Sized>(&mut self, src: &mut S, f: Family, k: usize, m: u64) -> Result<f64> {
        self.used += m;
        src.sample_mean(f, k, m)
    }

    fn floor<S: DecaySource + ?Sized>(&mut self, src: &mut S, k_inf: Option<usize>, m: u64) -> Result<f64> {
        self.used += m;
        match k_inf {
            Some(k) => src.sample_mean(Family::Main, k, m),
            None => src.sample_floor(m),
        }
    }
}

/// Rough `|p|` from three pilot points, `1` when the first difference is
/// not resolved.
fn rough_decay(f: [f64; 3], half_width: f64) -> f64 {
    let d1 = f[1] - f[0];
    if d1.abs() <= 2.0 * half_width {
        return 1.0;
    }
    ((f[2] - f[1]) / d1).abs().min(1.0)
}

fn floor_length(p_abs: f64) -> Option<usize> {
    if p_abs >= 1.0 - 1e-12 {
        return None;
    }
    let k = if p_abs <= 0.0 {
        3
    } else {
        (FLOOR_RESIDUAL.ln() / p_abs.ln()).ceil().max(3.0) as usize
    };
    (k <= K_MAX).then_some(k)
}

/// Estimates the decay parameter `p` from sequences of length 1 and 2.
///
/// `F₁`, `F₂` and `F_∞` are each estimated to accuracy `ε′` with failure
/// probability `δ′ = δ/6`, and `p̃ = (F₂ − F_∞)/(F₁ − F_∞)`. The accuracy
/// `ε′ = 4ε²a` depends on a lower bound `a ≤ A₀`, obtained from the
/// noise-only family as `a = (|F′₁ − F_∞| − 2ε′_A)² / (|F′₂ − F_∞| + 2ε′_A)`
/// with `ε′_A = 4ε²`. If `(|F₁ − F_∞| + 2ε′)/a ≤ ε` the signal is too small
/// to resolve and `p̃` is clamped to 0. Negative `p` is handled through
/// magnitudes, the sign coming from the ratio itself.
pub fn estimate_p<S: DecaySource + ?Sized>(source: &mut S, opts: &EstimateOptions) -> Result<PEstimate> {
    let eps = opts.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::out_of_range("epsilon", eps, "(0, 1)"));
    }
    if !(opts.delta > 0.0 && opts.delta < 1.0) {
        return Err(Error::out_of_range("delta", opts.delta, "(0, 1)"));
    }
    if !(opts.pilot_fraction > 0.0 && opts.pilot_fraction <= 1.0) {
        return Err(Error::out_of_range("pilot_fraction", opts.pilot_fraction, "(0, 1]"));
    }
    let dp = opts.delta / 6.0;
    let mut ledger = Ledger {
        used: 0,
        limit: opts.max_samples,
    };

    let eps_a = 4.0 * eps * eps;
    let m_a = hoeffding_samples(eps_a, dp);
    ledger.reserve(m_a.saturating_mul(3))?;

    let k_inf = match opts.floor {
        FloorMethod::RandomClosing => None,
        FloorMethod::LongSequence => {
            let m_pilot = ((opts.pilot_fraction * m_a as f64).ceil() as u64).max(1);
            ledger.reserve(m_pilot.saturating_mul(6).saturating_add(m_a.saturating_mul(3)))?;
            let half = hoeffding_half_width(m_pilot, dp);
            let mut p_max: f64 = 0.0;
            for family in [Family::Main, Family::Aux] {
                let mut f = [0.0; 3];
                for (i, v) in f.iter_mut().enumerate() {
                    *v = ledger.mean(source, family, i + 1, m_pilot)?;
                }
                p_max = p_max.max(rough_decay(f, half));
            }
            let k = floor_length(p_max);
            log::debug!("pilot |p| ≈ {p_max:.4}, floor length {k:?}");
            k
        }
    };

    ledger.reserve(m_a.saturating_mul(3))?;
    let f1_aux = ledger.mean(source, Family::Aux, 1, m_a)?;
    let f2_aux = ledger.mean(source, Family::Aux, 2, m_a)?;
    let mut f_inf = ledger.floor(source, k_inf, m_a)?;

    let lead = (f1_aux - f_inf).abs() - 2.0 * eps_a;
    if lead <= 0.0 {
        return Err(Error::Divergent(format!(
            "noise-only decay |F'1 - F_inf| = {:.3e} is within 2ε' = {:.3e} of zero; no lower bound on A0",
            (f1_aux - f_inf).abs(),
            2.0 * eps_a
        )));
    }
    let a = lead * lead / ((f2_aux - f_inf).abs() + 2.0 * eps_a);

    let eps_p = 4.0 * eps * eps * a;
    let m = hoeffding_samples(eps_p, dp);
    let refresh_floor = m > m_a;
    ledger.reserve(m.saturating_mul(if refresh_floor { 3 } else { 2 }))?;
    if refresh_floor {
        f_inf = ledger.floor(source, k_inf, m)?;
    }
    let f1 = ledger.mean(source, Family::Main, 1, m)?;
    let f2 = ledger.mean(source, Family::Main, 2, m)?;
    log::debug!("a = {a:.4}, ε' = {eps_p:.3e}, m = {m}, F1 = {f1}, F2 = {f2}, F_inf = {f_inf}");

    let den = f1 - f_inf;
    let num = f2 - f_inf;
    let mut out = PEstimate {
        p_hat: 0.0,
        epsilon: eps,
        delta: opts.delta,
        a_lower: a,
        clamped_to_zero: false,
        samples_used: ledger.used,
        f1,
        f2,
        f_inf,
        k_inf,
        epsilon_prime: eps_p,
        p_interval: (-eps, eps),
    };
    if (den.abs() + 2.0 * eps_p) / a <= eps {
        out.clamped_to_zero = true;
        return Ok(out);
    }
    if den.abs() <= 2.0 * eps_p {
        return Err(Error::Divergent(format!(
            "|F1 - F_inf| = {:.3e} is within 2ε' = {:.3e} of zero but the guard did not fire",
            den.abs(),
            2.0 * eps_p
        )));
    }
    out.p_hat = num / den;
    let w = 2.0 * eps_p;
    let corners = [
        (num - w) / (den - w),
        (num - w) / (den + w),
        (num + w) / (den - w),
        (num + w) / (den + w),
    ];
    out.p_interval = (
        corners.iter().copied().fold(f64::INFINITY, f64::min),
        corners.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(out)
}

/// Estimates `F̄(E∘N, U) = ((d−1)p̃ + 1)/d`.
pub fn estimate_fidelity_to_clifford<S: DecaySource + ?Sized>(
    source: &mut S,
    opts: &EstimateOptions,
) -> Result<FidelityEstimate> {
    let p = estimate_p(source, opts)?;
    Ok(FidelityEstimate::from_p(&p, source.dim()))
}
