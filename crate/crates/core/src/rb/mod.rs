//! Randomized-benchmarking simulation and decay estimation.
//!
//! A length-`k` sequence applies
//!
//! ```text
//! N∘C_inv ∘ E∘N∘C_k ∘ … ∘ E∘N∘C_1
//! ```
//!
//! to the prepared state, where the `C_i` are uniform Cliffords, `N` is the
//! noise of every randomizing operation, `E` is the map under test and
//! `C_inv = (U C_k ⋯ U C_1)⁻¹` undoes the ideal sequence for the target
//! Clifford `U`. Averaged over the `C_i`, the survival decays as
//! `A₀ pᵏ + B₀` with `p = (tr[U† E N] − 1)/(d² − 1)`.

mod estimate;
mod fit;
mod hoeffding;
pub mod twirl;

pub use estimate::{
    estimate_fidelity_to_clifford, estimate_p, DecaySource, EstimateOptions, Family,
    FidelityEstimate, FloorMethod, PEstimate, RbSource, SyntheticDecay, K_MAX,
};
pub use fit::{fit_decay, DecayFit};
pub use hoeffding::{hoeffding_half_width, hoeffding_samples};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{compose, make_channel, ChannelSpec, PauliLiouvilleMap};
use crate::clifford::{sample_uniform_clifford, single_qubit_table, CliffordElement};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::pauli::{basis_size, PauliLetter, PauliOperator, MAX_DENSE_QUBITS};

/// Sequences simulated per parallel work unit.
const CHUNK: u64 = 2048;

fn one() -> u64 {
    1
}

fn identity_spec() -> ChannelSpec {
    ChannelSpec::identity(1)
}

/// Description of an RB experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RbConfig {
    pub n: usize,
    /// Map under test, applied after each randomizing operation.
    pub e_map: ChannelSpec,
    /// Noise of every randomizing operation, `N∘C_i`.
    #[serde(default = "identity_spec")]
    pub noise_map: ChannelSpec,
    /// Ideal Clifford the map under test is compared against.
    pub target: CliffordElement,
    /// Depolarizing error of the `|0…0⟩` preparation.
    #[serde(default)]
    pub eta_prep: f64,
    /// Bit-flip probability of the `Z⊗…⊗Z` readout.
    #[serde(default)]
    pub eta_meas: f64,
    #[serde(default = "one")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
}

impl RbConfig {
    pub fn new(e_map: ChannelSpec, noise_map: ChannelSpec, target: CliffordElement) -> Self {
        Self {
            n: target.num_qubits(),
            e_map,
            noise_map,
            target,
            eta_prep: 0.0,
            eta_meas: 0.0,
            shots: 1,
            seed: 0,
        }
    }
}

/// How survival probabilities are turned into data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Exact sequence-averaged expectations, no sampling noise.
    Analytic,
    /// Explicit random sequences with shot noise on each.
    Sequences,
    /// Single-shot sequences drawn as one binomial from the exact average.
    /// Equal in distribution to `Sequences` with one shot per sequence.
    Collapsed,
}

/// Which final operation closes a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closing {
    /// The ideal inverse, giving `A₀ pᵏ + B₀`.
    Inverse,
    /// A fresh uniform Clifford, whose average is exactly `B₀`.
    Random,
}

/// A designed sequence: randomizing Cliffords and the closing element.
#[derive(Clone, Debug)]
pub struct RbSequence {
    pub cliffords: Vec<CliffordElement>,
    pub closing: CliffordElement,
}

/// Draws `C_1…C_k` and the inverse of the ideal sequence `U C_k ⋯ U C_1`.
pub fn design_sequence<R: Rng + ?Sized>(
    k: usize,
    target: &CliffordElement,
    rng: &mut R,
) -> Result<RbSequence> {
    if k == 0 {
        return Err(Error::Invalid("sequence length must be at least 1".into()));
    }
    let n = target.num_qubits();
    let mut ideal = CliffordElement::identity(n);
    let cliffords: Vec<CliffordElement> = (0..k)
        .map(|_| {
            let c = sample_uniform_clifford(n, rng);
            ideal = target.compose_unchecked(&c.compose_unchecked(&ideal));
            c
        })
        .collect();
    Ok(RbSequence {
        cliffords,
        closing: ideal.inverse(),
    })
}

/// Precomputed linear-algebra form of an [`RbConfig`].
#[derive(Clone, Debug)]
pub struct RbModel {
    n: usize,
    e: PauliLiouvilleMap,
    noise: PauliLiouvilleMap,
    target: CliffordElement,
    eta_prep: f64,
    eta_meas: f64,
    shots: u64,
    seed: u64,
    en: RMatrix,
    rho: Vec<f64>,
    // Measurement weights m_j / d, so ⟨M⟩ = Σ_j w_j v_j.
    weights: Vec<f64>,
    fast: Option<SingleQubitFast>,
}

#[derive(Clone, Debug)]
struct SingleQubitFast {
    target_id: usize,
    en: [[f64; 4]; 4],
    noise: [[f64; 4]; 4],
}

fn to4(m: &RMatrix) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            *v = m[(r, col)];
        }
    }
    out
}

#[inline]
fn mul4(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
    }
    out
}

fn check_qubits(what: &str, m: &PauliLiouvilleMap, n: usize) -> Result<()> {
    if m.num_qubits() != n {
        return Err(Error::Invalid(format!(
            "{what} acts on {} qubits, experiment has {n}",
            m.num_qubits()
        )));
    }
    Ok(())
}

impl RbModel {
    pub fn from_config(cfg: &RbConfig) -> Result<Self> {
        let e = make_channel(&cfg.e_map)?;
        let noise = make_channel(&cfg.noise_map)?;
        Self::new(e, noise, cfg.target.clone(), cfg.eta_prep, cfg.eta_meas, cfg.shots, cfg.seed)
    }

    pub fn new(
        e: PauliLiouvilleMap,
        noise: PauliLiouvilleMap,
        target: CliffordElement,
        eta_prep: f64,
        eta_meas: f64,
        shots: u64,
        seed: u64,
    ) -> Result<Self> {
        let n = target.num_qubits();
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                n,
                max: MAX_DENSE_QUBITS,
            });
        }
        check_qubits("map under test", &e, n)?;
        check_qubits("noise map", &noise, n)?;
        if !(0.0..1.0).contains(&eta_prep) {
            return Err(Error::out_of_range("eta_prep", eta_prep, "[0, 1)"));
        }
        if !(0.0..=1.0).contains(&eta_meas) || eta_meas == 0.5 {
            return Err(Error::out_of_range("eta_meas", eta_meas, "[0, 1] without 0.5"));
        }
        if shots == 0 {
            return Err(Error::Invalid("shots must be at least 1".into()));
        }
        let size = basis_size(n);
        let d = (1usize << n) as f64;
        // ρ₀ = (1−η)|0…0⟩⟨0…0| + η 𝕀/d has r_k = 1−η on Z-type Paulis.
        let rho: Vec<f64> = (0..size)
            .map(|i| {
                let p = PauliOperator::from_index(i, n).expect("in range");
                if i == 0 {
                    1.0
                } else if p.x_bits() == 0 {
                    1.0 - eta_prep
                } else {
                    0.0
                }
            })
            .collect();
        let zz = (0..n).fold(0usize, |acc, _| (acc << 2) | PauliLetter::Z.digit());
        let mut weights = vec![0.0; size];
        // Assignment errors shrink Z⊗…⊗Z to (1−2η)Z⊗…⊗Z; m_j = d(1−2η)δ_{j,ZZ}.
        weights[zz] = 1.0 - 2.0 * eta_meas;
        debug_assert!((weights[zz] * d / d - (1.0 - 2.0 * eta_meas)).abs() < 1e-15);
        let en = compose(&e, &noise)?.into_matrix();
        let fast = if n == 1 {
            Some(SingleQubitFast {
                target_id: single_qubit_table()
                    .id_of(&target)
                    .expect("every single-qubit Clifford is tabulated"),
                en: to4(&en),
                noise: to4(noise.matrix()),
            })
        } else {
            None
        };
        Ok(Self {
            n,
            e,
            noise,
            target,
            eta_prep,
            eta_meas,
            shots,
            seed,
            en,
            rho,
            weights,
            fast,
        })
    }

    /// The noise-only family (`E = 𝕀`, `U = 𝕀`) with the same SPAM and noise.
    pub fn aux(&self) -> Self {
        Self::new(
            PauliLiouvilleMap::identity(self.n),
            self.noise.clone(),
            CliffordElement::identity(self.n),
            self.eta_prep,
            self.eta_meas,
            self.shots,
            self.seed,
        )
        .expect("validated parameters")
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn target(&self) -> &CliffordElement {
        &self.target
    }

    pub fn e_map(&self) -> &PauliLiouvilleMap {
        &self.e
    }

    pub fn noise_map(&self) -> &PauliLiouvilleMap {
        &self.noise
    }

    /// `Λ = E∘N∘U⁻¹`, whose twirl drives the decay.
    pub fn lambda(&self) -> RMatrix {
        let u = self.target.pl().expect("dense target").matrix();
        &self.en * u.transpose()
    }

    /// `p = (tr Λ − Λ_00)/(d² − 1)`.
    pub fn decay_parameter(&self) -> f64 {
        let l = self.lambda();
        (l.trace() - l[(0, 0)]) / (l.nrows() as f64 - 1.0)
    }

    fn bracket(&self, m: &RMatrix) -> f64 {
        let v = m * nalgebra::DVector::from_column_slice(&self.rho);
        let v = self.noise.matrix() * v;
        v.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }

    /// `(A₀, B₀)` with `A₀ = ⟨M|N Q⊥|ρ⟩`, `B₀ = ⟨M|N Q|ρ⟩`.
    pub fn spam_constants(&self) -> (f64, f64) {
        let size = self.rho.len();
        let mut q = RMatrix::zeros(size, size);
        q[(0, 0)] = 1.0;
        let qperp = RMatrix::identity(size, size) - &q;
        (self.bracket(&qperp), self.bracket(&q))
    }

    /// Sequence-averaged survival `⟨M|N Tw(Λ)ᵏ|ρ⟩` from the explicit twirl.
    pub fn exact_f_k(&self, k: usize) -> f64 {
        let tw = twirl::clifford_twirl(&self.lambda());
        let size = tw.nrows();
        let mut power = RMatrix::identity(size, size);
        let mut base = tw;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                power = &power * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        self.bracket(&power)
    }

    /// `A₀ pᵏ + B₀`.
    pub fn model_f_k(&self, k: usize) -> f64 {
        let (a0, b0) = self.spam_constants();
        a0 * self.decay_parameter().powi(k as i32) + b0
    }

    /// Exact `⟨M⟩` for one designed sequence.
    pub fn survival_expectation(&self, seq: &RbSequence) -> f64 {
        let size = self.rho.len();
        let mut v = self.rho.clone();
        let mut tmp = vec![0.0; size];
        let en = &self.en;
        for c in &seq.cliffords {
            c.signed_permutation().apply(&v, &mut tmp);
            for (j, out) in v.iter_mut().enumerate() {
                *out = (0..size).map(|i| en[(j, i)] * tmp[i]).sum();
            }
        }
        seq.closing.signed_permutation().apply(&v, &mut tmp);
        let noise = self.noise.matrix();
        (0..size)
            .map(|j| {
                let row: f64 = (0..size).map(|i| noise[(j, i)] * tmp[i]).sum();
                row * self.weights[j]
            })
            .sum()
    }

    /// Survival of one freshly drawn sequence.
    pub fn random_survival<R: Rng + ?Sized>(&self, k: usize, closing: Closing, rng: &mut R) -> f64 {
        if let Some(fast) = &self.fast {
            return self.random_survival_single(fast, k, closing, rng);
        }
        let n = self.n;
        let size = self.rho.len();
        let mut v = self.rho.clone();
        let mut tmp = vec![0.0; size];
        let mut ideal = CliffordElement::identity(n);
        for _ in 0..k {
            let c = sample_uniform_clifford(n, rng);
            c.signed_permutation().apply(&v, &mut tmp);
            for (j, out) in v.iter_mut().enumerate() {
                *out = (0..size).map(|i| self.en[(j, i)] * tmp[i]).sum();
            }
            if closing == Closing::Inverse {
                ideal = self.target.compose_unchecked(&c.compose_unchecked(&ideal));
            }
        }
        let last = match closing {
            Closing::Inverse => ideal.inverse(),
            Closing::Random => sample_uniform_clifford(n, rng),
        };
        last.signed_permutation().apply(&v, &mut tmp);
        let noise = self.noise.matrix();
        (0..size)
            .map(|j| {
                let row: f64 = (0..size).map(|i| noise[(j, i)] * tmp[i]).sum();
                row * self.weights[j]
            })
            .sum()
    }

    fn random_survival_single<R: Rng + ?Sized>(
        &self,
        fast: &SingleQubitFast,
        k: usize,
        closing: Closing,
        rng: &mut R,
    ) -> f64 {
        let t = single_qubit_table();
        let mut v = [self.rho[0], self.rho[1], self.rho[2], self.rho[3]];
        let mut ideal = 0usize;
        for _ in 0..k {
            let c = rng.random_range(0..24);
            v = mul4(&fast.en, &mul4(t.pl(c), &v));
            ideal = t.mul(fast.target_id, t.mul(c, ideal));
        }
        let last = match closing {
            Closing::Inverse => t.inverse(ideal),
            Closing::Random => rng.random_range(0..24),
        };
        let v = mul4(&fast.noise, &mul4(t.pl(last), &v));
        v.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }

    /// Sequence-averaged expectation for `closing`.
    pub fn exact_mean(&self, k: usize, closing: Closing) -> f64 {
        match closing {
            Closing::Inverse => self.exact_f_k(k),
            Closing::Random => self.spam_constants().1,
        }
    }
}

/// Accumulated statistics of per-sequence means.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    fn merge(self, o: Self) -> Self {
        Self {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sumsq: self.sumsq + o.sumsq,
        }
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let var = ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Independent generator for work unit `chunk` of stream `stream`.
pub fn chunk_rng(seed: u64, stream: u64, chunk: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&chunk.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn shot_mean<R: Rng + ?Sized>(expectation: f64, shots: u64, rng: &mut R) -> f64 {
    let prob = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
    let ones = Binomial::new(shots, prob).expect("valid probability").sample(rng);
    2.0 * ones as f64 / shots as f64 - 1.0
}

/// Mean of `m` per-sequence shot averages at length `k`, plus moments.
fn sample_sequences(
    model: &RbModel,
    k: usize,
    closing: Closing,
    m: u64,
    shots: u64,
    stream: u64,
) -> Moments {
    let chunks = m.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(model.seed, stream, chunk);
            let count = CHUNK.min(m - chunk * CHUNK);
            let mut mom = Moments::default();
            for _ in 0..count {
                let e = model.random_survival(k, closing, &mut rng);
                mom.push(shot_mean(e, shots, &mut rng));
            }
            mom
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge)
}

fn sample_collapsed(mean: f64, m: u64, seed: u64, stream: u64) -> Moments {
    let mut rng = chunk_rng(seed, stream, 0);
    let prob = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
    let ones = Binomial::new(m, prob).expect("valid probability").sample(&mut rng) as f64;
    let zeros = m as f64 - ones;
    Moments {
        count: m,
        sum: ones - zeros,
        sumsq: m as f64,
    }
}

/// One row of a decay curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n_sequences: u64,
    pub shots: u64,
}

/// Estimates `F_k` from `n_sequences` random sequences.
///
/// `Sequences` simulates each sequence and draws `shots` outcomes from its
/// exact expectation; `Collapsed` draws `n_sequences·shots` single-shot
/// sequences at once; `Analytic` returns the exact average.
pub fn simulate_f_k(
    model: &RbModel,
    k: usize,
    n_sequences: u64,
    mode: SamplingMode,
) -> Result<DecayRecord> {
    if k == 0 || n_sequences == 0 {
        return Err(Error::Invalid("k and n_sequences must be positive".into()));
    }
    let stream = k as u64;
    let shots = model.shots;
    Ok(match mode {
        SamplingMode::Analytic => DecayRecord {
            k,
            mean: model.exact_f_k(k),
            stderr: 0.0,
            n_sequences,
            shots,
        },
        SamplingMode::Sequences => {
            let mom = sample_sequences(model, k, Closing::Inverse, n_sequences, shots, stream);
            DecayRecord {
                k,
                mean: mom.mean(),
                stderr: mom.stderr(),
                n_sequences,
                shots,
            }
        }
        SamplingMode::Collapsed => {
            let total = n_sequences * shots;
            let mom = sample_collapsed(model.exact_f_k(k), total, model.seed, stream);
            DecayRecord {
                k,
                mean: mom.mean(),
                stderr: mom.stderr(),
                n_sequences: total,
                shots: 1,
            }
        }
    })
}
