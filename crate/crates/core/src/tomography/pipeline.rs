//! RB fidelities to a spanning Clifford set, reconstruction of `(E∘N)′`
//! and `N′`, and deconvolution.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    cp_witness_single_qubit, deconvolve_noise, inversion_conditioning, reconstruct_unital, Conditioning,
    CpWitness, DeconvolveOptions, FidelityEntry, FidelitySet,
};
use crate::channel::{
    fidelity_from_decay, is_cptp, make_channel, ChannelSpec, CptpVerdict, PauliLiouvilleMap, CP_TOL,
};
use crate::clifford::{greedy_spanning_set, single_qubit_cliffords, spanning_set_single_qubit, CliffordElement};
use crate::error::{Error, Result};
use crate::rb::{
    chunk_rng, estimate_fidelity_to_clifford, hoeffding_half_width, DecaySource, EstimateOptions, Family,
    FidelityEstimate, RbModel, RbSource, SamplingMode,
};

fn identity_spec() -> ChannelSpec {
    ChannelSpec::identity(1)
}

fn default_delta() -> f64 {
    0.05
}

fn collapsed() -> SamplingMode {
    SamplingMode::Collapsed
}

/// How each Clifford fidelity is obtained from RB data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FidelityMethod {
    /// Exact sequence averages.
    Analytic,
    /// Every family measures `F₁` with `samples` sequences; `B₀` and `A₀`,
    /// which do not depend on the family, are measured once and shared, so
    /// `p_i = (F₁,ᵢ − B₀)/A₀`.
    SharedSpam {
        samples: u64,
        #[serde(default = "collapsed")]
        mode: SamplingMode,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    /// Independent `(ε, δ)` decay estimates per family.
    Guarded {
        epsilon: f64,
        delta: f64,
        #[serde(default = "collapsed")]
        mode: SamplingMode,
    },
}

/// One reconstruction experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n: usize,
    pub e_map: ChannelSpec,
    #[serde(default = "identity_spec")]
    pub noise_map: ChannelSpec,
    #[serde(default)]
    pub eta_prep: f64,
    #[serde(default)]
    pub eta_meas: f64,
    /// Cliffords to benchmark against; a default spanning set when absent.
    #[serde(default)]
    pub cliffords: Option<Vec<CliffordElement>>,
    pub method: FidelityMethod,
    #[serde(default = "one")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deconvolve: Option<DeconvolveOptions>,
}

fn one() -> u64 {
    1
}

impl PipelineConfig {
    pub fn new(e_map: ChannelSpec, noise_map: ChannelSpec, method: FidelityMethod) -> Self {
        Self {
            n: 1,
            e_map,
            noise_map,
            eta_prep: 0.0,
            eta_meas: 0.0,
            cliffords: None,
            method,
            shots: 1,
            seed: 0,
            deconvolve: None,
        }
    }
}

/// `C₀…C₉` for exact single-qubit data, all 24 Cliffords when the data are
/// noisy, and a greedily drawn spanning set for two qubits.
pub fn default_clifford_set(n: usize, exact: bool, seed: u64) -> Result<Vec<CliffordElement>> {
    match n {
        1 if exact => Ok(spanning_set_single_qubit()),
        1 => Ok(single_qubit_cliffords()),
        2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            greedy_spanning_set(2, &mut rng, 100_000)
        }
        _ => Err(Error::TooManyQubits { n, max: 2 }),
    }
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    chunk_rng(seed, u64::MAX - 1, tag).next_u64()
}

/// Fidelity data for `E∘N` and `N` to the same Cliffords.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FidelitySets {
    pub en: FidelitySet,
    pub noise: FidelitySet,
    /// Shared `(A₀, B₀)` estimates, when the method uses them.
    pub spam: Option<(f64, f64)>,
    pub samples_used: u64,
}

struct Builder<'a> {
    cfg: &'a PipelineConfig,
    e: PauliLiouvilleMap,
    noise: PauliLiouvilleMap,
}

impl Builder<'_> {
    fn model(&self, e: &PauliLiouvilleMap, target: &CliffordElement, tag: u64) -> Result<RbModel> {
        RbModel::new(
            e.clone(),
            self.noise.clone(),
            target.clone(),
            self.cfg.eta_prep,
            self.cfg.eta_meas,
            self.cfg.shots,
            derive_seed(self.cfg.seed, tag),
        )
    }
}

pub fn estimate_fidelity_sets(cfg: &PipelineConfig) -> Result<FidelitySets> {
    let e = make_channel(&cfg.e_map)?;
    let noise = make_channel(&cfg.noise_map)?;
    for m in [&e, &noise] {
        if m.num_qubits() != cfg.n {
            return Err(Error::Invalid(format!(
                "map acts on {} qubits, configuration has {}",
                m.num_qubits(),
                cfg.n
            )));
        }
    }
    let exact = matches!(cfg.method, FidelityMethod::Analytic);
    let cliffords = match &cfg.cliffords {
        Some(c) => c.clone(),
        None => default_clifford_set(cfg.n, exact, cfg.seed)?,
    };
    let b = Builder { cfg, e, noise };
    let id = PauliLiouvilleMap::identity(cfg.n);
    let d = 1usize << cfg.n;
    let count = cliffords.len() as u64;

    let mut used = 0u64;
    let mut spam = None;
    let mut estimates: Vec<[FidelityEstimate; 2]> = Vec::with_capacity(cliffords.len());

    match cfg.method {
        FidelityMethod::Analytic | FidelityMethod::SharedSpam { .. } => {
            let (m, mode, delta) = match cfg.method {
                FidelityMethod::SharedSpam { samples, mode, delta } => {
                    if samples == 0 {
                        return Err(Error::Invalid("samples must be at least 1".into()));
                    }
                    if !(delta > 0.0 && delta < 1.0) {
                        return Err(Error::out_of_range("delta", delta, "(0, 1)"));
                    }
                    (samples, mode, delta)
                }
                _ => (1, SamplingMode::Analytic, 0.0),
            };
            let mut base = RbSource::new(
                b.model(&id, &CliffordElement::identity(cfg.n), u64::MAX)?,
                mode,
            );
            let b0 = base.sample_floor(m)?;
            let f1 = base.sample_mean(Family::Main, 1, m)?;
            let f2 = base.sample_mean(Family::Main, 2, m)?;
            used += 3 * m;
            if (f2 - b0).abs() < 1e-12 {
                return Err(Error::Divergent(
                    "noise-only decay vanishes at length 2; A0 cannot be estimated".into(),
                ));
            }
            let a0 = (f1 - b0).powi(2) / (f2 - b0);
            if a0.abs() < 1e-12 {
                return Err(Error::Divergent("estimated A0 vanishes".into()));
            }
            spam = Some((a0, b0));
            // Nominal accuracy of each fidelity: the F₁ and B₀ errors over A₀.
            let (eps_f, delta_entry) = if mode == SamplingMode::Analytic {
                (0.0, 0.0)
            } else {
                let dp = delta / (2 * count + 3) as f64;
                let h = hoeffding_half_width(m, dp);
                ((d - 1) as f64 / d as f64 * 2.0 * h / a0.abs(), delta)
            };
            for (i, c) in cliffords.iter().enumerate() {
                let mut pair = [FidelityEstimate::exact(0.0); 2];
                for (slot, map) in [&b.e, &id].into_iter().enumerate() {
                    let mut src = RbSource::new(b.model(map, c, 2 * i as u64 + slot as u64)?, mode);
                    let f1 = src.sample_mean(Family::Main, 1, m)?;
                    used += m;
                    pair[slot] = FidelityEstimate {
                        f_hat: fidelity_from_decay((f1 - b0) / a0, d),
                        epsilon: eps_f,
                        delta: delta_entry,
                        samples_used: m,
                    };
                }
                estimates.push(pair);
            }
            if mode == SamplingMode::Analytic {
                used = 0;
            }
        }
        FidelityMethod::Guarded { epsilon, delta, mode } => {
            let opts = EstimateOptions::new(epsilon, delta);
            for (i, c) in cliffords.iter().enumerate() {
                let mut pair = [FidelityEstimate::exact(0.0); 2];
                for (slot, map) in [&b.e, &id].into_iter().enumerate() {
                    let mut src = RbSource::new(b.model(map, c, 2 * i as u64 + slot as u64)?, mode);
                    pair[slot] = estimate_fidelity_to_clifford(&mut src, &opts)?;
                    used += pair[slot].samples_used;
                }
                estimates.push(pair);
            }
        }
    }

    let set = |slot: usize| FidelitySet {
        n: cfg.n,
        entries: cliffords
            .iter()
            .zip(&estimates)
            .map(|(c, pair)| FidelityEntry {
                clifford: c.clone(),
                estimate: pair[slot],
            })
            .collect(),
    };
    Ok(FidelitySets {
        en: set(0),
        noise: set(1),
        spam,
        samples_used: used,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub en_prime: PauliLiouvilleMap,
    pub n_prime: PauliLiouvilleMap,
    pub e_prime: PauliLiouvilleMap,
    pub residuals: Residuals,
    pub kappa: f64,
    pub conditioning: Conditioning,
    /// Canonical-form CP test, single qubit only.
    pub cp_witness: Option<CpWitness>,
    pub choi: CptpVerdict,
    pub spam: Option<(f64, f64)>,
    pub samples_used: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Residuals {
    pub en: Vec<f64>,
    pub noise: Vec<f64>,
    pub en_norm: f64,
    pub noise_norm: f64,
    pub consistent: bool,
}

/// Full pipeline: RB fidelities, both reconstructions, deconvolution and
/// CP checks of the result.
pub fn reconstruct_from_rb(cfg: &PipelineConfig) -> Result<ReconstructionReport> {
    let sets = estimate_fidelity_sets(cfg)?;
    let en = reconstruct_unital(&sets.en)?;
    let nn = reconstruct_unital(&sets.noise)?;
    let d = (1usize << cfg.n) as f64;
    // Perturbation of N′ implied by the fidelity accuracies: each equation's
    // right-hand side is known to d(d+1)ε.
    let eps_max = sets
        .noise
        .entries
        .iter()
        .map(|e| e.estimate.epsilon)
        .fold(0.0, f64::max);
    let conditioning = inversion_conditioning(&nn.map, d * (d + 1.0) * eps_max)?;
    let opts = cfg.deconvolve.unwrap_or_default();
    let e_prime = deconvolve_noise(&en.map, &nn.map, &opts)?;
    let cp_witness = if cfg.n == 1 {
        Some(cp_witness_single_qubit(&e_prime, CP_TOL.max(10.0 * eps_max))?)
    } else {
        None
    };
    let choi = is_cptp(&e_prime, CP_TOL);
    Ok(ReconstructionReport {
        en_prime: en.map,
        n_prime: nn.map,
        e_prime,
        residuals: Residuals {
            en: en.residuals,
            noise: nn.residuals,
            en_norm: en.residual_norm,
            noise_norm: nn.residual_norm,
            consistent: en.consistent && nn.consistent,
        },
        kappa: conditioning.kappa,
        conditioning,
        cp_witness,
        choi,
        spam: sets.spam,
        samples_used: sets.samples_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{compose, depolarizing, unital_part, GateName};
    use crate::linalg::max_abs_diff;

    fn h_spec() -> ChannelSpec {
        ChannelSpec::gate(GateName::H)
    }

    fn depol(delta: f64) -> ChannelSpec {
        ChannelSpec::Depolarizing { delta, qubits: 1 }
    }

    #[test]
    fn analytic_closed_loop() {
        let cfg = PipelineConfig::new(h_spec(), depol(0.98), FidelityMethod::Analytic);
        let r = reconstruct_from_rb(&cfg).unwrap();
        let h = make_channel(&h_spec()).unwrap();
        assert!(max_abs_diff(r.e_prime.matrix(), h.matrix()) < 1e-8);
        let en = compose(&h, &depolarizing(1, 0.98).unwrap()).unwrap();
        assert!(max_abs_diff(r.en_prime.matrix(), en.matrix()) < 1e-9);
        assert!((r.kappa - 1.0 / 0.98).abs() < 1e-9);
        assert!(r.cp_witness.unwrap().cp);
    }

    #[test]
    fn analytic_random_unital_with_spam() {
        for seed in 0..5 {
            let mut cfg = PipelineConfig::new(
                ChannelSpec::RandomCptp {
                    qubits: 1,
                    seed,
                    env_dim: None,
                },
                ChannelSpec::RandomCptp {
                    qubits: 1,
                    seed: seed + 100,
                    env_dim: None,
                },
                FidelityMethod::Analytic,
            );
            cfg.eta_prep = 0.05;
            cfg.eta_meas = 0.1;
            let r = reconstruct_from_rb(&cfg).unwrap();
            let truth = unital_part(&make_channel(&cfg.e_map).unwrap()).unwrap();
            assert!(max_abs_diff(r.e_prime.matrix(), truth.matrix()) < 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn sampled_shared_spam() {
        let mut cfg = PipelineConfig::new(
            h_spec(),
            depol(0.98),
            FidelityMethod::SharedSpam {
                samples: 100_000,
                mode: SamplingMode::Collapsed,
                delta: 0.05,
            },
        );
        cfg.seed = 11;
        let r = reconstruct_from_rb(&cfg).unwrap();
        let h = make_channel(&h_spec()).unwrap();
        let err = (r.e_prime.matrix() - h.matrix()).norm();
        assert!(err < 0.05, "{err}");
        assert!(r.samples_used > 0);
    }

    #[test]
    fn singular_noise() {
        let cfg = PipelineConfig::new(
            h_spec(),
            ChannelSpec::Dephasing {
                gamma: 0.0,
                qubits: 1,
                target: 0,
            },
            FidelityMethod::Analytic,
        );
        assert!(matches!(reconstruct_from_rb(&cfg), Err(Error::Singular { .. })));
    }
}
