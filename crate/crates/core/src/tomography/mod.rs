//! Reconstruction of unital parts from Clifford fidelities, noise
//! deconvolution and complete-positivity checks.

mod canonical;
mod pipeline;

pub use canonical::{canonical_form, cp_witness_single_qubit, nonunital_bounds, CanonicalForm, CpWitness};
pub use pipeline::{
    default_clifford_set, estimate_fidelity_sets, reconstruct_from_rb, FidelityMethod, PipelineConfig,
    ReconstructionReport,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{is_cptp, random_cptp, unital_part, PauliLiouvilleMap, CP_TOL};
use crate::clifford::{pl_rank, unital_span_dimension, CliffordElement};
use crate::error::{Error, Result};
use crate::linalg::{self, RMatrix};
use crate::rb::{chunk_rng, FidelityEstimate};

/// Default cutoff on the smallest singular value of `N′`.
pub const SINGULAR_THRESHOLD: f64 = 1e-6;

/// Residual allowed on top of each entry's `ε` before a fit is flagged.
const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEntry {
    pub clifford: CliffordElement,
    #[serde(flatten)]
    pub estimate: FidelityEstimate,
}

/// Average fidelities of one map to a set of Cliffords.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelitySet {
    pub n: usize,
    pub entries: Vec<FidelityEntry>,
}

impl FidelitySet {
    /// Exact fidelities of `e` to each of `cliffords`.
    pub fn exact(e: &PauliLiouvilleMap, cliffords: &[CliffordElement]) -> Result<Self> {
        let entries = cliffords
            .iter()
            .map(|c| {
                let f = crate::channel::average_fidelity(e, c.pl()?)?;
                Ok(FidelityEntry {
                    clifford: c.clone(),
                    estimate: FidelityEstimate::exact(f),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n: e.num_qubits(),
            entries,
        })
    }
}

/// A least-squares reconstruction with per-entry fidelity residuals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reconstruction {
    pub map: PauliLiouvilleMap,
    /// Predicted minus supplied fidelity, per entry.
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    /// Every residual lies within its entry's `ε` (plus round-off).
    pub consistent: bool,
}

/// Solves for the unital block `B` of `E′ = 1 ⊕ B` from
/// `d(d+1)F̄_i − d − 1 = ⟨C_i, B⟩`, where the non-unital column drops out
/// because every Clifford map is unital.
pub fn reconstruct_unital(fids: &FidelitySet) -> Result<Reconstruction> {
    let n = fids.n;
    if fids.entries.is_empty() {
        return Err(Error::RankDeficient {
            rank: 0,
            required: unital_span_dimension(n),
        });
    }
    let mut cliffords = Vec::with_capacity(fids.entries.len());
    for e in &fids.entries {
        if e.clifford.num_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: e.clifford.num_qubits(),
            });
        }
        if !e.estimate.f_hat.is_finite() || !e.estimate.epsilon.is_finite() || !e.estimate.delta.is_finite() {
            return Err(Error::Invalid("fidelity entries must be finite".into()));
        }
        cliffords.push(e.clifford.clone());
    }
    let required = unital_span_dimension(n);
    let rank = pl_rank(&cliffords);
    if rank < required {
        return Err(Error::RankDeficient { rank, required });
    }

    let d = (1usize << n) as f64;
    let size = 1usize << (2 * n);
    let b = size - 1;
    let rows = fids.entries.len();
    let mut a = RMatrix::zeros(rows, b * b);
    let mut rhs = nalgebra::DVector::zeros(rows);
    for (r, e) in fids.entries.iter().enumerate() {
        let sp = e.clifford.signed_permutation();
        for (i, (&j, &s)) in sp.perm.iter().zip(&sp.sign).enumerate().skip(1) {
            a[(r, (j - 1) * b + (i - 1))] = s as f64;
        }
        rhs[r] = d * (d + 1.0) * e.estimate.f_hat - d - 1.0;
    }
    let x = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let block = RMatrix::from_fn(b, b, |j, i| x[j * b + i]);
    let map = PauliLiouvilleMap::from_unital_block(n, &block)?;

    let scale = d * (d + 1.0);
    let pred = &a * &x;
    let residuals: Vec<f64> = (0..rows).map(|r| (pred[r] - rhs[r]) / scale).collect();
    let residual_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    let consistent = residuals
        .iter()
        .zip(&fids.entries)
        .all(|(r, e)| r.abs() <= e.estimate.epsilon + RESIDUAL_TOL);
    if !consistent {
        log::warn!("reconstruction residuals exceed the supplied accuracies (norm {residual_norm:.3e})");
    }
    Ok(Reconstruction {
        map,
        residuals,
        residual_norm,
        consistent,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeconvolveOptions {
    pub threshold: f64,
    /// Falls back to a pseudo-inverse instead of failing on singular `N′`.
    pub pseudo_inverse: bool,
}

impl Default for DeconvolveOptions {
    fn default() -> Self {
        Self {
            threshold: SINGULAR_THRESHOLD,
            pseudo_inverse: false,
        }
    }
}

/// `E′ = (E∘N)′ (N′)⁻¹`, computed on the unital blocks.
pub fn deconvolve_noise(
    en_prime: &PauliLiouvilleMap,
    n_prime: &PauliLiouvilleMap,
    opts: &DeconvolveOptions,
) -> Result<PauliLiouvilleMap> {
    let n = en_prime.num_qubits();
    if n_prime.num_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: n_prime.num_qubits(),
        });
    }
    let bn = n_prime.unital_block();
    let smin = linalg::min_singular_value(&bn);
    let inv = if smin >= opts.threshold {
        bn.try_inverse().ok_or(Error::Singular {
            singular_value: smin,
            threshold: opts.threshold,
        })?
    } else if opts.pseudo_inverse {
        log::warn!("N' has singular value {smin:.3e} below {:.1e}; using a pseudo-inverse", opts.threshold);
        bn.pseudo_inverse(opts.threshold).map_err(|e| Error::Invalid(e.to_string()))?
    } else {
        return Err(Error::Singular {
            singular_value: smin,
            threshold: opts.threshold,
        });
    };
    PauliLiouvilleMap::from_unital_block(n, &(en_prime.unital_block() * inv))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub kappa: f64,
    /// Bound on `‖Δ(N′)⁻¹‖/‖(N′)⁻¹‖` for a perturbation of the given norm,
    /// absent when the bound does not apply.
    pub relative_error_bound: Option<f64>,
    /// `‖G‖ ‖(N′)⁻¹‖ < 1`.
    pub valid: bool,
}

/// Condition number of `N′` in spectral norm and the perturbation bound
/// `κ r/(1 − κ r)` with `r = ‖G‖/‖N′‖`.
///
/// `κ` is taken over the whole PL matrix of `N′`, including the fixed
/// trace row, so a depolarizing map with parameter `δ` has `κ = 1/|δ|`.
pub fn inversion_conditioning(n_prime: &PauliLiouvilleMap, perturbation_norm: f64) -> Result<Conditioning> {
    if !(perturbation_norm >= 0.0) {
        return Err(Error::out_of_range("perturbation_norm", perturbation_norm, "[0, ∞)"));
    }
    let m = n_prime.matrix();
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if linalg::min_singular_value(&n_prime.unital_block()) < SINGULAR_THRESHOLD || smin < SINGULAR_THRESHOLD {
        return Err(Error::Singular {
            singular_value: smin,
            threshold: SINGULAR_THRESHOLD,
        });
    }
    let kappa = smax / smin;
    // κ r = ‖G‖ ‖(N′)⁻¹‖.
    let kr = perturbation_norm / smin;
    let valid = kr < 1.0;
    Ok(Conditioning {
        kappa,
        relative_error_bound: valid.then(|| kr / (1.0 - kr)),
        valid,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub trial: u64,
    pub min_choi_eigenvalue: f64,
    pub noncp: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub n: usize,
    pub fraction_noncp: f64,
    pub rows: Vec<ScanRow>,
}

/// Draws random CPTP maps, projects each onto its unital part and records
/// the smallest eigenvalue of the projection's process matrix.
pub fn multiqubit_noncp_scan(n: usize, trials: u64, seed: u64) -> Result<ScanResult> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let rows: Vec<ScanRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let map_seed = rand::RngCore::next_u64(&mut chunk_rng(seed, u64::MAX, trial));
            let e = random_cptp(n, map_seed, None)?;
            let min = is_cptp(&unital_part(&e)?, CP_TOL).min_choi_eigenvalue;
            Ok(ScanRow {
                trial,
                min_choi_eigenvalue: min,
                noncp: min < -CP_TOL,
            })
        })
        .collect::<Result<_>>()?;
    let bad = rows.iter().filter(|r| r.noncp).count();
    Ok(ScanResult {
        n,
        fraction_noncp: bad as f64 / trials as f64,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{compose, dephasing, depolarizing, make_channel, ChannelSpec, GateName};
    use crate::clifford::{single_qubit_cliffords, spanning_set_single_qubit};
    use crate::linalg::max_abs_diff;

    fn h() -> PauliLiouvilleMap {
        make_channel(&ChannelSpec::gate(GateName::H)).unwrap()
    }

    #[test]
    fn hadamard_from_spanning_set() {
        let fids = FidelitySet::exact(&h(), &spanning_set_single_qubit()).unwrap();
        let p: Vec<f64> = fids.entries.iter().map(|e| 2.0 * e.estimate.f_hat - 1.0).collect();
        for (i, p) in p.iter().enumerate() {
            let expect = if [0, 2, 8, 9].contains(&i) { -1.0 / 3.0 } else { 1.0 / 3.0 };
            assert!((p - expect).abs() < 1e-12, "C{i}: {p}");
        }
        let rec = reconstruct_unital(&fids).unwrap();
        assert!(max_abs_diff(rec.map.matrix(), h().matrix()) < 1e-9);
        assert!(rec.consistent);
        assert!(rec.residual_norm < 1e-12);
    }

    #[test]
    fn identity_and_overdetermined() {
        let id = PauliLiouvilleMap::identity(1);
        let rec = reconstruct_unital(&FidelitySet::exact(&id, &spanning_set_single_qubit()).unwrap()).unwrap();
        assert!(max_abs_diff(rec.map.matrix(), id.matrix()) < 1e-9);

        let e = unital_part(&random_cptp(1, 21, None).unwrap()).unwrap();
        let small = reconstruct_unital(&FidelitySet::exact(&e, &spanning_set_single_qubit()).unwrap()).unwrap();
        let full = reconstruct_unital(&FidelitySet::exact(&e, &single_qubit_cliffords()).unwrap()).unwrap();
        assert!(max_abs_diff(small.map.matrix(), full.map.matrix()) < 1e-9);
        assert!(max_abs_diff(small.map.matrix(), e.matrix()) < 1e-9);
    }

    #[test]
    fn rank_deficient_set() {
        let set = &spanning_set_single_qubit()[..9];
        let fids = FidelitySet::exact(&h(), set).unwrap();
        assert!(matches!(reconstruct_unital(&fids), Err(Error::RankDeficient { rank: 9, required: 10 })));
    }

    #[test]
    fn inconsistent_data_is_flagged() {
        let mut fids = FidelitySet::exact(&h(), &single_qubit_cliffords()).unwrap();
        fids.entries[3].estimate.f_hat += 0.1;
        let rec = reconstruct_unital(&fids).unwrap();
        assert!(!rec.consistent);
    }

    #[test]
    fn deconvolution() {
        let opts = DeconvolveOptions::default();
        let id = PauliLiouvilleMap::identity(1);
        let en = unital_part(&random_cptp(1, 2, None).unwrap()).unwrap();
        assert!(max_abs_diff(deconvolve_noise(&en, &id, &opts).unwrap().matrix(), en.matrix()) < 1e-15);

        let noise = depolarizing(1, 0.95).unwrap();
        let en = compose(&h(), &noise).unwrap();
        let e = deconvolve_noise(&en, &noise, &opts).unwrap();
        assert!(max_abs_diff(e.matrix(), h().matrix()) < 1e-9);

        let dead = dephasing(1, 0, 0.0).unwrap();
        assert!(matches!(deconvolve_noise(&en, &dead, &opts), Err(Error::Singular { .. })));
        let pinv = DeconvolveOptions {
            pseudo_inverse: true,
            ..opts
        };
        assert!(deconvolve_noise(&en, &dead, &pinv).is_ok());
    }

    #[test]
    fn conditioning_examples() {
        let c = inversion_conditioning(&depolarizing(1, 0.9).unwrap(), 0.01).unwrap();
        assert!((c.kappa - 1.0 / 0.9).abs() < 1e-12);
        assert!(c.valid);
        let kr = 0.01 / 0.9;
        assert!((c.relative_error_bound.unwrap() - kr / (1.0 - kr)).abs() < 1e-12);
        let c = inversion_conditioning(&dephasing(1, 0, 0.8).unwrap(), 0.0).unwrap();
        assert!((c.kappa - 1.0 / 0.8).abs() < 1e-12);
        let c = inversion_conditioning(&dephasing(1, 0, 0.8).unwrap(), 0.8).unwrap();
        assert!(!c.valid);
        assert_eq!(c.relative_error_bound, None);
        assert!(inversion_conditioning(&dephasing(1, 0, 0.0).unwrap(), 0.1).is_err());
    }

    #[test]
    fn scan_single_qubit_is_cp() {
        let r = multiqubit_noncp_scan(1, 50, 3).unwrap();
        assert_eq!(r.fraction_noncp, 0.0);
        assert_eq!(r.rows.len(), 50);
        assert_eq!(r, multiqubit_noncp_scan(1, 50, 3).unwrap());
    }
}
