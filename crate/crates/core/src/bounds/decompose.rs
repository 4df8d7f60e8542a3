use std::collections::HashMap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::channel::GateName;
use crate::clifford::CliffordElement;
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::rb::FidelityEstimate;

/// Default cap on T gates; the term count grows as `3^t`.
pub const T_MAX: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub beta: f64,
    pub clifford: CliffordElement,
}

/// `U = Σ β_i C_i` in the PL representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearCombination {
    pub n: usize,
    pub terms: Vec<Term>,
    pub one_norm: f64,
    pub t_count: usize,
}

impl LinearCombination {
    fn from_terms(n: usize, terms: Vec<Term>, t_count: usize) -> Self {
        let one_norm = terms.iter().map(|t| t.beta.abs()).sum();
        Self {
            n,
            terms,
            one_norm,
            t_count,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn beta_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.beta).sum()
    }

    /// `Σ β_i C_i^(PL)`.
    pub fn pl_matrix(&self) -> Result<RMatrix> {
        let size = 1usize << (2 * self.n);
        let mut acc = RMatrix::zeros(size, size);
        for t in &self.terms {
            acc += t.clifford.pl()?.matrix() * t.beta;
        }
        Ok(acc)
    }

    /// Sums the coefficients of identical Cliffords and drops zero terms.
    pub fn merged(&self) -> Self {
        let mut index: HashMap<&CliffordElement, usize> = HashMap::new();
        let mut terms: Vec<Term> = Vec::new();
        for t in &self.terms {
            match index.get(&t.clifford) {
                Some(&i) => terms[i].beta += t.beta,
                None => {
                    index.insert(&t.clifford, terms.len());
                    terms.push(t.clone());
                }
            }
        }
        terms.retain(|t| t.beta.abs() > 1e-15);
        Self::from_terms(self.n, terms, self.t_count)
    }
}

/// `T = ½·𝕀 + ((1−√2)/2)·Z + (1/√2)·S` on PL matrices.
pub fn decompose_t() -> LinearCombination {
    t_on(1, 0)
}

fn t_on(n: usize, q: usize) -> LinearCombination {
    let gate = |g| CliffordElement::gate(g, n, &[q]).expect("qubit in range");
    LinearCombination::from_terms(
        n,
        vec![
            Term {
                beta: 0.5,
                clifford: CliffordElement::identity(n),
            },
            Term {
                beta: (1.0 - SQRT_2) / 2.0,
                clifford: gate(GateName::Z),
            },
            Term {
                beta: 1.0 / SQRT_2,
                clifford: gate(GateName::S),
            },
        ],
        1,
    )
}

/// One step of a Clifford+T circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate")]
pub enum CircuitGate {
    #[serde(rename = "clifford")]
    Clifford {
        #[serde(flatten)]
        element: CliffordElement,
    },
    T {
        qubit: usize,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DecomposeOptions {
    pub t_max: usize,
    /// Merge identical Cliffords after every T gate.
    pub merge: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            t_max: T_MAX,
            merge: false,
        }
    }
}

/// Expands a circuit, listed in application order, into a combination of
/// Cliffords. Clifford gates fold into every term; each T gate triples the
/// number of terms and multiplies the one-norm by `√2`.
pub fn decompose_circuit(n: usize, gates: &[CircuitGate], opts: &DecomposeOptions) -> Result<LinearCombination> {
    let t = gates.iter().filter(|g| matches!(g, CircuitGate::T { .. })).count();
    if t > opts.t_max {
        return Err(Error::TooManyTGates { t, t_max: opts.t_max });
    }
    let mut combo = LinearCombination::from_terms(
        n,
        vec![Term {
            beta: 1.0,
            clifford: CliffordElement::identity(n),
        }],
        0,
    );
    for g in gates {
        match g {
            CircuitGate::Clifford { element } => {
                let m = element.num_qubits();
                let element = match m.cmp(&n) {
                    std::cmp::Ordering::Equal => element.clone(),
                    std::cmp::Ordering::Less => element.embed(n, &(0..m).collect::<Vec<_>>())?,
                    std::cmp::Ordering::Greater => {
                        return Err(Error::DimensionMismatch { expected: n, found: m })
                    }
                };
                for term in &mut combo.terms {
                    term.clifford = element.compose_unchecked(&term.clifford);
                }
            }
            CircuitGate::T { qubit } => {
                if *qubit >= n {
                    return Err(Error::IndexOutOfRange {
                        index: *qubit,
                        n,
                        size: n,
                    });
                }
                let t_terms = t_on(n, *qubit).terms;
                let terms = combo
                    .terms
                    .iter()
                    .flat_map(|term| {
                        t_terms.iter().map(move |tt| Term {
                            beta: term.beta * tt.beta,
                            clifford: tt.clifford.compose_unchecked(&term.clifford),
                        })
                    })
                    .collect();
                combo = LinearCombination::from_terms(n, terms, combo.t_count + 1);
                if opts.merge {
                    combo = combo.merged();
                }
            }
        }
    }
    Ok(LinearCombination::from_terms(n, combo.terms, combo.t_count))
}

/// `F̄(E, U) = Σ β_i F̄(E, C_i) + (1 − Σ β_i)/(d + 1)`, with `ε = Σ |β_i| ε_i`
/// and `δ = Σ δ_i`.
pub fn fidelity_from_combination(
    estimates: &[FidelityEstimate],
    combo: &LinearCombination,
    d: usize,
) -> Result<FidelityEstimate> {
    if estimates.len() != combo.terms.len() {
        return Err(Error::DimensionMismatch {
            expected: combo.terms.len(),
            found: estimates.len(),
        });
    }
    let beta_sum = combo.beta_sum();
    let mut f = (1.0 - beta_sum) / (d as f64 + 1.0);
    let mut eps = 0.0;
    let mut delta = 0.0;
    let mut samples = 0;
    for (e, t) in estimates.iter().zip(&combo.terms) {
        f += t.beta * e.f_hat;
        eps += t.beta.abs() * e.epsilon;
        delta += e.delta;
        samples += e.samples_used;
    }
    Ok(FidelityEstimate {
        f_hat: f,
        epsilon: eps,
        delta,
        samples_used: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{average_fidelity, make_channel, pl_from_unitary, t_unitary, ChannelSpec, PauliLiouvilleMap};
    use crate::linalg::max_abs_diff;

    fn t_pl() -> PauliLiouvilleMap {
        pl_from_unitary(&t_unitary()).unwrap()
    }

    #[test]
    fn t_decomposition() {
        let c = decompose_t();
        assert_eq!(c.len(), 3);
        assert!((c.one_norm - SQRT_2).abs() < 1e-12);
        let m = c.pl_matrix().unwrap();
        assert!(max_abs_diff(&m, t_pl().matrix()) < 1e-12);
        assert!((m[(1, 1)] - (0.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn circuits() {
        let h = CircuitGate::Clifford {
            element: CliffordElement::gate(GateName::H, 1, &[0]).unwrap(),
        };
        let opts = DecomposeOptions::default();
        let c = decompose_circuit(1, &[h.clone()], &opts).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.terms[0].beta, 1.0);
        assert_eq!(decompose_circuit(1, &[CircuitGate::T { qubit: 0 }], &opts).unwrap(), decompose_t());

        let tht = [CircuitGate::T { qubit: 0 }, h, CircuitGate::T { qubit: 0 }];
        let c = decompose_circuit(1, &tht, &opts).unwrap();
        assert!(c.len() <= 9);
        assert!(c.one_norm <= 2.0 + 1e-12);
        let hp = make_channel(&ChannelSpec::gate(GateName::H)).unwrap();
        let dense = t_pl().matrix() * hp.matrix() * t_pl().matrix();
        assert!(max_abs_diff(&c.pl_matrix().unwrap(), &dense) < 1e-9);
        let merged = decompose_circuit(1, &tht, &DecomposeOptions { merge: true, ..opts }).unwrap();
        assert!(merged.len() <= c.len());
        assert!(max_abs_diff(&merged.pl_matrix().unwrap(), &dense) < 1e-9);

        let many = vec![CircuitGate::T { qubit: 0 }; 13];
        assert!(matches!(decompose_circuit(1, &many, &opts), Err(Error::TooManyTGates { t: 13, t_max: 12 })));
        let empty = decompose_circuit(2, &[], &opts).unwrap();
        assert_eq!(empty.len(), 1);
        assert!(empty.terms[0].clifford.is_identity());
    }

    #[test]
    fn circuit_json() {
        let json = r#"[{"gate":"T","qubit":0},{"gate":"clifford","name":"H"},{"gate":"clifford","id":3}]"#;
        let gates: Vec<CircuitGate> = serde_json::from_str(json).unwrap();
        assert_eq!(gates.len(), 3);
        let back: Vec<CircuitGate> = serde_json::from_str(&serde_json::to_string(&gates).unwrap()).unwrap();
        assert_eq!(back, gates);
    }

    #[test]
    fn combination_fidelity() {
        let combo = decompose_t();
        let t = t_pl();
        let exact = |e: &PauliLiouvilleMap| -> Vec<FidelityEstimate> {
            combo
                .terms
                .iter()
                .map(|term| FidelityEstimate::exact(average_fidelity(e, term.clifford.pl().unwrap()).unwrap()))
                .collect()
        };
        let f = fidelity_from_combination(&exact(&t), &combo, 2).unwrap();
        assert!((f.f_hat - 1.0).abs() < 1e-12);
        let id = PauliLiouvilleMap::identity(1);
        let f = fidelity_from_combination(&exact(&id), &combo, 2).unwrap();
        let direct = average_fidelity(&id, &t).unwrap();
        assert!((f.f_hat - direct).abs() < 1e-12);
        // tr T^(PL) = 2 + 2cos(π/4), so F̄ = (4 + √2)/6.
        assert!((direct - (4.0 + SQRT_2) / 6.0).abs() < 1e-12);

        let noisy = vec![
            FidelityEstimate {
                f_hat: 0.5,
                epsilon: 0.01,
                delta: 0.001,
                samples_used: 0
            };
            3
        ];
        let f = fidelity_from_combination(&noisy, &combo, 2).unwrap();
        assert!((f.epsilon - 0.01 * SQRT_2).abs() < 1e-15);
        assert!((f.delta - 0.003).abs() < 1e-15);
        assert!(fidelity_from_combination(&noisy[..2], &combo, 2).is_err());
    }
}
