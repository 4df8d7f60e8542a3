//! Clifford twirls of Pauli-Liouville matrices.

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use crate::channel::GateName;
use crate::clifford::{single_qubit_table, CliffordElement, SignedPermutation};
use crate::linalg::RMatrix;

/// Every element of the two-qubit Clifford group (11520 with signs).
pub fn two_qubit_group() -> &'static [CliffordElement] {
    static GROUP: OnceLock<Vec<CliffordElement>> = OnceLock::new();
    GROUP.get_or_init(|| {
        let gens: Vec<CliffordElement> = [
            (GateName::H, vec![0]),
            (GateName::H, vec![1]),
            (GateName::S, vec![0]),
            (GateName::S, vec![1]),
            (GateName::Cnot, vec![0, 1]),
        ]
        .into_iter()
        .map(|(g, q)| CliffordElement::gate(g, 2, &q).expect("two-qubit generator"))
        .collect();
        let id = CliffordElement::identity(2);
        let mut seen: HashSet<CliffordElement> = HashSet::from([id.clone()]);
        let mut order = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(c) = queue.pop_front() {
            for g in &gens {
                let next = g.compose(&c).expect("same size");
                if seen.insert(next.clone()) {
                    order.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        order
    })
}

fn conjugated_sum(acc: &mut RMatrix, lambda: &RMatrix, sp: &SignedPermutation) {
    // (Cᵀ Λ C)[a][b] = s_a s_b Λ[π(a)][π(b)]
    let size = sp.perm.len();
    for a in 0..size {
        let (pa, sa) = (sp.perm[a], sp.sign[a] as f64);
        for b in 0..size {
            acc[(a, b)] += sa * sp.sign[b] as f64 * lambda[(pa, sp.perm[b])];
        }
    }
}

/// `𝔼_C [C⁻¹ Λ C]` over the full Clifford group.
///
/// One and two qubits average over every group element; three qubits use
/// the closed form `Λ_00 Q + p Q⊥` with `p = (tr Λ − Λ_00)/(d² − 1)` plus
/// the vanishing of the twirled first column.
pub fn clifford_twirl(lambda: &RMatrix) -> RMatrix {
    let size = lambda.nrows();
    let mut acc = RMatrix::zeros(size, size);
    match size {
        4 => {
            let t = single_qubit_table();
            for c in t.elements() {
                conjugated_sum(&mut acc, lambda, c.signed_permutation());
            }
            acc / t.len() as f64
        }
        16 => {
            let group = two_qubit_group();
            for c in group {
                conjugated_sum(&mut acc, lambda, c.signed_permutation());
            }
            acc / group.len() as f64
        }
        _ => depolarizing_form(lambda),
    }
}

/// `Λ_00 Q + p Q⊥`, the closed form of a Clifford twirl.
pub fn depolarizing_form(lambda: &RMatrix) -> RMatrix {
    let size = lambda.nrows();
    let p = (lambda.trace() - lambda[(0, 0)]) / (size as f64 - 1.0);
    let mut out = RMatrix::identity(size, size) * p;
    out[(0, 0)] = lambda[(0, 0)];
    out
}
