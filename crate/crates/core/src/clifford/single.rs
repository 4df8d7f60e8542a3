use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::OnceLock;

use super::CliffordElement;
use crate::channel::{rotation_unitary, GateName};

/// The 24 single-qubit Cliffords with canonical ids and lookup tables.
///
/// Ids follow the row-major PL matrices in descending lexicographic order,
/// which puts the identity at id 0.
#[derive(Debug)]
pub struct SingleQubitTable {
    elements: Vec<CliffordElement>,
    pl: Vec<[[f64; 4]; 4]>,
    mul: Vec<[u8; 24]>,
    inv: [u8; 24],
    lookup: HashMap<CliffordElement, u8>,
}

impl SingleQubitTable {
    fn build() -> Self {
        let gens = [
            CliffordElement::gate(GateName::H, 1, &[0]).expect("H"),
            CliffordElement::gate(GateName::S, 1, &[0]).expect("S"),
        ];
        let mut seen = vec![CliffordElement::identity(1)];
        let mut queue = VecDeque::from([CliffordElement::identity(1)]);
        while let Some(c) = queue.pop_front() {
            for g in &gens {
                let next = g.compose_unchecked(&c);
                if !seen.contains(&next) {
                    seen.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        assert_eq!(seen.len(), 24, "single-qubit Clifford group has 24 elements");

        let key = |c: &CliffordElement| -> Vec<f64> {
            let m = c.pl().expect("n = 1").matrix();
            (0..4).flat_map(|r| (0..4).map(move |col| m[(r, col)])).collect()
        };
        seen.sort_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            kb.partial_cmp(&ka).expect("finite entries")
        });

        let lookup: HashMap<CliffordElement, u8> = seen
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u8))
            .collect();
        let mul = seen
            .iter()
            .map(|a| {
                let mut row = [0u8; 24];
                for (j, b) in seen.iter().enumerate() {
                    row[j] = lookup[&a.compose_unchecked(b)];
                }
                row
            })
            .collect();
        let mut inv = [0u8; 24];
        for (i, c) in seen.iter().enumerate() {
            inv[i] = lookup[&c.inverse()];
        }
        let pl = seen
            .iter()
            .map(|c| {
                let m = c.pl().expect("n = 1").matrix();
                let mut out = [[0.0; 4]; 4];
                for (r, row) in out.iter_mut().enumerate() {
                    for (col, v) in row.iter_mut().enumerate() {
                        *v = m[(r, col)];
                    }
                }
                out
            })
            .collect();
        Self {
            elements: seen,
            pl,
            mul,
            inv,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> Option<&CliffordElement> {
        self.elements.get(id)
    }

    pub fn id_of(&self, c: &CliffordElement) -> Option<usize> {
        self.lookup.get(c).map(|&i| i as usize)
    }

    /// Id of `a ∘ b`.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b] as usize
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn pl(&self, id: usize) -> &[[f64; 4]; 4] {
        &self.pl[id]
    }
}

pub fn single_qubit_table() -> &'static SingleQubitTable {
    static TABLE: OnceLock<SingleQubitTable> = OnceLock::new();
    TABLE.get_or_init(SingleQubitTable::build)
}

/// All 24 single-qubit Cliffords in canonical id order.
pub fn single_qubit_cliffords() -> Vec<CliffordElement> {
    single_qubit_table().elements().to_vec()
}

/// `C₀ … C₉`: identity, π rotations about X, Y, Z, and ±2π/3 rotations
/// about three body diagonals. Their PL matrices are linearly independent.
pub fn spanning_set_single_qubit() -> Vec<CliffordElement> {
    let axes: [([f64; 3], f64); 10] = [
        ([0.0, 0.0, 1.0], 0.0),
        ([1.0, 0.0, 0.0], PI / 2.0),
        ([0.0, 1.0, 0.0], PI / 2.0),
        ([0.0, 0.0, 1.0], PI / 2.0),
        ([1.0, 1.0, 1.0], PI / 3.0),
        ([1.0, 1.0, 1.0], 2.0 * PI / 3.0),
        ([1.0, -1.0, 1.0], PI / 3.0),
        ([1.0, -1.0, 1.0], 2.0 * PI / 3.0),
        ([1.0, 1.0, -1.0], PI / 3.0),
        ([1.0, 1.0, -1.0], 2.0 * PI / 3.0),
    ];
    axes.iter()
        .map(|&(axis, theta)| {
            CliffordElement::from_unitary(&rotation_unitary(axis, theta)).expect("Clifford rotation")
        })
        .collect()
}
