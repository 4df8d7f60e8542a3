//! Clifford group elements as symplectic tableaux.
//!
//! An element is stored through the images of the generators
//! `X_0, …, X_{n−1}, Z_0, …, Z_{n−1}` under conjugation `P ↦ C P C†`. Each
//! image is a Hermitian Pauli with sign ±1. Composition and inversion are
//! exact tableau arithmetic; the dense Pauli-Liouville matrix is built on
//! demand for `n ≤ 3` and cached.

mod sample;
mod single;
mod span;

pub use sample::{sample_uniform_clifford, transporting_clifford};
pub use single::{
    single_qubit_cliffords, single_qubit_table, spanning_set_single_qubit, SingleQubitTable,
};
pub use span::{greedy_spanning_set, map_rank, pl_rank, unital_span_dimension};

use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{pl_from_unitary, GateName, PauliLiouvilleMap};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::pauli::{basis_size, PauliLetter, PauliOperator, MAX_DENSE_QUBITS, MAX_QUBITS};

/// Signed permutation form of a Clifford PL matrix: column `i` has a single
/// entry `sign[i]` in row `perm[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub sign: Vec<i8>,
}

impl SignedPermutation {
    /// `out = PL · v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, (&j, &s)) in self.perm.iter().zip(&self.sign).enumerate() {
            out[j] = s as f64 * v[i];
        }
    }
}

#[derive(Clone, Debug)]
pub struct CliffordElement {
    n: usize,
    images: Vec<PauliOperator>,
    perm: OnceLock<SignedPermutation>,
    pl: OnceLock<PauliLiouvilleMap>,
}

impl PartialEq for CliffordElement {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.images == other.images
    }
}

impl Eq for CliffordElement {}

impl Hash for CliffordElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.images.hash(state);
    }
}

fn generator(n: usize, g: usize) -> PauliOperator {
    if g < n {
        PauliOperator::single(n, g, PauliLetter::X)
    } else {
        PauliOperator::single(n, g - n, PauliLetter::Z)
    }
}

impl CliffordElement {
    fn from_images_unchecked(n: usize, images: Vec<PauliOperator>) -> Self {
        Self {
            n,
            images,
            perm: OnceLock::new(),
            pl: OnceLock::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_images_unchecked(n, (0..2 * n).map(|g| generator(n, g)).collect())
    }

    /// Builds an element from the images of `X_0…X_{n−1}, Z_0…Z_{n−1}`.
    pub fn from_images(n: usize, images: Vec<PauliOperator>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
        }
        if images.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: images.len(),
            });
        }
        for img in &images {
            if img.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: img.num_qubits(),
                });
            }
            if img.sign().is_none() {
                return Err(Error::NotClifford(format!("image {img} is not Hermitian")));
            }
            if img.is_identity() {
                return Err(Error::NotClifford("generator mapped to identity".into()));
            }
        }
        for a in 0..2 * n {
            for b in a + 1..2 * n {
                let should_anticommute = b == a + n && a < n;
                if images[a].commutes_with(&images[b]) == should_anticommute {
                    return Err(Error::NotClifford(
                        "generator images violate the symplectic relations".into(),
                    ));
                }
            }
        }
        Ok(Self::from_images_unchecked(n, images))
    }

    /// Builds an element from tableau rows (`2n` bits each: x then z) and
    /// sign bits (1 = negative).
    pub fn from_tableau(n: usize, rows: &[Vec<bool>], phases: &[bool]) -> Result<Self> {
        if rows.len() != 2 * n || phases.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: rows.len().max(phases.len()),
            });
        }
        let mut images = Vec::with_capacity(2 * n);
        for (row, &neg) in rows.iter().zip(phases) {
            if row.len() != 2 * n {
                return Err(Error::DimensionMismatch {
                    expected: 2 * n,
                    found: row.len(),
                });
            }
            let (mut x, mut z) = (0u64, 0u64);
            for q in 0..n {
                x |= (row[q] as u64) << q;
                z |= (row[n + q] as u64) << q;
            }
            images.push(PauliOperator::new(n, x, z, if neg { 2 } else { 0 })?);
        }
        Self::from_images(n, images)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Images of `X_0…X_{n−1}, Z_0…Z_{n−1}`.
    pub fn images(&self) -> &[PauliOperator] {
        &self.images
    }

    /// Binary `2n×2n` tableau; row `g` holds the x then z bits of image `g`.
    pub fn tableau(&self) -> Vec<Vec<bool>> {
        self.images
            .iter()
            .map(|p| {
                (0..self.n)
                    .map(|q| (p.x_bits() >> q) & 1 == 1)
                    .chain((0..self.n).map(|q| (p.z_bits() >> q) & 1 == 1))
                    .collect()
            })
            .collect()
    }

    /// Sign bits of the generator images (true = −1).
    pub fn phase_bits(&self) -> Vec<bool> {
        self.images.iter().map(|p| p.phase_exp() == 2).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// `C P C†`, phase included.
    pub fn conjugate(&self, p: &PauliOperator) -> PauliOperator {
        debug_assert_eq!(p.num_qubits(), self.n);
        let (x, z) = (p.x_bits(), p.z_bits());
        // σ(x,z) = i^{|x∧z|} Π_q X_q^{x_q} Z_q^{z_q}
        let mut acc = PauliOperator::identity(self.n)
            .with_phase(p.phase_exp() + (x & z).count_ones() as u8);
        for q in 0..self.n {
            if (x >> q) & 1 == 1 {
                acc = acc.mul_unchecked(&self.images[q]);
            }
            if (z >> q) & 1 == 1 {
                acc = acc.mul_unchecked(&self.images[self.n + q]);
            }
        }
        acc
    }

    /// Signed permutation acting on Pauli indices (cached, `n ≤ 3`).
    pub fn signed_permutation(&self) -> &SignedPermutation {
        self.perm.get_or_init(|| {
            assert!(self.n <= MAX_DENSE_QUBITS, "dense forms limited to 3 qubits");
            let size = basis_size(self.n);
            let mut perm = Vec::with_capacity(size);
            let mut sign = Vec::with_capacity(size);
            for i in 0..size {
                let img = self.conjugate(&PauliOperator::from_index(i, self.n).expect("in range"));
                perm.push(img.index());
                sign.push(img.sign().expect("Clifford images are Hermitian"));
            }
            SignedPermutation { perm, sign }
        })
    }

    /// Dense PL matrix (cached).
    pub fn pl(&self) -> Result<&PauliLiouvilleMap> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                n: self.n,
                max: MAX_DENSE_QUBITS,
            });
        }
        Ok(self.pl.get_or_init(|| {
            let sp = self.signed_permutation();
            let size = sp.perm.len();
            let mut m = RMatrix::zeros(size, size);
            for i in 0..size {
                m[(sp.perm[i], i)] = sp.sign[i] as f64;
            }
            PauliLiouvilleMap::new(self.n, m).expect("valid size")
        }))
    }

    /// `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Self) -> Self {
        Self::from_images_unchecked(
            self.n,
            other.images.iter().map(|p| self.conjugate(p)).collect(),
        )
    }

    pub fn inverse(&self) -> Self {
        let n = self.n;
        let tab = self.tableau();
        let swap = |k: usize| if k < n { k + n } else { k - n };
        // Over GF(2) the inverse of a symplectic M is Ω Mᵀ Ω.
        let mut images: Vec<PauliOperator> = (0..2 * n)
            .map(|r| {
                let (mut x, mut z) = (0u64, 0u64);
                for col in 0..2 * n {
                    if tab[swap(col)][swap(r)] {
                        if col < n {
                            x |= 1 << col;
                        } else {
                            z |= 1 << (col - n);
                        }
                    }
                }
                PauliOperator::from_parts(n, x, z, 0)
            })
            .collect();
        for (g, img) in images.iter_mut().enumerate() {
            let back = self.conjugate(img);
            debug_assert_eq!(back.unsigned(), generator(n, g));
            if back.phase_exp() == 2 {
                *img = img.with_phase(2);
            }
        }
        Self::from_images_unchecked(n, images)
    }

    /// Conjugation by a Pauli operator, as a Clifford element.
    pub fn from_pauli(p: &PauliOperator) -> Self {
        let n = p.num_qubits();
        let images = (0..2 * n)
            .map(|g| {
                let gen = generator(n, g);
                if gen.commutes_with(p) {
                    gen
                } else {
                    gen.with_phase(2)
                }
            })
            .collect();
        Self::from_images_unchecked(n, images)
    }

    /// Recovers an element from a ±1 monomial PL matrix.
    pub fn from_pl(pl: &PauliLiouvilleMap) -> Result<Self> {
        let n = pl.num_qubits();
        let m = pl.matrix();
        let mut images = Vec::with_capacity(2 * n);
        for g in 0..2 * n {
            let col = generator(n, g).index();
            let mut found = None;
            for j in 0..m.nrows() {
                let v = m[(j, col)];
                if (v.abs() - 1.0).abs() < 1e-8 {
                    if found.is_some() {
                        return Err(Error::NotClifford("column is not monomial".into()));
                    }
                    found = Some((j, v));
                } else if v.abs() > 1e-8 {
                    return Err(Error::NotClifford("entry outside {0, ±1}".into()));
                }
            }
            let (j, v) = found.ok_or_else(|| Error::NotClifford("empty column".into()))?;
            let p = PauliOperator::from_index(j, n)?;
            images.push(p.with_phase(if v < 0.0 { 2 } else { 0 }));
        }
        let c = Self::from_images(n, images)?;
        let dev = crate::linalg::max_abs_diff(c.pl()?.matrix(), m);
        if dev > 1e-8 {
            return Err(Error::NotClifford(format!(
                "PL matrix not reproduced by its generator images (deviation {dev:e})"
            )));
        }
        Ok(c)
    }

    pub fn from_unitary(u: &crate::linalg::CMatrix) -> Result<Self> {
        Self::from_pl(&pl_from_unitary(u)?)
    }

    /// Places a `k`-qubit element on `qubits` of an `n`-qubit register.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> Result<Self> {
        if qubits.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: qubits.len(),
            });
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= n || qubits[..i].contains(&q) {
                return Err(Error::Invalid(format!("bad qubit list {qubits:?} for {n} qubits")));
            }
        }
        let spread = |bits: u64| {
            qubits
                .iter()
                .enumerate()
                .fold(0u64, |acc, (l, &q)| acc | (((bits >> l) & 1) << q))
        };
        let mut images: Vec<PauliOperator> = (0..2 * n).map(|g| generator(n, g)).collect();
        for (l, &q) in qubits.iter().enumerate() {
            for (local, global) in [(l, q), (self.n + l, n + q)] {
                let img = &self.images[local];
                images[global] =
                    PauliOperator::from_parts(n, spread(img.x_bits()), spread(img.z_bits()), img.phase_exp());
            }
        }
        Ok(Self::from_images_unchecked(n, images))
    }

    /// A named Clifford gate on `qubits` of an `n`-qubit register.
    pub fn gate(name: GateName, n: usize, qubits: &[usize]) -> Result<Self> {
        if !name.is_clifford() {
            return Err(Error::NotClifford(format!("{name} is not a Clifford gate")));
        }
        if qubits.len() != name.arity() {
            return Err(Error::DimensionMismatch {
                expected: name.arity(),
                found: qubits.len(),
            });
        }
        let local = match name {
            GateName::Cnot => two_qubit(["XX", "IX", "ZI", "ZZ"]),
            GateName::Cz => two_qubit(["XZ", "ZX", "ZI", "IZ"]),
            GateName::Swap => two_qubit(["IX", "XI", "IZ", "ZI"]),
            _ => Self::from_unitary(&crate::channel::gate_unitary(name))?,
        };
        local.embed(n, qubits)
    }
}

fn two_qubit(labels: [&str; 4]) -> CliffordElement {
    let images = labels
        .iter()
        .map(|s| s.parse::<PauliOperator>().expect("static label"))
        .collect();
    CliffordElement::from_images(2, images).expect("static tableau")
}

pub fn clifford_compose(a: &CliffordElement, b: &CliffordElement) -> Result<CliffordElement> {
    a.compose(b)
}

pub fn clifford_invert(a: &CliffordElement) -> CliffordElement {
    a.inverse()
}

fn bits_to_string(bits: impl Iterator<Item = bool>) -> String {
    bits.map(|b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Invalid(format!("bad bit {other:?}"))),
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CliffordRepr {
    Tableau {
        n: usize,
        tableau: Vec<String>,
        phases: String,
    },
    Id {
        id: usize,
    },
    Named {
        name: GateName,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        qubits: Vec<usize>,
    },
}

impl CliffordRepr {
    fn build(self) -> Result<CliffordElement> {
        match self {
            CliffordRepr::Tableau { n, tableau, phases } => {
                let rows = tableau
                    .iter()
                    .map(|r| parse_bits(r))
                    .collect::<Result<Vec<_>>>()?;
                CliffordElement::from_tableau(n, &rows, &parse_bits(&phases)?)
            }
            CliffordRepr::Id { id } => single_qubit_table()
                .element(id)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("single-qubit Clifford id {id} not in 0..24"))),
            CliffordRepr::Named { name, n, qubits } => {
                let qubits = if qubits.is_empty() {
                    (0..name.arity()).collect()
                } else {
                    qubits
                };
                let n = n.unwrap_or_else(|| qubits.iter().max().map_or(1, |m| m + 1));
                CliffordElement::gate(name, n, &qubits)
            }
        }
    }
}

impl Serialize for CliffordElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CliffordRepr::Tableau {
            n: self.n,
            tableau: self
                .tableau()
                .into_iter()
                .map(|r| bits_to_string(r.into_iter()))
                .collect(),
            phases: bits_to_string(self.phase_bits().into_iter()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CliffordElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CliffordRepr::deserialize(d)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}
