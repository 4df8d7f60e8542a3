//! Exact n-qubit Pauli group arithmetic.
//!
//! A Pauli operator is stored as a pair of bit masks plus a power of `i`:
//!
//! ```text
//! P = i^phase · σ(x_0, z_0) ⊗ σ(x_1, z_1) ⊗ … ⊗ σ(x_{n-1}, z_{n-1})
//! ```
//!
//! with `σ(0,0) = I`, `σ(1,0) = X`, `σ(1,1) = Y`, `σ(0,1) = Z`. Bit `q` of the
//! masks belongs to qubit `q`. Qubit 0 is the leftmost tensor factor, so it is
//! the most significant digit both of the base-4 Pauli index (digits ordered
//! I, X, Y, Z) and of the computational-basis index of dense matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest qubit count for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 3;

/// Largest qubit count supported by the bit-mask representation.
pub const MAX_QUBITS: usize = 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    /// Base-4 digit in the (I, X, Y, Z) ordering.
    pub fn digit(self) -> usize {
        match self {
            PauliLetter::I => 0,
            PauliLetter::X => 1,
            PauliLetter::Y => 2,
            PauliLetter::Z => 3,
        }
    }

    pub fn from_digit(d: usize) -> Self {
        match d & 3 {
            0 => PauliLetter::I,
            1 => PauliLetter::X,
            2 => PauliLetter::Y,
            _ => PauliLetter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

/// An element of the n-qubit Pauli group, phase included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliOperator {
    pub fn new(n: usize, x_bits: u64, z_bits: u64, phase_exp: u8) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
        }
        let m = mask(n);
        if x_bits & !m != 0 || z_bits & !m != 0 {
            return Err(Error::Invalid(format!(
                "Pauli bit strings exceed {n} qubits"
            )));
        }
        Ok(Self {
            n,
            x: x_bits,
            z: z_bits,
            phase: phase_exp & 3,
        })
    }

    pub(crate) fn from_parts(n: usize, x: u64, z: u64, phase: u8) -> Self {
        debug_assert!(x & !mask(n) == 0 && z & !mask(n) == 0);
        Self {
            n,
            x,
            z,
            phase: phase & 3,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(n, 0, 0, 0)
    }

    /// A single-qubit letter acting on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, letter: PauliLetter) -> Self {
        assert!(q < n, "qubit {q} out of range for {n} qubits");
        let (x, z) = letter.bits();
        Self::from_parts(n, (x as u64) << q, (z as u64) << q, 0)
    }

    /// The `i`-th Pauli of the (I, X, Y, Z)^⊗n basis, qubit 0 most significant.
    pub fn from_index(i: usize, n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
        }
        let size = 1usize << (2 * n);
        if i >= size {
            return Err(Error::IndexOutOfRange { index: i, n, size });
        }
        let (mut x, mut z) = (0u64, 0u64);
        for q in 0..n {
            let digit = (i >> (2 * (n - 1 - q))) & 3;
            let (xb, zb) = PauliLetter::from_digit(digit).bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Ok(Self::from_parts(n, x, z, 0))
    }

    /// Position in the Pauli basis; ignores the phase.
    pub fn index(&self) -> usize {
        (0..self.n).fold(0usize, |acc, q| (acc << 2) | self.letter(q).digit())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Power of `i` multiplying the Hermitian tensor product.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn letter(&self, q: usize) -> PauliLetter {
        PauliLetter::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// The same operator with its phase reset to `+1`.
    pub fn unsigned(&self) -> Self {
        Self { phase: 0, ..*self }
    }

    pub fn with_phase(&self, phase_exp: u8) -> Self {
        Self {
            phase: phase_exp & 3,
            ..*self
        }
    }

    /// Sign `±1` for Hermitian elements (`phase_exp ∈ {0, 2}`).
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Exact group product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let (xa, ya, za) = (x1 & !z1, x1 & z1, !x1 & z1);
        let (xb, yb, zb) = (x2 & !z2, x2 & z2, !x2 & z2);
        // Cyclic pairs (XY, YZ, ZX) contribute +i, anti-cyclic pairs -i.
        let plus = (xa & yb) | (ya & zb) | (za & xb);
        let minus = (xa & zb) | (ya & xb) | (za & yb);
        let phase = self.phase as i64 + other.phase as i64 + plus.count_ones() as i64
            - minus.count_ones() as i64;
        Self {
            n: self.n,
            x: x1 ^ x2,
            z: z1 ^ z2,
            phase: phase.rem_euclid(4) as u8,
        }
    }

    /// Action on a computational basis state: `P|b⟩ = c·|b'⟩`.
    pub fn apply_to_basis(&self, b: usize) -> (usize, Complex64) {
        let (xm, zm) = (self.basis_mask(self.x), self.basis_mask(self.z));
        let exp = self.phase as u32 + (self.x & self.z).count_ones() + 2 * (zm & b).count_ones();
        (b ^ xm, i_pow(exp))
    }

    // Maps qubit-indexed bits onto computational-basis bit positions.
    fn basis_mask(&self, bits: u64) -> usize {
        (0..self.n).fold(0usize, |acc, q| {
            acc | ((((bits >> q) & 1) as usize) << (self.n - 1 - q))
        })
    }

    /// Dense `2ⁿ×2ⁿ` matrix, phase included.
    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                n: self.n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let d = 1usize << self.n;
        let mut m = DMatrix::zeros(d, d);
        for b in 0..d {
            let (row, c) = self.apply_to_basis(b);
            m[(row, b)] = c;
        }
        Ok(m)
    }

    /// `tr[A·P]` using the monomial structure of `P`.
    pub fn trace_product(&self, a: &DMatrix<Complex64>) -> Complex64 {
        let d = a.nrows();
        (0..d)
            .map(|b| {
                let (row, c) = self.apply_to_basis(b);
                a[(b, row)] * c
            })
            .sum()
    }

    /// Letters only, e.g. `"XY"`.
    pub fn label(&self) -> String {
        (0..self.n).map(|q| self.letter(q).as_char()).collect()
    }
}

/// `i^k` as a complex number.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// The `i`-th basis Pauli on `n` qubits.
pub fn pauli_from_index(i: usize, n: usize) -> Result<PauliOperator> {
    PauliOperator::from_index(i, n)
}

pub fn pauli_multiply(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator> {
    a.multiply(b)
}

pub fn pauli_matrix(p: &PauliOperator) -> Result<DMatrix<Complex64>> {
    p.matrix()
}

/// Number of basis Paulis, `4ⁿ`.
pub fn basis_size(n: usize) -> usize {
    1usize << (2 * n)
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.label())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses labels such as `"XY"`, `"-Z"`, `"iX"`, `"-iYZ"`, `"+XX"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        if n == 0 {
            return Err(Error::Invalid("empty Pauli label".into()));
        }
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in body.chars().enumerate() {
            let letter = match ch {
                'I' => PauliLetter::I,
                'X' => PauliLetter::X,
                'Y' => PauliLetter::Y,
                'Z' => PauliLetter::Z,
                other => return Err(Error::Invalid(format!("bad Pauli letter {other:?}"))),
            };
            let (xb, zb) = letter.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Ok(Self::from_parts(n, x, z, phase))
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a.kronecker(b)
    }

    fn approx_eq(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
        a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(p, q)| (p - q).norm() < 1e-12)
    }

    #[test]
    fn index_examples() {
        assert_eq!(pauli_from_index(0, 1).unwrap().label(), "I");
        assert_eq!(pauli_from_index(3, 1).unwrap().label(), "Z");
        // 6 = 1·4 + 2: X on qubit 0, Y on qubit 1.
        assert_eq!(pauli_from_index(6, 2).unwrap().label(), "XY");
        assert!(matches!(
            pauli_from_index(16, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn index_roundtrip() {
        for n in 1..=3 {
            for i in 0..basis_size(n) {
                let p = pauli_from_index(i, n).unwrap();
                assert_eq!(p.index(), i);
                assert_eq!(p.phase_exp(), 0);
            }
        }
    }

    #[test]
    fn multiply_examples() {
        let x: PauliOperator = "X".parse().unwrap();
        let y: PauliOperator = "Y".parse().unwrap();
        let xy = pauli_multiply(&x, &y).unwrap();
        assert_eq!(xy.label(), "Z");
        assert_eq!(xy.phase_exp(), 1);
        for i in 0..16 {
            let p = pauli_from_index(i, 2).unwrap();
            let pp = p.multiply(&p).unwrap();
            assert!(pp.is_identity());
            assert_eq!(pp.phase_exp(), 0);
        }
    }

    #[test]
    fn xz_times_zz_matches_dense() {
        let a: PauliOperator = "XZ".parse().unwrap();
        let b: PauliOperator = "ZZ".parse().unwrap();
        let prod = a.multiply(&b).unwrap();
        // XZ = -iY, so (X⊗Z)(Z⊗Z) = (-iY)⊗I.
        assert_eq!(prod.label(), "YI");
        assert_eq!(prod.phase_exp(), 3);
        let dense = a.matrix().unwrap() * b.matrix().unwrap();
        assert!(approx_eq(&dense, &prod.matrix().unwrap()));
    }

    #[test]
    fn multiply_matches_dense_exhaustively() {
        for n in 1..=2 {
            for i in 0..basis_size(n) {
                for j in 0..basis_size(n) {
                    for ph in 0..4u8 {
                        let a = pauli_from_index(i, n).unwrap().with_phase(ph);
                        let b = pauli_from_index(j, n).unwrap();
                        let prod = a.multiply(&b).unwrap();
                        let dense = a.matrix().unwrap() * b.matrix().unwrap();
                        assert!(approx_eq(&dense, &prod.matrix().unwrap()), "{a} * {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn dense_matrices() {
        let i = pauli_from_index(0, 1).unwrap().matrix().unwrap();
        assert!(approx_eq(&i, &DMatrix::identity(2, 2)));
        let z = pauli_from_index(3, 1).unwrap().matrix().unwrap();
        assert!(approx_eq(
            &z,
            &DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
        ));
        let xm = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let ym = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let xy = pauli_from_index(6, 2).unwrap().matrix().unwrap();
        assert!(approx_eq(&xy, &kron(&xm, &ym)));
    }

    #[test]
    fn orthogonality() {
        for n in 1..=2 {
            let d = 1 << n;
            let mats: Vec<_> = (0..basis_size(n))
                .map(|i| pauli_from_index(i, n).unwrap().matrix().unwrap())
                .collect();
            for (i, a) in mats.iter().enumerate() {
                for (j, b) in mats.iter().enumerate() {
                    let t = (a * b).trace();
                    let expect = if i == j { d as f64 } else { 0.0 };
                    assert!((t - c(expect, 0.0)).norm() < 1e-12);
                    let p = pauli_from_index(j, n).unwrap();
                    assert!((p.trace_product(a) - t).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dense_limit() {
        let p = PauliOperator::identity(4);
        assert!(matches!(p.matrix(), Err(Error::TooManyQubits { .. })));
    }

    #[test]
    fn labels_roundtrip_through_json() {
        for s in ["XY", "-Z", "iX", "-iYZ", "IIZ"] {
            let p: PauliOperator = s.parse().unwrap();
            let js = serde_json::to_string(&p).unwrap();
            let back: PauliOperator = serde_json::from_str(&js).unwrap();
            assert_eq!(p, back);
        }
        assert!("XQ".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let a = PauliOperator::identity(1);
        let b = PauliOperator::identity(2);
        assert!(matches!(
            a.multiply(&b),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
