//! Pauli-Liouville and χ representations of quantum maps.
//!
//! `PL[j][i] = tr[E(P_i) P_j] / d` with the Pauli basis ordering of
//! [`crate::pauli`]. Composition is matrix multiplication, `A∘B ↦ A·B`, with
//! `B` acting first. The χ matrix is defined by `E(ρ) = Σ_ab χ_ab P_a ρ P_b`,
//! so a trace-preserving map has `tr χ = 1` and the identity map has
//! `χ_00 = 1`.

mod library;

pub use library::{
    amplitude_damping, dephasing, depolarizing, embed_unitary, gate_unitary, make_channel, random_cptp,
    rotation_unitary, t_unitary, ChannelSpec, GateName,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, RMatrix};
use crate::pauli::{basis_size, PauliOperator, MAX_DENSE_QUBITS};

/// Default tolerance for the minimum χ/Choi eigenvalue in CP checks.
pub const CP_TOL: f64 = 1e-9;

/// Tolerance for accepting a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Tolerance for `Σ K†K = I` when a Kraus list claims to be trace preserving.
pub const KRAUS_TP_TOL: f64 = 1e-8;

/// Real `4ⁿ×4ⁿ` Pauli-Liouville matrix of a map on `n ≤ 3` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlRepr", into = "PlRepr")]
pub struct PauliLiouvilleMap {
    n: usize,
    mat: RMatrix,
}

#[derive(Serialize, Deserialize)]
struct PlRepr {
    n: usize,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<PlRepr> for PauliLiouvilleMap {
    type Error = Error;

    fn try_from(r: PlRepr) -> Result<Self> {
        let mat = linalg::rmatrix_from_rows(&r.matrix)
            .ok_or_else(|| Error::Invalid("ragged PL matrix".into()))?;
        PauliLiouvilleMap::new(r.n, mat)
    }
}

impl From<PauliLiouvilleMap> for PlRepr {
    fn from(m: PauliLiouvilleMap) -> Self {
        PlRepr {
            n: m.n,
            matrix: linalg::rmatrix_to_rows(&m.mat),
        }
    }
}

fn check_dense_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

fn qubits_for_dim(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::Invalid(format!("dimension {d} is not 2^n")));
    }
    let n = d.trailing_zeros() as usize;
    check_dense_qubits(n)?;
    Ok(n)
}

fn paulis(n: usize) -> Vec<PauliOperator> {
    (0..basis_size(n))
        .map(|i| PauliOperator::from_index(i, n).expect("index in range"))
        .collect()
}

impl PauliLiouvilleMap {
    pub fn new(n: usize, mat: RMatrix) -> Result<Self> {
        check_dense_qubits(n)?;
        let size = basis_size(n);
        if mat.nrows() != size || mat.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { n, mat })
    }

    /// Infers the qubit count from the matrix size.
    pub fn from_matrix(mat: RMatrix) -> Result<Self> {
        let size = mat.nrows();
        if size < 4 || !size.is_power_of_two() || size.trailing_zeros() % 2 != 0 {
            return Err(Error::Invalid(format!(
                "PL matrix size {size} is not 4^n"
            )));
        }
        Self::new(size.trailing_zeros() as usize / 2, mat)
    }

    pub fn identity(n: usize) -> Self {
        let size = basis_size(n);
        Self::new(n, RMatrix::identity(size, size)).expect("valid qubit count")
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Hilbert-space dimension `d = 2ⁿ`.
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> RMatrix {
        self.mat
    }

    /// `A∘B`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        compose(self, other)
    }

    /// PL matrix of the adjoint map (the inverse, for unitary maps).
    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            mat: self.mat.transpose(),
        }
    }

    pub fn tp_deviation(&self) -> f64 {
        let row = self.mat.row(0);
        row.iter()
            .enumerate()
            .map(|(i, &v)| if i == 0 { (v - 1.0).abs() } else { v.abs() })
            .fold(0.0, f64::max)
    }

    pub fn is_tp(&self, tol: f64) -> bool {
        self.tp_deviation() <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.mat
            .column(0)
            .iter()
            .enumerate()
            .all(|(i, &v)| if i == 0 { (v - 1.0).abs() <= tol } else { v.abs() <= tol })
    }

    /// The `(d²−1)×(d²−1)` block acting on traceless Paulis.
    pub fn unital_block(&self) -> RMatrix {
        let m = self.mat.nrows() - 1;
        self.mat.view((1, 1), (m, m)).into_owned()
    }

    /// The non-unital vector τ (first column below the corner).
    pub fn nonunital_vector(&self) -> Vec<f64> {
        self.mat.column(0).iter().skip(1).copied().collect()
    }

    /// Builds `1 ⊕ block` as a unital, trace-preserving map.
    pub fn from_unital_block(n: usize, block: &RMatrix) -> Result<Self> {
        check_dense_qubits(n)?;
        let size = basis_size(n);
        if block.nrows() != size - 1 || block.ncols() != size - 1 {
            return Err(Error::DimensionMismatch {
                expected: size - 1,
                found: block.nrows(),
            });
        }
        let mut mat = RMatrix::zeros(size, size);
        mat[(0, 0)] = 1.0;
        mat.view_mut((1, 1), (size - 1, size - 1)).copy_from(block);
        Self::new(n, mat)
    }

    /// Tensor product `self ⊗ other`; `self` acts on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Self::new(self.n + other.n, self.mat.kronecker(&other.mat))
    }

    /// Places a single-qubit map on qubit `target` of an `n`-qubit register.
    pub fn embed(&self, n: usize, target: usize) -> Result<Self> {
        if self.n != 1 {
            return Err(Error::Invalid("only single-qubit maps can be embedded".into()));
        }
        if target >= n {
            return Err(Error::Invalid(format!("target qubit {target} out of range for {n} qubits")));
        }
        let id = Self::identity(1);
        let mut out: Option<Self> = None;
        for q in 0..n {
            let factor = if q == target { self } else { &id };
            out = Some(match out {
                None => factor.clone(),
                Some(acc) => acc.tensor(factor)?,
            });
        }
        out.ok_or_else(|| Error::Invalid("empty register".into()))
    }

    /// Applies the map to a Pauli-coordinate vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let out = &self.mat * nalgebra::DVector::from_column_slice(v);
        out.iter().copied().collect()
    }
}

pub fn compose(a: &PauliLiouvilleMap, b: &PauliLiouvilleMap) -> Result<PauliLiouvilleMap> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: b.n,
        });
    }
    Ok(PauliLiouvilleMap {
        n: a.n,
        mat: &a.mat * &b.mat,
    })
}

/// PL matrix of the Kraus map `ρ ↦ Σ K ρ K†`.
pub fn pl_from_kraus(ops: &[CMatrix]) -> Result<PauliLiouvilleMap> {
    let first = ops
        .first()
        .ok_or_else(|| Error::Invalid("empty Kraus list".into()))?;
    let d = first.nrows();
    let n = qubits_for_dim(d)?;
    for k in ops {
        if k.nrows() != d || k.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: k.nrows().max(k.ncols()),
            });
        }
    }
    let ps = paulis(n);
    let pmats: Vec<CMatrix> = ps.iter().map(|p| p.matrix().expect("dense")).collect();
    let size = ps.len();
    let mut mat = RMatrix::zeros(size, size);
    for (i, pi) in pmats.iter().enumerate() {
        let mut image = CMatrix::zeros(d, d);
        for k in ops {
            image += k * pi * k.adjoint();
        }
        for (j, pj) in ps.iter().enumerate() {
            mat[(j, i)] = pj.trace_product(&image).re / d as f64;
        }
    }
    PauliLiouvilleMap::new(n, mat)
}

/// PL matrix of `ρ ↦ UρU†`.
pub fn pl_from_unitary(u: &CMatrix) -> Result<PauliLiouvilleMap> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: u.ncols(),
        });
    }
    let deviation = linalg::unitary_deviation(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    pl_from_kraus(std::slice::from_ref(u))
}

/// Complex Hermitian χ matrix, `E(ρ) = Σ_ab χ_ab P_a ρ P_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    n: usize,
    mat: CMatrix,
}

impl ChiMatrix {
    pub fn new(n: usize, mat: CMatrix) -> Result<Self> {
        check_dense_qubits(n)?;
        let size = basis_size(n);
        if mat.nrows() != size || mat.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { n, mat })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn chi00(&self) -> f64 {
        self.mat[(0, 0)].re
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Smallest eigenvalue; the map is CP iff this is nonnegative.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.mat)[0]
    }
}

// tr[P_a P_b P_c P_e] for basis Paulis, which is d·i^k or zero.
fn trace4(a: &PauliOperator, b: &PauliOperator, cc: &PauliOperator, e: &PauliOperator) -> Complex64 {
    let prod = a.mul_unchecked(b).mul_unchecked(cc).mul_unchecked(e);
    if prod.is_identity() {
        crate::pauli::i_pow(prod.phase_exp() as u32) * (1u64 << a.num_qubits()) as f64
    } else {
        c(0.0, 0.0)
    }
}

pub fn chi_from_pl(p: &PauliLiouvilleMap) -> ChiMatrix {
    let n = p.n;
    let d = p.dim() as f64;
    let ps = paulis(n);
    let size = ps.len();
    let norm = 1.0 / (d * d * d);
    let mut mat = CMatrix::zeros(size, size);
    for a in 0..size {
        for b in 0..size {
            let mut acc = c(0.0, 0.0);
            for j in 0..size {
                // Only P_i ∝ P_a P_j P_b contributes.
                let i = a ^ j ^ b;
                let v = p.mat[(j, i)];
                if v != 0.0 {
                    acc += trace4(&ps[a], &ps[j], &ps[b], &ps[i]) * v;
                }
            }
            mat[(a, b)] = acc * norm;
        }
    }
    ChiMatrix { n, mat }
}

pub fn pl_from_chi(chi: &ChiMatrix) -> PauliLiouvilleMap {
    let n = chi.n;
    let d = (1usize << n) as f64;
    let ps = paulis(n);
    let size = ps.len();
    let mut mat = RMatrix::zeros(size, size);
    for j in 0..size {
        for i in 0..size {
            let mut acc = c(0.0, 0.0);
            for a in 0..size {
                let b = a ^ i ^ j;
                let x = chi.mat[(a, b)];
                if x != c(0.0, 0.0) {
                    acc += x * trace4(&ps[a], &ps[i], &ps[b], &ps[j]);
                }
            }
            mat[(j, i)] = acc.re / d;
        }
    }
    PauliLiouvilleMap { n, mat }
}

/// Normalized Choi matrix `(1/d) Σ_ij PL[j][i] P_j ⊗ P_iᵀ`, unit trace for TP maps.
pub fn choi_from_pl(p: &PauliLiouvilleMap) -> CMatrix {
    let n = p.n;
    let d = p.dim();
    let ps = paulis(n);
    let mats: Vec<CMatrix> = ps.iter().map(|q| q.matrix().expect("dense")).collect();
    let mut out = CMatrix::zeros(d * d, d * d);
    for (j, pj) in mats.iter().enumerate() {
        for (i, pi) in mats.iter().enumerate() {
            let v = p.mat[(j, i)];
            if v != 0.0 {
                out += pj.kronecker(&pi.transpose()) * c(v / (d * d) as f64, 0.0);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpVerdict {
    pub cp: bool,
    pub tp: bool,
    pub min_choi_eigenvalue: f64,
}

/// CP and TP verdict. The reported eigenvalue is that of χ, which has the
/// same spectrum as the unit-trace Choi matrix.
pub fn is_cptp(e: &PauliLiouvilleMap, tol: f64) -> CptpVerdict {
    let min = chi_from_pl(e).min_eigenvalue();
    CptpVerdict {
        cp: min >= -tol,
        tp: e.is_tp(tol),
        min_choi_eigenvalue: min,
    }
}

/// Zeroes the non-unital vector of a TP map.
pub fn unital_part(e: &PauliLiouvilleMap) -> Result<PauliLiouvilleMap> {
    let deviation = e.tp_deviation();
    if deviation > 1e-9 {
        return Err(Error::NotTracePreserving { deviation });
    }
    let mut mat = e.mat.clone();
    for j in 1..mat.nrows() {
        mat[(j, 0)] = 0.0;
    }
    Ok(PauliLiouvilleMap { n: e.n, mat })
}

/// Average gate fidelity of `e` to the unitary map `u`.
pub fn average_fidelity(e: &PauliLiouvilleMap, u: &PauliLiouvilleMap) -> Result<f64> {
    if e.n != u.n {
        return Err(Error::DimensionMismatch {
            expected: e.n,
            found: u.n,
        });
    }
    let deviation = linalg::orthogonal_deviation(&u.mat);
    if deviation > UNITARY_TOL.max(1e-9) {
        return Err(Error::NotUnitary { deviation });
    }
    let d = e.dim() as f64;
    let overlap = e.mat.component_mul(&u.mat).sum();
    Ok((overlap + d) / (d * (d + 1.0)))
}

fn check_unit(what: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(Error::out_of_range(what, v, "[0, 1]"));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Invalid(format!("dimension {d} must be at least 2")));
    }
    Ok(())
}

/// `F̄ = (χ_00 d + 1)/(d + 1)`.
pub fn chi00_to_fidelity(chi00: f64, d: usize) -> Result<f64> {
    check_unit("chi00", chi00)?;
    check_dim(d)?;
    let d = d as f64;
    Ok((chi00 * d + 1.0) / (d + 1.0))
}

/// Inverse of [`chi00_to_fidelity`].
pub fn fidelity_to_chi00(f: f64, d: usize) -> Result<f64> {
    check_unit("fidelity", f)?;
    check_dim(d)?;
    let d = d as f64;
    Ok((f * (d + 1.0) - 1.0) / d)
}

/// RB decay parameter `p = (d F̄ − 1)/(d − 1)`.
pub fn decay_parameter(f: f64, d: usize) -> Result<f64> {
    check_unit("fidelity", f)?;
    check_dim(d)?;
    let d = d as f64;
    Ok((d * f - 1.0) / (d - 1.0))
}

/// `F̄ = ((d − 1)p + 1)/d`; no range check since estimates may overshoot.
pub fn fidelity_from_decay(p: f64, d: usize) -> f64 {
    let d = d as f64;
    ((d - 1.0) * p + 1.0) / d
}

/// Pauli coordinates `r_k = tr(ρ P_k)` of a density matrix.
pub fn pauli_vector(rho: &CMatrix) -> Result<Vec<f64>> {
    let n = qubits_for_dim(rho.nrows())?;
    Ok(paulis(n).iter().map(|p| p.trace_product(rho).re).collect())
}

/// Inverse of [`pauli_vector`]: `ρ = (1/d) Σ r_k P_k`.
pub fn density_from_pauli_vector(n: usize, r: &[f64]) -> Result<CMatrix> {
    check_dense_qubits(n)?;
    let d = 1usize << n;
    let ps = paulis(n);
    if r.len() != ps.len() {
        return Err(Error::DimensionMismatch {
            expected: ps.len(),
            found: r.len(),
        });
    }
    let mut rho = DMatrix::zeros(d, d);
    for (p, &rk) in ps.iter().zip(r) {
        if rk != 0.0 {
            rho += p.matrix().expect("dense") * c(rk / d as f64, 0.0);
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hadamard_pl() -> RMatrix {
        RMatrix::from_row_slice(
            4,
            4,
            &[
                1., 0., 0., 0., //
                0., 0., 0., 1., //
                0., 0., -1., 0., //
                0., 1., 0., 0.,
            ],
        )
    }

    #[test]
    fn hadamard_pl_matches_table() {
        let h = gate_unitary(GateName::H);
        let pl = pl_from_unitary(&h).unwrap();
        assert!(linalg::max_abs_diff(pl.matrix(), &hadamard_pl()) < 1e-12);
    }

    #[test]
    fn identity_unitary() {
        let pl = pl_from_unitary(&CMatrix::identity(4, 4)).unwrap();
        assert!(linalg::max_abs_diff(pl.matrix(), PauliLiouvilleMap::identity(2).matrix()) < 1e-12);
    }

    #[test]
    fn t_map_rotates_xy_plane() {
        let pl = pl_from_unitary(&t_unitary()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // tr[T X T† X]/2 = cos(π/4), tr[T X T† Y]/2 = sin(π/4).
        let expect = RMatrix::from_row_slice(
            4,
            4,
            &[1., 0., 0., 0., 0., s, -s, 0., 0., s, s, 0., 0., 0., 0., 1.],
        );
        assert!(linalg::max_abs_diff(pl.matrix(), &expect) < 1e-12);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0.5, 0.)]);
        assert!(matches!(pl_from_unitary(&m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn chi_of_identity_and_depolarizing() {
        let chi = chi_from_pl(&PauliLiouvilleMap::identity(1));
        assert!((chi.matrix()[(0, 0)] - c(1., 0.)).norm() < 1e-14);
        assert!((chi.trace() - c(1., 0.)).norm() < 1e-14);
        let delta = 0.7;
        let chi = chi_from_pl(&depolarizing(1, delta).unwrap());
        for a in 0..4 {
            for b in 0..4 {
                let expect = match (a, b) {
                    (0, 0) => (1.0 + 3.0 * delta) / 4.0,
                    _ if a == b => (1.0 - delta) / 4.0,
                    _ => 0.0,
                };
                assert!((chi.matrix()[(a, b)] - c(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn chi_roundtrip_two_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let seed = rand::Rng::random(&mut rng);
            let e = random_cptp(2, seed, None).unwrap();
            let back = pl_from_chi(&chi_from_pl(&e));
            assert!(linalg::max_abs_diff(back.matrix(), e.matrix()) < 1e-12);
        }
    }

    #[test]
    fn choi_spectrum_matches_chi() {
        let e = random_cptp(1, 5, Some(2)).unwrap();
        let mut a = linalg::hermitian_eigenvalues(&choi_from_pl(&e));
        let mut b = linalg::hermitian_eigenvalues(chi_from_pl(&e).matrix());
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_examples() {
        let h = pl_from_unitary(&gate_unitary(GateName::H)).unwrap();
        let hh = compose(&h, &h).unwrap();
        assert!(linalg::max_abs_diff(hh.matrix(), PauliLiouvilleMap::identity(1).matrix()) < 1e-12);
        let d = compose(&depolarizing(1, 0.9).unwrap(), &depolarizing(1, 0.5).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(d.matrix(), depolarizing(1, 0.45).unwrap().matrix()) < 1e-14);
        let e = random_cptp(1, 1, None).unwrap();
        assert_eq!(compose(&e, &PauliLiouvilleMap::identity(1)).unwrap(), e);
        assert!(compose(&e, &PauliLiouvilleMap::identity(2)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let id = PauliLiouvilleMap::identity(1);
        assert!((average_fidelity(&id, &id).unwrap() - 1.0).abs() < 1e-15);
        let dep = depolarizing(1, 0.9).unwrap();
        assert!((average_fidelity(&dep, &id).unwrap() - 0.95).abs() < 1e-15);
        let h = pl_from_unitary(&gate_unitary(GateName::H)).unwrap();
        assert!((average_fidelity(&h, &id).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            average_fidelity(&id, &dep),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn scalar_conversions() {
        assert!((chi00_to_fidelity(1.0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity_to_chi00(1.0 / 3.0, 2).unwrap().abs() < 1e-15);
        assert!((chi00_to_fidelity(0.995, 2).unwrap() - 2.99 / 3.0).abs() < 1e-15);
        assert!((decay_parameter(1.0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((decay_parameter(1.0 / 3.0, 2).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!((decay_parameter(2.0 / 3.0, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(decay_parameter(1.2, 2).is_err());
        assert!(chi00_to_fidelity(-0.1, 2).is_err());
        assert!((fidelity_from_decay(-1.0 / 3.0, 2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unital_part_of_amplitude_damping() {
        let g: f64 = 0.36;
        let ad = amplitude_damping(1, 0, g).unwrap();
        assert!((ad.matrix()[(3, 0)] - g).abs() < 1e-14);
        let u = unital_part(&ad).unwrap();
        let s = (1.0 - g).sqrt();
        let expect = RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, s, s, 1.0 - g]));
        assert!(linalg::max_abs_diff(u.matrix(), &expect) < 1e-14);
        let h = pl_from_unitary(&gate_unitary(GateName::H)).unwrap();
        assert_eq!(unital_part(&h).unwrap(), h);
        let mut bad = ad.clone().into_matrix();
        bad[(0, 1)] = 0.1;
        let bad = PauliLiouvilleMap::new(1, bad).unwrap();
        assert!(matches!(unital_part(&bad), Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn cptp_verdicts() {
        let v = is_cptp(&PauliLiouvilleMap::identity(1), CP_TOL);
        assert!(v.cp && v.tp && v.min_choi_eigenvalue.abs() < 1e-12);
        let mut m = RMatrix::identity(4, 4);
        for k in 1..4 {
            m[(k, k)] = 1.2;
        }
        let v = is_cptp(&PauliLiouvilleMap::new(1, m).unwrap(), CP_TOL);
        assert!(!v.cp && v.tp);
        assert!((v.min_choi_eigenvalue + 0.05).abs() < 1e-12);
    }

    #[test]
    fn embed_matches_kronecker() {
        let ad = amplitude_damping(1, 0, 0.3).unwrap();
        let e = ad.embed(2, 1).unwrap();
        let expect = PauliLiouvilleMap::identity(1).tensor(&ad).unwrap();
        assert_eq!(e, expect);
        assert!(ad.embed(2, 2).is_err());
    }

    #[test]
    fn pauli_vector_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = linalg::haar_state(4, &mut rng);
        let v = nalgebra::DVector::from_vec(psi);
        let rho = &v * v.adjoint();
        let r = pauli_vector(&rho).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
        let back = density_from_pauli_vector(2, &r).unwrap();
        assert!((back - rho).norm() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let e = depolarizing(1, 0.5).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        let back: PauliLiouvilleMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<PauliLiouvilleMap>(r#"{"n":1,"matrix":[[1.0]]}"#).is_err());
    }
}
