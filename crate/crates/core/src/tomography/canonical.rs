use serde::{Deserialize, Serialize};

use crate::channel::{is_cptp, PauliLiouvilleMap};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;

/// Tolerance on trace preservation and unitality of canonical-form inputs.
const STRUCTURE_TOL: f64 = 1e-8;

/// `E = U ∘ Ĕ ∘ V` with `Ĕ` diagonal on the traceless block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub lambdas: [f64; 3],
    pub taus: [f64; 3],
    pub u_rot: PauliLiouvilleMap,
    pub v_rot: PauliLiouvilleMap,
}

impl CanonicalForm {
    /// The diagonal map `Ĕ`.
    pub fn diagonal_map(&self) -> PauliLiouvilleMap {
        let mut m = RMatrix::identity(4, 4);
        for i in 0..3 {
            m[(i + 1, 0)] = self.taus[i];
            m[(i + 1, i + 1)] = self.lambdas[i];
        }
        PauliLiouvilleMap::new(1, m).expect("4×4")
    }

    /// `U ∘ Ĕ ∘ V`.
    pub fn reconstruct(&self) -> PauliLiouvilleMap {
        let m = self.u_rot.matrix() * self.diagonal_map().matrix() * self.v_rot.matrix();
        PauliLiouvilleMap::new(1, m).expect("4×4")
    }
}

fn rotation_map(r: &RMatrix) -> PauliLiouvilleMap {
    PauliLiouvilleMap::from_unital_block(1, r).expect("3×3 block")
}

fn flip_pair(w: &mut RMatrix, vt: &mut RMatrix, i: usize, j: usize) {
    for k in [i, j] {
        w.column_mut(k).neg_mut();
        vt.row_mut(k).neg_mut();
    }
}

/// Signed singular value decomposition of the traceless block.
///
/// Rotations are proper (`det = +1`), the sign of the determinant sits on
/// the smallest `|λ_i|`, `λ` is ordered by decreasing magnitude, and the
/// remaining freedom (flipping two axes at once) is used to make `t₂, t₃`
/// non-negative.
pub fn canonical_form(e: &PauliLiouvilleMap) -> Result<CanonicalForm> {
    if e.num_qubits() != 1 {
        return Err(Error::Invalid("canonical form is defined for single-qubit maps".into()));
    }
    let deviation = e.tp_deviation();
    if deviation > STRUCTURE_TOL {
        return Err(Error::NotTracePreserving { deviation });
    }
    let t = e.unital_block();
    let svd = t.clone().svd(true, true);
    let (mut w, mut vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();

    // Order by decreasing singular value.
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    w = RMatrix::from_fn(3, 3, |r, c| w[(r, order[c])]);
    vt = RMatrix::from_fn(3, 3, |r, c| vt[(order[r], c)]);
    s = order.iter().map(|&i| s[i]).collect();

    if w.determinant() < 0.0 {
        w.column_mut(2).neg_mut();
        s[2] = -s[2];
    }
    if vt.determinant() < 0.0 {
        vt.row_mut(2).neg_mut();
        s[2] = -s[2];
    }
    let tau = nalgebra::DVector::from_column_slice(&e.nonunital_vector());
    let mut tv = w.transpose() * &tau;
    if tv[1] < 0.0 {
        flip_pair(&mut w, &mut vt, 0, 1);
        tv[0] = -tv[0];
        tv[1] = -tv[1];
    }
    if tv[2] < 0.0 {
        flip_pair(&mut w, &mut vt, 0, 2);
        tv[0] = -tv[0];
        tv[2] = -tv[2];
    }
    Ok(CanonicalForm {
        lambdas: [s[0], s[1], s[2]],
        taus: [tv[0], tv[1], tv[2]],
        u_rot: rotation_map(&w),
        v_rot: rotation_map(&vt),
    })
}

/// `1 − |λ_i|`, the largest non-unital component along each canonical axis.
pub fn nonunital_bounds(lambdas: [f64; 3]) -> [f64; 3] {
    lambdas.map(|l| 1.0 - l.abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpWitness {
    pub cp: bool,
    pub via_conditions: bool,
    pub via_choi: bool,
    pub lambdas: [f64; 3],
    /// Smallest slack among the conditions (negative when violated).
    pub condition_margin: f64,
    pub min_choi_eigenvalue: f64,
}

/// Slacks of the unital (`t = 0`) CP conditions for a diagonal qubit map:
/// `(1 ± λ₃)² − (λ₁ ± λ₂)²`, the quartic
/// `(1 − Σλ_i²)² − 4(λ₁²λ₂² + λ₂²λ₃² + λ₃²λ₁² − 2λ₁λ₂λ₃)`, and `1 − |λ_i|`.
fn condition_slacks(l: [f64; 3]) -> [f64; 6] {
    let [a, b, c] = l;
    let sq = a * a + b * b + c * c;
    [
        (1.0 + c).powi(2) - (a + b).powi(2),
        (1.0 - c).powi(2) - (a - b).powi(2),
        (1.0 - sq).powi(2) - 4.0 * (a * a * b * b + b * b * c * c + c * c * a * a - 2.0 * a * b * c),
        1.0 - a.abs(),
        1.0 - b.abs(),
        1.0 - c.abs(),
    ]
}

/// CP test of a single-qubit unital map by the canonical-form conditions,
/// cross-checked against the eigenvalues of its process matrix.
pub fn cp_witness_single_qubit(e_prime: &PauliLiouvilleMap, tol: f64) -> Result<CpWitness> {
    if e_prime.num_qubits() != 1 {
        return Err(Error::Invalid("CP witness is defined for single-qubit maps".into()));
    }
    if !e_prime.is_unital(STRUCTURE_TOL) {
        return Err(Error::Invalid("CP witness expects a unital map".into()));
    }
    let form = canonical_form(e_prime)?;
    let margin = condition_slacks(form.lambdas)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let via_conditions = margin >= -tol;
    let min_eig = is_cptp(e_prime, tol).min_choi_eigenvalue;
    let via_choi = min_eig >= -tol;
    if via_conditions != via_choi {
        // Near the boundary both tests are within round-off of zero.
        let boundary = margin.abs() <= 16.0 * tol.max(1e-12) || min_eig.abs() <= 4.0 * tol.max(1e-12);
        if !boundary {
            return Err(Error::Inconsistent(format!(
                "condition margin {margin:.3e} and Choi eigenvalue {min_eig:.3e} disagree"
            )));
        }
    }
    Ok(CpWitness {
        cp: via_choi,
        via_conditions,
        via_choi,
        lambdas: form.lambdas,
        condition_margin: margin,
        min_choi_eigenvalue: min_eig,
    })
}
