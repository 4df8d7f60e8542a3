//! Small dense linear-algebra helpers shared by the representation code.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry of `|U†U − I|`; also checks isometries.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    let d = u.ncols();
    let prod = u.adjoint() * u;
    let id = CMatrix::identity(d, d);
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|OᵀO − I|` for a real matrix.
pub fn orthogonal_deviation(o: &RMatrix) -> f64 {
    let d = o.nrows();
    let prod = o.transpose() * o;
    (prod - RMatrix::identity(d, d))
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn spectral_norm(m: &RMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn min_singular_value(m: &RMatrix) -> f64 {
    m.singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Numerical rank with a relative singular-value cutoff.
pub fn rank(m: &RMatrix, rel_tol: f64) -> usize {
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-random isometry `V: ℂ^cols → ℂ^rows` (`rows ≥ cols`), `V†V = I`.
///
/// QR of a complex Ginibre matrix, with the phases of `R`'s diagonal pushed
/// back into `Q` so the distribution is exactly Haar.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    haar_isometry(d, d, rng)
}

/// Haar-random pure state as a column vector.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let g = ginibre(d, 1, rng);
    let norm = g.norm();
    g.iter().map(|z| z / norm).collect()
}

/// Converts nested `[re, im]` rows into a complex matrix.
pub fn cmatrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Option<CMatrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if nr == 0 || rows.iter().any(|r| r.len() != nc) {
        return None;
    }
    Some(CMatrix::from_fn(nr, nc, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn cmatrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn rmatrix_from_rows(rows: &[Vec<f64>]) -> Option<RMatrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if nr == 0 || rows.iter().any(|r| r.len() != nc) {
        return None;
    }
    Some(RMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

pub fn rmatrix_to_rows(m: &RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff(a: &RMatrix, b: &RMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_isometry_is_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (rows, cols) in [(2, 2), (8, 2), (16, 4), (64, 8)] {
            let v = haar_isometry(rows, cols, &mut rng);
            assert!(unitary_deviation(&v) < 1e-12, "{rows}x{cols}");
        }
    }

    #[test]
    fn eigenvalues_of_pauli_z() {
        let z = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let ev = hermitian_eigenvalues(&z);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_of_projector() {
        let mut m = RMatrix::zeros(4, 4);
        m[(0, 0)] = 1.0;
        m[(1, 1)] = 1.0;
        assert_eq!(rank(&m, 1e-10), 2);
        assert_eq!(rank(&RMatrix::zeros(3, 3), 1e-10), 0);
    }

    #[test]
    fn pair_roundtrip() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 2.), c(3., 4.), c(5., 6.), c(7., 8.)]);
        assert_eq!(cmatrix_from_pairs(&cmatrix_to_pairs(&m)).unwrap(), m);
        assert!(cmatrix_from_pairs(&[vec![[0.0, 0.0]], vec![]]).is_none());
    }
}
