use rand::Rng;

use super::{sample_uniform_clifford, CliffordElement};
use crate::channel::PauliLiouvilleMap;
use crate::error::{Error, Result};
use crate::linalg::{self, RMatrix};

const RANK_TOL: f64 = 1e-9;

/// Dimension of the span of unital TP maps on `n` qubits, `(d²−1)² + 1`.
pub fn unital_span_dimension(n: usize) -> usize {
    let d2 = 1usize << (2 * n);
    (d2 - 1) * (d2 - 1) + 1
}

/// Rank of a list of PL matrices, each flattened to a vector.
pub fn map_rank(maps: &[PauliLiouvilleMap]) -> usize {
    if maps.is_empty() {
        return 0;
    }
    let len = maps[0].matrix().len();
    let stacked = RMatrix::from_fn(maps.len(), len, |r, col| maps[r].matrix()[col]);
    // SVD cost grows with the short side; transpose tall inputs.
    if stacked.nrows() > stacked.ncols() {
        linalg::rank(&stacked.transpose(), RANK_TOL)
    } else {
        linalg::rank(&stacked, RANK_TOL)
    }
}

pub fn pl_rank(set: &[CliffordElement]) -> usize {
    let maps: Vec<PauliLiouvilleMap> = set
        .iter()
        .map(|c| c.pl().expect("dense PL form").clone())
        .collect();
    map_rank(&maps)
}

/// Draws uniform Cliffords, keeping each one that enlarges the span, until
/// the span reaches the unital dimension.
pub fn greedy_spanning_set<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    max_draws: usize,
) -> Result<Vec<CliffordElement>> {
    let target = unital_span_dimension(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(target);
    let mut chosen = Vec::with_capacity(target);
    for _ in 0..max_draws {
        let c = sample_uniform_clifford(n, rng);
        let mut v: Vec<f64> = c.pl()?.matrix().iter().copied().collect();
        // Two rounds of Gram-Schmidt for stability.
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            chosen.push(c);
            if chosen.len() == target {
                return Ok(chosen);
            }
        }
    }
    Err(Error::RankDeficient {
        rank: chosen.len(),
        required: target,
    })
}
