use std::sync::OnceLock;

use rand::Rng;

use super::{single_qubit_table, CliffordElement};
use crate::channel::GateName;
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliOperator};

fn local_gate(name: GateName) -> &'static CliffordElement {
    static CACHE: OnceLock<[CliffordElement; 3]> = OnceLock::new();
    let gates = CACHE.get_or_init(|| {
        [GateName::H, GateName::Sdg, GateName::SqrtX]
            .map(|g| CliffordElement::gate(g, 1, &[0]).expect("single-qubit Clifford"))
    });
    match name {
        GateName::H => &gates[0],
        GateName::Sdg => &gates[1],
        GateName::SqrtX => &gates[2],
        _ => unreachable!("only H, SDG, SX are cached"),
    }
}

/// Accumulates a Clifford `D` gate by gate while tracking the images of a
/// few Paulis under it.
struct Reducer {
    d: CliffordElement,
    tracked: Vec<PauliOperator>,
}

impl Reducer {
    fn new(tracked: Vec<PauliOperator>) -> Self {
        let n = tracked[0].num_qubits();
        Self {
            d: CliffordElement::identity(n),
            tracked,
        }
    }

    fn n(&self) -> usize {
        self.d.num_qubits()
    }

    fn apply(&mut self, g: CliffordElement) {
        for t in &mut self.tracked {
            *t = g.conjugate(t);
        }
        self.d = g.compose_unchecked(&self.d);
    }

    fn local(&mut self, name: GateName, q: usize) {
        let n = self.n();
        self.apply(local_gate(name).embed(n, &[q]).expect("qubit in range"));
    }

    fn two(&mut self, name: GateName, a: usize, b: usize) {
        let n = self.n();
        self.apply(CliffordElement::gate(name, n, &[a, b]).expect("qubits in range"));
    }

    /// Maps tracked Pauli `which` to `±X_0` with local rotations to X form,
    /// a CNOT ladder onto the lowest support qubit, and a final SWAP.
    fn reduce_to_x0(&mut self, which: usize) {
        let n = self.n();
        for q in 0..n {
            match self.tracked[which].letter(q) {
                PauliLetter::Z => self.local(GateName::H, q),
                PauliLetter::Y => self.local(GateName::Sdg, q),
                _ => {}
            }
        }
        let support: Vec<usize> = (0..n)
            .filter(|&q| self.tracked[which].letter(q) == PauliLetter::X)
            .collect();
        let pivot = support[0];
        for &q in &support[1..] {
            self.two(GateName::Cnot, pivot, q);
        }
        if pivot != 0 {
            self.two(GateName::Swap, 0, pivot);
        }
        debug_assert_eq!(self.tracked[which].unsigned(), PauliOperator::single(n, 0, PauliLetter::X));
    }

    /// With tracked 0 at `±X_0`, maps tracked 1 (anticommuting) to `±Z_0`
    /// without disturbing `X_0`.
    fn reduce_partner_to_z0(&mut self) {
        let n = self.n();
        if self.tracked[1].letter(0) == PauliLetter::Y {
            self.local(GateName::SqrtX, 0);
        }
        for q in 1..n {
            match self.tracked[1].letter(q) {
                PauliLetter::I => continue,
                PauliLetter::X => self.local(GateName::H, q),
                PauliLetter::Y => self.local(GateName::SqrtX, q),
                PauliLetter::Z => {}
            }
            self.two(GateName::Cnot, q, 0);
        }
        debug_assert_eq!(self.tracked[1].unsigned(), PauliOperator::single(n, 0, PauliLetter::Z));
    }
}

fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliOperator {
    let mask = (1u64 << n) - 1;
    loop {
        let x = rng.random::<u64>() & mask;
        let z = rng.random::<u64>() & mask;
        if x | z != 0 {
            let phase = if rng.random::<bool>() { 2 } else { 0 };
            return PauliOperator::from_parts(n, x, z, phase);
        }
    }
}

/// A Clifford sending `X_0 ↦ p` and `Z_0 ↦ q` exactly (signs included).
fn clifford_with_first_pair(p: PauliOperator, q: PauliOperator) -> CliffordElement {
    let n = p.num_qubits();
    let mut r = Reducer::new(vec![p, q]);
    r.reduce_to_x0(0);
    r.reduce_partner_to_z0();
    let mut c = r.d.inverse();
    if c.conjugate(&PauliOperator::single(n, 0, PauliLetter::X)) != p {
        c = c.compose_unchecked(&CliffordElement::from_pauli(&PauliOperator::single(n, 0, PauliLetter::Z)));
    }
    if c.conjugate(&PauliOperator::single(n, 0, PauliLetter::Z)) != q {
        c = c.compose_unchecked(&CliffordElement::from_pauli(&PauliOperator::single(n, 0, PauliLetter::X)));
    }
    debug_assert_eq!(c.conjugate(&PauliOperator::single(n, 0, PauliLetter::X)), p);
    debug_assert_eq!(c.conjugate(&PauliOperator::single(n, 0, PauliLetter::Z)), q);
    c
}

/// Exactly uniform sample from the `n`-qubit Clifford group (signs included).
///
/// The images of `X_0` and `Z_0` are drawn uniformly among signed
/// anticommuting pairs; the stabilizer of that pair is the Clifford group on
/// the remaining qubits, which is sampled recursively. One qubit draws
/// directly from the 24-element table.
pub fn sample_uniform_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordElement {
    assert!(n >= 1, "Clifford sampling needs at least one qubit");
    if n == 1 {
        let t = single_qubit_table();
        return t.element(rng.random_range(0..t.len())).expect("in range").clone();
    }
    let p = random_pauli(n, rng);
    let q = loop {
        let q = random_pauli(n, rng);
        if !q.commutes_with(&p) {
            break q;
        }
    };
    let head = clifford_with_first_pair(p, q);
    let rest: Vec<usize> = (1..n).collect();
    let tail = sample_uniform_clifford(n - 1, rng)
        .embed(n, &rest)
        .expect("qubits in range");
    head.compose_unchecked(&tail)
}

/// A Clifford `C` with `C p_i C† = p_j`, built from local rotations to X
/// form and CNOT ladders on both sides.
pub fn transporting_clifford(p_i: &PauliOperator, p_j: &PauliOperator) -> Result<CliffordElement> {
    let n = p_i.num_qubits();
    if p_j.num_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p_j.num_qubits(),
        });
    }
    if p_i.is_identity() || p_j.is_identity() {
        return Err(Error::IdentityPauli);
    }
    if p_i.phase_exp() % 2 != p_j.phase_exp() % 2 {
        return Err(Error::Invalid(format!(
            "{p_i} and {p_j} differ by a factor of ±i"
        )));
    }
    let mut ri = Reducer::new(vec![p_i.unsigned()]);
    ri.reduce_to_x0(0);
    let mut rj = Reducer::new(vec![p_j.unsigned()]);
    rj.reduce_to_x0(0);
    let mut c = rj.d.inverse().compose_unchecked(&ri.d);
    if c.conjugate(p_i) != *p_j {
        // Flip the sign with a Pauli that anticommutes with p_i.
        let q = (0..n).find(|&q| p_i.letter(q) != PauliLetter::I).expect("non-identity");
        let flip = match p_i.letter(q) {
            PauliLetter::Z => PauliLetter::X,
            _ => PauliLetter::Z,
        };
        c = c.compose_unchecked(&CliffordElement::from_pauli(&PauliOperator::single(n, q, flip)));
    }
    if c.conjugate(p_i) != *p_j {
        return Err(Error::Inconsistent(format!(
            "transport of {p_i} to {p_j} failed"
        )));
    }
    Ok(c)
}
