use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rbtomo::bounds::{bound_composed_chi00, bound_deconvolved_chi00};
use rbtomo::channel::{chi_from_pl, pl_from_unitary, rotation_unitary};
use rbtomo::clifford::{sample_uniform_clifford, CliffordElement};
use rbtomo::pauli::PauliOperator;

fn axis() -> impl Strategy<Value = [f64; 3]> {
    (0.0..std::f64::consts::PI, 0.0..2.0 * std::f64::consts::PI)
        .prop_map(|(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
}

fn chi00_of(u: &rbtomo::linalg::CMatrix) -> f64 {
    chi_from_pl(&pl_from_unitary(u).unwrap()).chi00()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn composed_bound_holds_for_rotation_pairs(
        na in axis(), nb in axis(), ta in -3.2f64..3.2, tb in -3.2f64..3.2,
    ) {
        let ua = rotation_unitary(na, ta);
        let ub = rotation_unitary(nb, tb);
        let (ca, cb) = (chi00_of(&ua), chi00_of(&ub));
        let cab = chi00_of(&(&ua * &ub));
        let iv = bound_composed_chi00(ca, cb).unwrap();
        prop_assert!(iv.lo - 1e-9 <= cab && cab <= iv.hi + 1e-9, "{cab} not in [{}, {}]", iv.lo, iv.hi);
    }

    #[test]
    fn deconvolved_bound_recovers_first_factor(
        na in axis(), nb in axis(), ta in -3.2f64..3.2, tb in -3.2f64..3.2,
    ) {
        let ua = rotation_unitary(na, ta);
        let ub = rotation_unitary(nb, tb);
        let (ca, cb) = (chi00_of(&ua), chi00_of(&ub));
        let cab = chi00_of(&(&ua * &ub));
        let iv = bound_deconvolved_chi00(cab, cb).unwrap();
        prop_assert!(iv.lo - 1e-7 <= ca && ca <= iv.hi + 1e-7, "{ca} not in [{}, {}]", iv.lo, iv.hi);
    }

    #[test]
    fn pauli_product_matches_matrices(n in 1usize..4, i in 0usize..64, j in 0usize..64) {
        let m = 1 << (2 * n);
        let a = PauliOperator::from_index(i % m, n).unwrap();
        let b = PauliOperator::from_index(j % m, n).unwrap();
        let ab = a.multiply(&b).unwrap();
        let direct = a.matrix().unwrap() * b.matrix().unwrap();
        prop_assert!((ab.matrix().unwrap() - direct).norm() < 1e-12);
        prop_assert_eq!(a.commutes_with(&b), b.commutes_with(&a));
    }

    #[test]
    fn clifford_inverse_and_composition(n in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_uniform_clifford(n, &mut rng);
        let b = sample_uniform_clifford(n, &mut rng);
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity());
        prop_assert!(a.inverse().compose(&a).unwrap().is_identity());
        prop_assert_eq!(a.compose(&b).unwrap().inverse(), b.inverse().compose(&a.inverse()).unwrap());
        prop_assert_eq!(CliffordElement::from_pl(a.pl().unwrap()).unwrap(), a.clone());
        if n <= 2 {
            let prod = a.compose(&b).unwrap();
            let pa = a.pl().unwrap().matrix().clone();
            let pb = b.pl().unwrap().matrix().clone();
            let pp = prod.pl().unwrap().matrix().clone();
            prop_assert!((&pp - &pa * &pb).norm() < 1e-12);
        }
    }
}
