mod common;

use std::collections::HashSet;

use common::*;
use proptest::prelude::*;
use rus_synth::canonical::enumerate_canonical;
use rus_synth::clifford::{equivalence_representative, table};
use rus_synth::gates::{evaluate, Circuit, Gate, GateKind};
use rus_synth::{BigInt, Int, Matrix};

fn arb_gate(width: usize) -> impl Strategy<Value = Gate> {
    (0..GateKind::ALL.len(), 0..width, 1..width).prop_map(move |(k, q, off)| {
        let kind = GateKind::ALL[k];
        if kind.arity() == 2 {
            Gate::two(kind, q, (q + off) % width)
        } else {
            Gate::one(kind, q)
        }
    })
}

fn arb_circuit() -> impl Strategy<Value = Circuit> {
    (2usize..=3)
        .prop_flat_map(|w| (Just(w), prop::collection::vec(arb_gate(w), 0..24)))
        .prop_map(|(w, gates)| Circuit::with_gates(w, vec![0], gates).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn exact_unitary_matches_float_simulation(c in arb_circuit()) {
        let u: Matrix = evaluate(&c).unwrap();
        prop_assert!(u.is_unitary());
        let dim = 1 << c.width;
        for col in 0..dim {
            let mut e = vec![common::c(0.0, 0.0); dim];
            e[col] = common::c(1.0, 0.0);
            let out = run(&c, e);
            for (row, z) in out.iter().enumerate() {
                prop_assert!((u.get(row, col).to_c64() - z).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn backends_agree(c in arb_circuit()) {
        let a: Matrix = evaluate(&c).unwrap();
        let b = evaluate::<BigInt>(&c).unwrap();
        prop_assert_eq!(b.convert::<Int>().unwrap(), a);
    }
}

#[test]
fn clifford_table_matches_float_closure() {
    let oracle = cliffords();
    assert_eq!(oracle.len(), 24);
    let t = table::<Int>();
    assert_eq!(t.elems().len(), 24);
    for i in 0..24 {
        let m = from_vec(&t.matrix(i).to_c64());
        assert_eq!(oracle.iter().filter(|g| proj_gap(g, &m) < 1e-9).count(), 1);
    }
}

#[test]
fn g1_times_g2_is_the_whole_group() {
    let t = table::<Int>();
    let mut seen = HashSet::new();
    for &a in t.g1() {
        for &b in t.g2() {
            seen.insert(t.mul(a, b));
        }
    }
    assert_eq!(t.g1().len() * t.g2().len(), 32);
    assert_eq!(seen.len(), 24);
}

fn word_matrix(word: &[u8]) -> Matrix {
    let mut m = Matrix::identity(2);
    for &g in word {
        let k = match g {
            b'H' => GateKind::H,
            b'S' => GateKind::S,
            _ => GateKind::T,
        };
        m = k.matrix2::<Int>().unwrap().mul(&m);
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Exact keys agree with a float search over all 576 Clifford pairs.
    #[test]
    fn keys_agree_with_float_equivalence(
        a in prop::collection::vec(prop::sample::select(b"HST".to_vec()), 1..10),
        b in prop::collection::vec(prop::sample::select(b"HST".to_vec()), 1..10),
    ) {
        let (ma, mb) = (word_matrix(&a), word_matrix(&b));
        let same_key = equivalence_representative(&ma).unwrap() == equivalence_representative(&mb).unwrap();
        let same_float = clifford_equivalent(&from_vec(&ma.to_c64()), &from_vec(&mb.to_c64()));
        prop_assert_eq!(same_key, same_float);
    }
}

/// Breadth-first closure of Clifford+T words with at most `t_max` T gates,
/// counted up to two-sided Clifford equivalence.
fn brute_force_classes(t_max: usize) -> usize {
    let gens: Vec<(Matrix, usize)> =
        [(GateKind::H, 0), (GateKind::S, 0), (GateKind::T, 1)].iter().map(|&(k, c)| (k.matrix2::<Int>().unwrap(), c)).collect();
    let mut seen = HashSet::new();
    let mut keys = HashSet::new();
    let mut frontier = vec![(Matrix::identity(2), 0usize)];
    while !frontier.is_empty() {
        let mut next = vec![];
        for (m, tc) in &frontier {
            for (g, c) in &gens {
                if tc + c > t_max {
                    continue;
                }
                let n = g.mul(m);
                if seen.insert(rus_synth::clifford::projective_normalize(&n).unwrap()) {
                    keys.insert(equivalence_representative(&n).unwrap());
                    next.push((n, tc + c));
                }
            }
        }
        frontier = next;
    }
    keys.len()
}

#[test]
fn canonical_count_matches_brute_force() {
    for t in 0..=4 {
        assert_eq!(enumerate_canonical(t).count(), brute_force_classes(t), "t = {t}");
    }
}

#[test]
fn canonical_sequences_are_pairwise_inequivalent() {
    let seqs: Vec<_> = enumerate_canonical(6).collect();
    let keys: HashSet<_> = seqs.iter().map(|s| equivalence_representative(&s.matrix::<Int>()).unwrap()).collect();
    assert_eq!(keys.len(), seqs.len());
}

#[test]
fn canonical_counts_grow_by_powers_of_two() {
    let counts: Vec<usize> = (3..=12).map(|t| enumerate_canonical(t).count()).collect();
    let expected: Vec<usize> = (3..=12).map(|t| (1usize << (t - 3)) + 3).collect();
    assert_eq!(counts, expected);
}
