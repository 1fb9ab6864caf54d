use proptest::prelude::*;

use quon_core::gram::{compose, inverse, inversions, permutation_word, permutations};
use quon_core::qfock::{
    apply_symbol, normal_order, q_inner_product, vacuum_expectation, vector_inner_product,
    FockVector, FockWord, ModeLabel, OperatorSymbol, OperatorWord,
};
use quon_core::wick::{enumerate_contractions, wick_expectation};
use quon_core::QPolynomial;

fn symbol() -> impl Strategy<Value = OperatorSymbol> {
    (1u32..=4, any::<bool>()).prop_map(|(m, dagger)| {
        if dagger {
            OperatorSymbol::creator(m)
        } else {
            OperatorSymbol::annihilator(m)
        }
    })
}

fn word(max_len: usize) -> impl Strategy<Value = OperatorWord> {
    prop::collection::vec(symbol(), 0..=max_len).prop_map(OperatorWord::new)
}

/// Balanced words: the creators are a permutation of the annihilators' modes.
fn balanced_word(max_pairs: usize) -> impl Strategy<Value = OperatorWord> {
    prop::collection::vec(1u32..=4, 1..=max_pairs)
        .prop_flat_map(|modes| {
            let syms: Vec<OperatorSymbol> = modes
                .iter()
                .flat_map(|&m| [OperatorSymbol::annihilator(m), OperatorSymbol::creator(m)])
                .collect();
            Just(syms).prop_shuffle()
        })
        .prop_map(OperatorWord::new)
}

fn fock_word(max_len: usize, modes: u32) -> impl Strategy<Value = FockWord> {
    prop::collection::vec(1..=modes, 0..=max_len).prop_map(|v| FockWord::from_u32s(&v))
}

fn creators(w: &FockWord) -> OperatorWord {
    OperatorWord::new(w.labels().iter().map(|&m| OperatorSymbol::creator(m)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wick_matches_rewrite_on_balanced_words(w in balanced_word(6)) {
        prop_assert_eq!(wick_expectation(&w).unwrap(), vacuum_expectation(&w));
    }

    #[test]
    fn wick_matches_rewrite_or_rejects(w in word(12)) {
        match wick_expectation(&w) {
            Ok(p) => prop_assert_eq!(p, vacuum_expectation(&w)),
            Err(_) => prop_assert!(vacuum_expectation(&w).is_zero()),
        }
    }

    #[test]
    fn normal_order_is_normal_and_keeps_vev(w in word(8)) {
        let n = normal_order(&w);
        prop_assert!(n.is_normal_ordered());
        prop_assert_eq!(n.constant_term(), vacuum_expectation(&w));
    }

    #[test]
    fn quon_relation_holds_symbolically(state in fock_word(5, 3), k in 1u32..=3, l in 1u32..=3) {
        let v = FockVector::basis(state);
        let (k, l) = (ModeLabel(k), ModeLabel(l));
        let ac = apply_symbol(OperatorSymbol::annihilator(k), &apply_symbol(OperatorSymbol::creator(l), &v));
        let ca = apply_symbol(OperatorSymbol::creator(l), &apply_symbol(OperatorSymbol::annihilator(k), &v));
        let mut lhs = ac;
        lhs.add_scaled(&ca, &-QPolynomial::q_pow(1));
        let rhs = if k == l { v } else { FockVector::zero() };
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn creator_is_adjoint_of_annihilator(u in fock_word(4, 3), v in fock_word(5, 3), k in 1u32..=3) {
        let k = ModeLabel(k);
        let lhs = vector_inner_product(
            &apply_symbol(OperatorSymbol::creator(k), &FockVector::basis(u.clone())),
            &FockVector::basis(v.clone()),
        );
        let rhs = vector_inner_product(
            &FockVector::basis(u),
            &apply_symbol(OperatorSymbol::annihilator(k), &FockVector::basis(v)),
        );
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inner_product_is_symmetric_with_bounded_degree(u in fock_word(5, 3), v in fock_word(5, 3)) {
        let p = q_inner_product(&u, &v);
        prop_assert_eq!(&p, &q_inner_product(&v, &u));
        if u.len() != v.len() || u.sorted_labels() != v.sorted_labels() {
            prop_assert!(p.is_zero());
        }
        if let Some(d) = p.degree() {
            let n = u.len();
            prop_assert!(d <= n * n.saturating_sub(1) / 2);
        }
        let bra = creators(&u);
        let ket = creators(&v);
        let dagger = OperatorWord::new(
            bra.symbols().iter().rev().map(|s| OperatorSymbol::annihilator(s.mode)).collect(),
        );
        prop_assert_eq!(p, vacuum_expectation(&dagger.concat(&ket)));
    }

    #[test]
    fn inner_product_is_relabel_invariant(u in fock_word(5, 3), v in fock_word(5, 3), shift in 1u32..50, scale in 1u32..7) {
        let relabel = |w: &FockWord| FockWord::new(w.labels().iter().map(|m| ModeLabel(m.0 * scale + shift)).collect());
        prop_assert_eq!(q_inner_product(&u, &v), q_inner_product(&relabel(&u), &relabel(&v)));
    }

    #[test]
    fn norm_is_positive_inside_the_interval(u in fock_word(5, 3), q in -0.95f64..0.95) {
        prop_assert!(q_inner_product(&u, &u).eval_f64(q) > 0.0);
    }
}

#[test]
fn anti_normal_crossings_equal_inversions() {
    for n in 1..=5 {
        let perms = permutations(n);
        for s in &perms {
            for t in &perms {
                let w = OperatorWord::inner_product_word(&permutation_word(s), &permutation_word(t));
                let diagrams = enumerate_contractions(&w).unwrap();
                assert_eq!(diagrams.len(), 1);
                assert_eq!(diagrams[0].1 .0, inversions(&compose(&inverse(s), t)));
            }
        }
    }
}

#[test]
fn gram_entries_are_powers_of_q() {
    for n in 1..=4 {
        let perms = permutations(n);
        for s in &perms {
            for t in &perms {
                let p = q_inner_product(&permutation_word(s), &permutation_word(t));
                assert_eq!(p, QPolynomial::q_pow(inversions(&compose(&inverse(s), t))));
            }
        }
    }
}

/// Counting non-interleaving chord pairs instead of crossings must be caught.
#[test]
fn mutated_crossing_rule_is_detected() {
    let words = ["a1 a2 c1 c2", "a1 a1 c1 c1", "a1 a2 a3 c3 c1 c2"];
    let mut mismatches = 0;
    for w in words {
        let w: OperatorWord = w.parse().unwrap();
        let mut counts = vec![0i64; 16];
        for (d, c) in enumerate_contractions(&w).unwrap() {
            let pairs = d.pairs.len() * (d.pairs.len() - 1) / 2;
            counts[pairs - c.0] += 1;
        }
        if QPolynomial::from_i64s(&counts) != vacuum_expectation(&w) {
            mismatches += 1;
        }
    }
    assert!(mismatches > 0);
}
