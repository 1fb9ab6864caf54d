use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use quon_core::qfock::{OperatorSymbol, OperatorWord};
use quon_core::speicher::{
    expectation_given_signs, mc_estimate, sample_sign_matrix, sign_averaged_expectation,
    SignMatrix,
};
use quon_core::wick::wick_expectation;

/// Creator string `b†_{x1} … b†_{xm}|0⟩`, each entry `(mode, component)`.
type State = Vec<(u32, usize)>;

/// Vacuum expectation of `word` with `a_k = N^{-1/2} Σ_α b_k^(α)`, computed by
/// moving annihilators right with `b b'† = δ + s b'† b` (`s = 1` inside a component).
fn explicit_expectation(word: &OperatorWord, s: &SignMatrix) -> BigRational {
    let n = s.components();
    let mut v: BTreeMap<State, i128> = BTreeMap::from([(Vec::new(), 1)]);
    for sym in word.symbols().iter().rev() {
        let mut next: BTreeMap<State, i128> = BTreeMap::new();
        for (state, &c) in &v {
            for alpha in 0..n {
                if sym.is_creator() {
                    let mut out = vec![(sym.mode.0, alpha)];
                    out.extend_from_slice(state);
                    *next.entry(out).or_default() += c;
                    continue;
                }
                let mut sign = 1i128;
                for (i, &(m, beta)) in state.iter().enumerate() {
                    if m == sym.mode.0 && beta == alpha {
                        let mut out = state.clone();
                        out.remove(i);
                        *next.entry(out).or_default() += sign * c;
                    }
                    if beta != alpha {
                        sign *= i128::from(s.get(alpha, beta));
                    }
                }
            }
        }
        next.retain(|_, c| *c != 0);
        v = next;
    }
    let vac = v.get(&Vec::new()).copied().unwrap_or(0);
    let chords = (word.len() / 2) as u32;
    BigRational::new(BigInt::from(vac), BigInt::from(n).pow(chords))
}

fn balanced_word(max_pairs: usize, modes: u32) -> impl Strategy<Value = OperatorWord> {
    prop::collection::vec(1u32..=modes, 1..=max_pairs)
        .prop_flat_map(|m| {
            let syms: Vec<OperatorSymbol> = m
                .iter()
                .flat_map(|&k| [OperatorSymbol::annihilator(k), OperatorSymbol::creator(k)])
                .collect();
            Just(syms).prop_shuffle()
        })
        .prop_map(OperatorWord::new)
}

fn sign_matrix(n: usize) -> impl Strategy<Value = SignMatrix> {
    prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
        let mut it = bits.into_iter();
        SignMatrix::from_fn(n, |_, _| if it.next().unwrap() { 1 } else { -1 })
    })
}

fn all_sign_matrices(n: usize) -> Vec<SignMatrix> {
    let pairs = n * (n - 1) / 2;
    (0..1usize << pairs)
        .map(|mask| {
            let mut bit = 0;
            SignMatrix::from_fn(n, |_, _| {
                let s = if mask >> bit & 1 == 1 { -1 } else { 1 };
                bit += 1;
                s
            })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn matches_explicit_component_operators(
        (s, w) in (2usize..=3).prop_flat_map(|n| (sign_matrix(n), balanced_word(4, 3)))
    ) {
        prop_assert_eq!(expectation_given_signs(&w, &s).unwrap(), explicit_expectation(&w, &s));
    }

    #[test]
    fn norms_are_nonnegative_for_any_signs(
        (s, modes) in (2usize..=4).prop_flat_map(|n| (sign_matrix(n), prop::collection::vec(1u32..=3, 1..=4)))
    ) {
        let ket: Vec<OperatorSymbol> = modes.iter().map(|&m| OperatorSymbol::creator(m)).collect();
        let bra: Vec<OperatorSymbol> = modes.iter().rev().map(|&m| OperatorSymbol::annihilator(m)).collect();
        let w = OperatorWord::new([bra, ket].concat());
        prop_assert!(expectation_given_signs(&w, &s).unwrap() >= BigRational::from_integer(0.into()));
    }

    #[test]
    fn all_plus_signs_are_bosonic(w in balanced_word(4, 3), extra in 0usize..4) {
        let bose = wick_expectation(&w).unwrap().eval_rational(&BigRational::from_integer(1.into()));
        let s = SignMatrix::constant(w.len() / 2 + extra, 1);
        prop_assert_eq!(expectation_given_signs(&w, &s).unwrap(), bose);
    }
}

/// The exact law average equals the probability-weighted mean over every
/// sign matrix, at several rational q.
#[test]
fn sign_average_matches_enumeration() {
    let words = ["a1 a2 c1 c2", "a1 a1 c1 c1", "a1 a2 a3 c1 c2 c3", "a1 a2 a1 c1 c2 c1"];
    for n in 2..=3 {
        let matrices = all_sign_matrices(n);
        for q in [BigRational::new((-1).into(), 3.into()), BigRational::new(1.into(), 2.into())] {
            let one = BigRational::from_integer(1.into());
            let p_plus = (&one + &q) / BigRational::from_integer(2.into());
            let p_minus = &one - &p_plus;
            for w in words {
                let w: OperatorWord = w.parse().unwrap();
                let mut total = BigRational::from_integer(0.into());
                for s in &matrices {
                    let plus = s.off_diagonal().iter().filter(|&&x| x == 1).count() as i32;
                    let minus = s.off_diagonal().len() as i32 - plus;
                    let weight = p_plus.pow(plus) * p_minus.pow(minus);
                    total += weight * expectation_given_signs(&w, s).unwrap();
                }
                assert_eq!(total, sign_averaged_expectation(&w, &q, n).unwrap(), "{w} N={n}");
            }
        }
    }
}

#[test]
fn crossing_pair_average_has_finite_n_correction() {
    let w: OperatorWord = "a1 a2 c1 c2".parse().unwrap();
    let q = BigRational::new(1.into(), 2.into());
    for n in [1usize, 2, 5] {
        let expected = &q + (BigRational::from_integer(1.into()) - &q) / BigRational::from_integer(n.into());
        assert_eq!(sign_averaged_expectation(&w, &q, n).unwrap(), expected);
    }
}

#[test]
fn sampling_is_seeded_and_symmetric() {
    let a = sample_sign_matrix(12, 0.3, 99).unwrap();
    let b = sample_sign_matrix(12, 0.3, 99).unwrap();
    assert_eq!(a, b);
    for i in 0..12 {
        for j in 0..12 {
            if i != j {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
    }
    assert!(sample_sign_matrix(4, 1.5, 0).is_err());
    assert_eq!(sample_sign_matrix(6, 1.0, 3).unwrap(), SignMatrix::constant(6, 1));
    assert_eq!(sample_sign_matrix(6, -1.0, 3).unwrap(), SignMatrix::constant(6, -1));
}

#[test]
fn estimate_is_deterministic_and_reports_stderr() {
    let w: OperatorWord = "a1 a2 c1 c2".parse().unwrap();
    let a = mc_estimate(&w, 0.5, 30, 300, 5).unwrap();
    let b = mc_estimate(&w, 0.5, 30, 300, 5).unwrap();
    assert_eq!(a, b);
    assert!(a.stderr > 0.0);
    assert!(mc_estimate(&w, 0.5, 30, 0, 5).is_err());
}
