//! Number and transition operators at `q = 0` on a truncated Fock space.
//!
//! At `q = 0` an annihilator only sees the leftmost label of a word, and the
//! transition operator is the series
//!
//! ```text
//! n_kl = a†_k a_l + Σ_t a†_t a†_k a_l a_t + Σ_{t1,t2} a†_t2 a†_t1 a†_k a_l a_t1 a_t2 + …
//! ```
//!
//! truncated after `depth` correction terms. Words are orthonormal at
//! `q = 0`, so coefficients are plain rationals.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::QPolynomial;
use crate::qfock::{
    words_of_length, FockWord, ModeLabel, OpKind, OperatorSum, OperatorSymbol, OperatorWord,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservablesError {
    #[error("number operators are only available at q = 0 (got q = {0})")]
    NonzeroQ(f64),
    #[error("state would exceed the particle cap {cap}; deepen truncation")]
    TruncationExceeded { cap: usize },
    #[error("mode {0} is not part of the truncated space")]
    UnknownMode(ModeLabel),
    #[error("no energy given for mode {0}")]
    MissingEnergy(ModeLabel),
    #[error("a truncated space needs at least one mode")]
    EmptyModeSet,
}

/// Exact rational combination of Fock words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ket(BTreeMap<FockWord, BigRational>);

impl Ket {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(w: FockWord) -> Self {
        let mut k = Self::zero();
        k.add_term(w, BigRational::from_integer(1.into()));
        k
    }

    pub fn add_term(&mut self, w: FockWord, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(w.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&w);
        }
    }

    pub fn add_scaled(&mut self, other: &Ket, c: &BigRational) {
        for (w, x) in &other.0 {
            self.add_term(w.clone(), x * c);
        }
    }

    pub fn sub(&self, other: &Ket) -> Ket {
        let mut out = self.clone();
        out.add_scaled(other, &BigRational::from_integer((-1).into()));
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, w: &FockWord) -> BigRational {
        self.0.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockWord, &BigRational)> {
        self.0.iter()
    }

    pub fn max_abs(&self) -> BigRational {
        self.0
            .values()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncatedFockSpace {
    pub modes: Vec<ModeLabel>,
    pub cap: usize,
    #[serde(skip)]
    basis: Vec<FockWord>,
}

impl TruncatedFockSpace {
    pub fn new(modes: Vec<ModeLabel>, cap: usize) -> Result<Self, ObservablesError> {
        let mut modes = modes;
        modes.sort();
        modes.dedup();
        if modes.is_empty() {
            return Err(ObservablesError::EmptyModeSet);
        }
        let basis = (0..=cap).flat_map(|n| words_of_length(&modes, n)).collect();
        Ok(Self { modes, cap, basis })
    }

    /// Modes `1..=m`.
    pub fn with_mode_count(m: u32, cap: usize) -> Result<Self, ObservablesError> {
        Self::new((1..=m).map(ModeLabel).collect(), cap)
    }

    pub fn basis(&self) -> &[FockWord] {
        &self.basis
    }

    /// Basis words with at most `max_len` letters.
    pub fn states_up_to(&self, max_len: usize) -> impl Iterator<Item = &FockWord> {
        self.basis.iter().filter(move |w| w.len() <= max_len)
    }

    fn require_mode(&self, m: ModeLabel) -> Result<(), ObservablesError> {
        if self.modes.contains(&m) {
            Ok(())
        } else {
            Err(ObservablesError::UnknownMode(m))
        }
    }
}

/// One symbol at `q = 0`; a creator that would exceed `cap` is an error.
pub fn apply_symbol_q0(
    s: OperatorSymbol,
    ket: &Ket,
    cap: usize,
) -> Result<Ket, ObservablesError> {
    let mut out = Ket::zero();
    for (w, c) in ket.terms() {
        match s.kind {
            OpKind::Creator => {
                if w.len() + 1 > cap {
                    return Err(ObservablesError::TruncationExceeded { cap });
                }
                out.add_term(w.create(s.mode), c.clone());
            }
            OpKind::Annihilator => {
                if w.labels().first() == Some(&s.mode) {
                    out.add_term(FockWord(w.labels()[1..].to_vec()), c.clone());
                }
            }
        }
    }
    Ok(out)
}

pub fn apply_word_q0(word: &OperatorWord, ket: &Ket, cap: usize) -> Result<Ket, ObservablesError> {
    word.symbols()
        .iter()
        .rev()
        .try_fold(ket.clone(), |acc, &s| apply_symbol_q0(s, &acc, cap))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionOperator {
    pub k: ModeLabel,
    pub l: ModeLabel,
    pub depth: usize,
    pub terms: OperatorSum,
}

impl TransitionOperator {
    pub fn apply(&self, ket: &Ket, cap: usize) -> Result<Ket, ObservablesError> {
        let mut out = Ket::zero();
        for (word, coeff) in self.terms.terms() {
            let c = BigRational::from_integer(coeff.coeff(0));
            out.add_scaled(&apply_word_q0(word, ket, cap)?, &c);
        }
        Ok(out)
    }
}

/// Series for `n_kl` through `depth` correction terms, mode sums over the
/// space's modes.
pub fn transition_operator(
    space: &TruncatedFockSpace,
    k: ModeLabel,
    l: ModeLabel,
    depth: usize,
    q: f64,
) -> Result<TransitionOperator, ObservablesError> {
    if q != 0.0 {
        return Err(ObservablesError::NonzeroQ(q));
    }
    space.require_mode(k)?;
    space.require_mode(l)?;
    let mut terms = OperatorSum::zero();
    for d in 0..=depth {
        for ts in words_of_length(&space.modes, d) {
            // a†_{t_d} … a†_{t_1} a†_k a_l a_{t_1} … a_{t_d}
            let ts = ts.labels();
            let mut syms: Vec<OperatorSymbol> =
                ts.iter().rev().map(|&t| OperatorSymbol::creator(t)).collect();
            syms.push(OperatorSymbol::creator(k));
            syms.push(OperatorSymbol::annihilator(l));
            syms.extend(ts.iter().map(|&t| OperatorSymbol::annihilator(t)));
            terms.add_term(OperatorWord::new(syms), &QPolynomial::one());
        }
    }
    Ok(TransitionOperator { k, l, depth, terms })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub k: ModeLabel,
    pub l: ModeLabel,
    pub m: ModeLabel,
    pub depth: usize,
    pub states_checked: usize,
    /// Largest |coefficient| of the residual over all checked states, exact.
    pub max_residual: String,
    /// States (at most a handful) on which the identity failed.
    pub failing_states: Vec<String>,
    pub failing_count: usize,
    pub depth_sufficient: bool,
    pub holds: bool,
}

fn delta(a: ModeLabel, b: ModeLabel) -> bool {
    a == b
}

/// `[n_kl, a†_m] = δ_lm a†_k` on every basis state with at most `cap - 1`
/// particles.
pub fn check_transition_commutator(
    space: &TruncatedFockSpace,
    k: ModeLabel,
    l: ModeLabel,
    m: ModeLabel,
    depth: usize,
) -> Result<CommutatorReport, ObservablesError> {
    space.require_mode(m)?;
    let n = transition_operator(space, k, l, depth, 0.0)?;
    let cap = space.cap;
    let create_m = OperatorWord::new(vec![OperatorSymbol::creator(m)]);
    let create_k = OperatorWord::new(vec![OperatorSymbol::creator(k)]);
    let mut max = BigRational::zero();
    let mut failing = Vec::new();
    let mut failing_count = 0;
    let mut checked = 0;
    for w in space.states_up_to(cap.saturating_sub(1)) {
        let ket = Ket::basis(w.clone());
        let lhs = n
            .apply(&apply_word_q0(&create_m, &ket, cap)?, cap)?
            .sub(&apply_word_q0(&create_m, &n.apply(&ket, cap)?, cap)?);
        let rhs = if delta(l, m) {
            apply_word_q0(&create_k, &ket, cap)?
        } else {
            Ket::zero()
        };
        let residual = lhs.sub(&rhs);
        checked += 1;
        if !residual.is_zero() {
            failing_count += 1;
            if failing.len() < 8 {
                failing.push(w.to_string());
            }
            max = max.max(residual.max_abs());
        }
    }
    Ok(CommutatorReport {
        k,
        l,
        m,
        depth,
        states_checked: checked,
        max_residual: max.to_string(),
        failing_states: failing,
        failing_count,
        depth_sufficient: depth + 1 >= cap,
        holds: failing_count == 0,
    })
}

/// Every `(k, l, m)` triple over the space's modes.
pub fn check_all_commutators(
    space: &TruncatedFockSpace,
    depth: usize,
) -> Result<Vec<CommutatorReport>, ObservablesError> {
    let modes = &space.modes;
    let triples: Vec<_> = modes
        .iter()
        .flat_map(|&k| modes.iter().flat_map(move |&l| modes.iter().map(move |&m| (k, l, m))))
        .collect();
    triples
        .par_iter()
        .map(|&(k, l, m)| check_transition_commutator(space, k, l, m, depth))
        .collect()
}

/// `⟨u|n_kl v⟩ = ⟨n_lk u|v⟩` for all basis words (orthonormal at `q = 0`).
pub fn transition_adjointness_holds(
    space: &TruncatedFockSpace,
    k: ModeLabel,
    l: ModeLabel,
    depth: usize,
) -> Result<bool, ObservablesError> {
    let nkl = transition_operator(space, k, l, depth, 0.0)?;
    let nlk = transition_operator(space, l, k, depth, 0.0)?;
    let cap = space.cap;
    let images_kl: Vec<Ket> = space
        .basis()
        .iter()
        .map(|v| nkl.apply(&Ket::basis(v.clone()), cap))
        .collect::<Result<_, _>>()?;
    let images_lk: Vec<Ket> = space
        .basis()
        .iter()
        .map(|u| nlk.apply(&Ket::basis(u.clone()), cap))
        .collect::<Result<_, _>>()?;
    for (ui, u) in space.basis().iter().enumerate() {
        for (vi, v) in space.basis().iter().enumerate() {
            if images_kl[vi].coefficient(u) != images_lk[ui].coefficient(v) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `H = Σ_k ε_k n_k` with each number operator carried to depth `cap - 1`.
#[derive(Clone, Debug)]
pub struct FreeHamiltonian {
    pub energies: BTreeMap<ModeLabel, BigRational>,
    pub depth: usize,
    number_ops: Vec<(BigRational, TransitionOperator)>,
}

impl FreeHamiltonian {
    pub fn apply(&self, ket: &Ket, cap: usize) -> Result<Ket, ObservablesError> {
        let mut out = Ket::zero();
        for (e, n) in &self.number_ops {
            out.add_scaled(&n.apply(ket, cap)?, e);
        }
        Ok(out)
    }
}

pub fn free_hamiltonian(
    space: &TruncatedFockSpace,
    energies: &BTreeMap<ModeLabel, BigRational>,
) -> Result<FreeHamiltonian, ObservablesError> {
    let depth = space.cap.saturating_sub(1);
    let mut number_ops = Vec::new();
    for &m in &space.modes {
        let e = energies
            .get(&m)
            .cloned()
            .ok_or(ObservablesError::MissingEnergy(m))?;
        number_ops.push((e, transition_operator(space, m, m, depth, 0.0)?));
    }
    Ok(FreeHamiltonian {
        energies: energies.clone(),
        depth,
        number_ops,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HamiltonianReport {
    pub states_checked: usize,
    /// `H w = (Σ_letters ε) w` on every basis word.
    pub diagonal_holds: bool,
    /// `[H, a†_k] = ε_k a†_k` on every state below the cap, for every k.
    pub commutator_holds: bool,
    pub failing_states: Vec<String>,
    pub holds: bool,
}

pub fn check_hamiltonian(
    space: &TruncatedFockSpace,
    h: &FreeHamiltonian,
) -> Result<HamiltonianReport, ObservablesError> {
    let cap = space.cap;
    let mut failing = Vec::new();
    let mut diagonal_holds = true;
    for w in space.basis() {
        let energy: BigRational = w.labels().iter().map(|m| h.energies[m].clone()).sum();
        let mut expected = Ket::zero();
        expected.add_term(w.clone(), energy);
        if h.apply(&Ket::basis(w.clone()), cap)? != expected {
            diagonal_holds = false;
            failing.push(w.to_string());
        }
    }
    let mut commutator_holds = true;
    for w in space.states_up_to(cap.saturating_sub(1)) {
        let ket = Ket::basis(w.clone());
        for &k in &space.modes {
            let ck = OperatorWord::new(vec![OperatorSymbol::creator(k)]);
            let lhs = h
                .apply(&apply_word_q0(&ck, &ket, cap)?, cap)?
                .sub(&apply_word_q0(&ck, &h.apply(&ket, cap)?, cap)?);
            let mut rhs = Ket::zero();
            rhs.add_scaled(&apply_word_q0(&ck, &ket, cap)?, &h.energies[&k]);
            if lhs != rhs {
                commutator_holds = false;
                if failing.len() < 8 {
                    failing.push(format!("[H,a†_{k}] on {w}"));
                }
            }
        }
    }
    Ok(HamiltonianReport {
        states_checked: space.basis().len(),
        diagonal_holds,
        commutator_holds,
        failing_states: failing,
        holds: diagonal_holds && commutator_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityReport {
    pub x: ModeLabel,
    pub y: ModeLabel,
    pub w: ModeLabel,
    pub commutator: CommutatorReport,
    pub vacuum_annihilated: bool,
    pub holds: bool,
}

/// Discrete stand-in for `[ρ₁(x;y), ψ†(w)] = δ(y-w) ψ†(x)` and `ρ₁|0⟩ = 0`,
/// with `ρ₁(x;y) = n_xy` carried to depth `cap - 1`.
pub fn locality_check_discrete(
    space: &TruncatedFockSpace,
    x: ModeLabel,
    y: ModeLabel,
    w: ModeLabel,
) -> Result<LocalityReport, ObservablesError> {
    let depth = space.cap.saturating_sub(1);
    let commutator = check_transition_commutator(space, x, y, w, depth)?;
    let n = transition_operator(space, x, y, depth, 0.0)?;
    let vacuum_annihilated = n.apply(&Ket::basis(FockWord::vacuum()), space.cap)?.is_zero();
    let holds = commutator.holds && vacuum_annihilated;
    Ok(LocalityReport {
        x,
        y,
        w,
        commutator,
        vacuum_annihilated,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(i: u32) -> ModeLabel {
        ModeLabel(i)
    }

    fn space(modes: u32, cap: usize) -> TruncatedFockSpace {
        TruncatedFockSpace::with_mode_count(modes, cap).unwrap()
    }

    #[test]
    fn basis_size() {
        assert_eq!(space(3, 3).basis().len(), 1 + 3 + 9 + 27);
        assert_eq!(space(2, 0).basis().len(), 1);
        assert_eq!(
            TruncatedFockSpace::new(vec![], 2),
            Err(ObservablesError::EmptyModeSet)
        );
    }

    #[test]
    fn series_terms() {
        let s = space(2, 3);
        let d0 = transition_operator(&s, m(1), m(2), 0, 0.0).unwrap();
        assert_eq!(d0.terms.len(), 1);
        assert_eq!(
            d0.terms.terms().next().unwrap().0,
            &"c1 a2".parse::<OperatorWord>().unwrap()
        );
        let d1 = transition_operator(&s, m(1), m(2), 1, 0.0).unwrap();
        let words: Vec<String> = d1.terms.terms().map(|(w, _)| w.to_string()).collect();
        assert_eq!(words.len(), 3);
        assert!(words.contains(&"c1 c1 a2 a1".to_string()));
        assert!(words.contains(&"c2 c1 a2 a2".to_string()));
        assert_eq!(
            transition_operator(&s, m(1), m(2), 1, 0.5),
            Err(ObservablesError::NonzeroQ(0.5))
        );
        assert_eq!(
            transition_operator(&s, m(1), m(7), 1, 0.0),
            Err(ObservablesError::UnknownMode(m(7)))
        );
    }

    #[test]
    fn vacuum_is_annihilated_at_any_depth() {
        let s = space(2, 3);
        for d in 0..3 {
            let n = transition_operator(&s, m(1), m(2), d, 0.0).unwrap();
            assert!(n.apply(&Ket::basis(FockWord::vacuum()), 3).unwrap().is_zero());
        }
    }

    #[test]
    fn one_particle_cap_depth_zero() {
        let s = space(2, 1);
        for k in 1..=2 {
            for l in 1..=2 {
                for mm in 1..=2 {
                    let r = check_transition_commutator(&s, m(k), m(l), m(mm), 0).unwrap();
                    assert!(r.holds, "{r:?}");
                    assert_eq!(r.states_checked, 1);
                }
            }
        }
    }

    #[test]
    fn shallow_series_fails_on_two_particle_state() {
        let s = space(2, 3);
        let r = check_transition_commutator(&s, m(1), m(2), m(1), 0).unwrap();
        assert!(!r.holds);
        assert!(!r.depth_sufficient);
        assert!(r.failing_states.iter().any(|w| w == "(2,2)"));
    }

    #[test]
    fn exceeding_cap_is_an_error() {
        let k = Ket::basis(FockWord::from_u32s(&[1, 1]));
        assert_eq!(
            apply_symbol_q0(OperatorSymbol::creator(1), &k, 2),
            Err(ObservablesError::TruncationExceeded { cap: 2 })
        );
    }

    #[test]
    fn hamiltonian_examples() {
        let s = space(2, 3);
        let energies: BTreeMap<_, _> = [
            (m(1), BigRational::new(1.into(), 2.into())),
            (m(2), BigRational::from_integer(3.into())),
        ]
        .into_iter()
        .collect();
        let h = free_hamiltonian(&s, &energies).unwrap();
        assert!(h.apply(&Ket::basis(FockWord::vacuum()), 3).unwrap().is_zero());
        let one = h.apply(&Ket::basis(FockWord::from_u32s(&[2])), 3).unwrap();
        assert_eq!(
            one.coefficient(&FockWord::from_u32s(&[2])),
            BigRational::from_integer(3.into())
        );
        let two = h.apply(&Ket::basis(FockWord::from_u32s(&[1, 2])), 3).unwrap();
        assert_eq!(
            two.coefficient(&FockWord::from_u32s(&[1, 2])),
            BigRational::new(7.into(), 2.into())
        );
        assert!(check_hamiltonian(&s, &h).unwrap().holds);
        let partial: BTreeMap<_, _> = [(m(1), BigRational::zero())].into_iter().collect();
        assert_eq!(
            free_hamiltonian(&s, &partial).unwrap_err(),
            ObservablesError::MissingEnergy(m(2))
        );
    }

    #[test]
    fn locality_examples() {
        let s = space(3, 3);
        let same = locality_check_discrete(&s, m(1), m(2), m(2)).unwrap();
        assert!(same.holds);
        let diff = locality_check_discrete(&s, m(1), m(2), m(3)).unwrap();
        assert!(diff.holds);
        assert!(diff.vacuum_annihilated);
    }

    #[test]
    fn transition_adjoints() {
        let s = space(2, 3);
        assert!(transition_adjointness_holds(&s, m(1), m(2), 2).unwrap());
        assert!(transition_adjointness_holds(&s, m(2), m(2), 2).unwrap());
    }
}
