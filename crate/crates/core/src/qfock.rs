//! Quon algebra on the free Fock space.
//!
//! Two independent evaluation routes live here:
//!
//! * [`normal_order`] / [`vacuum_expectation`] rewrite an operator word using
//!   nothing but `a_k a†_l -> δ_kl + q a†_l a_k`, never touching two creators
//!   or two annihilators.
//! * [`apply_annihilator`] / [`q_inner_product`] act on non-symmetrized
//!   words `a†_{j1}…a†_{jn}|0⟩`, where a creator prepends its label and
//!   `a_k (j1…jn) = Σ_{i: ji = k} q^{i-1} (j1…ĵi…jn)`.
//!
//! All coefficients are exact [`QPolynomial`]s in a symbolic `q`.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::QPolynomial;

/// Opaque mode identifier; only equality carries meaning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeLabel(pub u32);

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ModeLabel {
    fn from(v: u32) -> Self {
        ModeLabel(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Creator,
    Annihilator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OperatorSymbol {
    pub kind: OpKind,
    pub mode: ModeLabel,
}

impl OperatorSymbol {
    pub fn creator(mode: impl Into<ModeLabel>) -> Self {
        Self {
            kind: OpKind::Creator,
            mode: mode.into(),
        }
    }

    pub fn annihilator(mode: impl Into<ModeLabel>) -> Self {
        Self {
            kind: OpKind::Annihilator,
            mode: mode.into(),
        }
    }

    pub fn is_creator(&self) -> bool {
        self.kind == OpKind::Creator
    }

    pub fn is_annihilator(&self) -> bool {
        self.kind == OpKind::Annihilator
    }
}

impl fmt::Display for OperatorSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OpKind::Creator => write!(f, "c{}", self.mode),
            OpKind::Annihilator => write!(f, "a{}", self.mode),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty token in operator word")]
    EmptyToken,
    #[error("token {0:?} must start with 'a' (annihilator) or 'c' (creator)")]
    BadKind(String),
    #[error("token {0:?} has no valid mode index")]
    BadMode(String),
}

/// Operator product read left to right; the rightmost symbol acts first on a
/// ket. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OperatorWord(pub Vec<OperatorSymbol>);

impl OperatorWord {
    pub fn new(symbols: Vec<OperatorSymbol>) -> Self {
        Self(symbols)
    }

    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn symbols(&self) -> &[OperatorSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &OperatorWord) -> OperatorWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        OperatorWord(v)
    }

    /// Creators all stand left of all annihilators.
    pub fn is_normal_ordered(&self) -> bool {
        self.0
            .windows(2)
            .all(|w| !(w[0].is_annihilator() && w[1].is_creator()))
    }

    /// Number of (annihilator, creator) pairs with the annihilator to the
    /// left. Every rewrite step strictly decreases it.
    pub fn inversions(&self) -> usize {
        let mut seen_annihilators = 0;
        let mut inv = 0;
        for s in &self.0 {
            match s.kind {
                OpKind::Annihilator => seen_annihilators += 1,
                OpKind::Creator => inv += seen_annihilators,
            }
        }
        inv
    }

    pub fn count(&self, kind: OpKind) -> usize {
        self.0.iter().filter(|s| s.kind == kind).count()
    }

    /// Sorted mode multiset of one kind of symbol.
    pub fn mode_multiset(&self, kind: OpKind) -> Vec<ModeLabel> {
        let mut v: Vec<_> = self
            .0
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.mode)
            .collect();
        v.sort();
        v
    }

    /// `⟨0|a_{u_n}…a_{u_1} a†_{v_1}…a†_{v_m}|0⟩`: the word whose VEV is the
    /// inner product of the Fock words `u` and `v`.
    pub fn inner_product_word(u: &FockWord, v: &FockWord) -> OperatorWord {
        let mut symbols: Vec<_> = u
            .labels()
            .iter()
            .rev()
            .map(|&m| OperatorSymbol::annihilator(m))
            .collect();
        symbols.extend(v.labels().iter().map(|&m| OperatorSymbol::creator(m)));
        OperatorWord(symbols)
    }
}

impl FromStr for OperatorWord {
    type Err = ParseError;

    /// Whitespace-separated `c<INT>` / `a<INT>` tokens, e.g. `a1 a2 c2 c1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace()
            .map(|tok| {
                let mut chars = tok.chars();
                let kind = match chars.next() {
                    Some('a') => OpKind::Annihilator,
                    Some('c') => OpKind::Creator,
                    Some(_) => return Err(ParseError::BadKind(tok.to_string())),
                    None => return Err(ParseError::EmptyToken),
                };
                let mode = chars
                    .as_str()
                    .parse::<u32>()
                    .map_err(|_| ParseError::BadMode(tok.to_string()))?;
                Ok(OperatorSymbol {
                    kind,
                    mode: ModeLabel(mode),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(OperatorWord)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Linear combination of operator words; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorSum {
    terms: BTreeMap<OperatorWord, QPolynomial>,
}

impl OperatorSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_word(word: OperatorWord) -> Self {
        let mut s = Self::zero();
        s.add_term(word, &QPolynomial::one());
        s
    }

    pub fn add_term(&mut self, word: OperatorWord, coeff: &QPolynomial) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(word) {
            Entry::Vacant(e) => {
                e.insert(coeff.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &OperatorSum) -> OperatorSum {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: &QPolynomial) -> OperatorSum {
        let mut out = OperatorSum::zero();
        for (w, x) in &self.terms {
            out.add_term(w.clone(), &(x * c));
        }
        out
    }

    /// Free product: concatenation of words, product of coefficients.
    pub fn mul(&self, other: &OperatorSum) -> OperatorSum {
        let mut out = OperatorSum::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), &(c1 * c2));
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OperatorWord, &QPolynomial)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &OperatorWord) -> QPolynomial {
        self.terms.get(word).cloned().unwrap_or_default()
    }

    /// Coefficient of the identity word.
    pub fn constant_term(&self) -> QPolynomial {
        self.coefficient(&OperatorWord::identity())
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.terms.keys().all(OperatorWord::is_normal_ordered)
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if w.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})·[{w}]")?;
            }
        }
        Ok(())
    }
}

/// Rewrites until every term is normal ordered.
///
/// Pending words are processed in descending inversion count, so every word
/// receives all of its contributions before it is expanded.
fn rewrite(word: &OperatorWord, vacuum_only: bool) -> OperatorSum {
    let mut pending: BTreeMap<(Reverse<usize>, OperatorWord), QPolynomial> = BTreeMap::new();
    let mut done = OperatorSum::zero();
    pending.insert((Reverse(word.inversions()), word.clone()), QPolynomial::one());
    let q = QPolynomial::q_pow(1);

    while let Some(((_, w), coeff)) = pending.pop_first() {
        if coeff.is_zero() {
            continue;
        }
        if vacuum_only && vev_vanishes_trivially(&w) {
            continue;
        }
        let Some(i) = w
            .0
            .windows(2)
            .position(|p| p[0].is_annihilator() && p[1].is_creator())
        else {
            done.add_term(w, &coeff);
            continue;
        };
        let (ann, cre) = (w.0[i], w.0[i + 1]);
        if ann.mode == cre.mode {
            let mut contracted = w.0.clone();
            contracted.drain(i..i + 2);
            let cw = OperatorWord(contracted);
            *pending.entry((Reverse(cw.inversions()), cw)).or_default() += &coeff;
        }
        let mut swapped = w.0.clone();
        swapped.swap(i, i + 1);
        let sw = OperatorWord(swapped);
        *pending.entry((Reverse(sw.inversions()), sw)).or_default() += &(&coeff * &q);
    }
    done
}

/// A word starting with a creator or ending with an annihilator keeps that
/// symbol in every descendant, so none of them has a constant term.
fn vev_vanishes_trivially(w: &OperatorWord) -> bool {
    w.0.first().is_some_and(OperatorSymbol::is_creator)
        || w.0.last().is_some_and(OperatorSymbol::is_annihilator)
}

/// Rewrites `word` to normal order using only the quon relation.
pub fn normal_order(word: &OperatorWord) -> OperatorSum {
    rewrite(word, false)
}

/// `⟨0|word|0⟩`, the constant term of [`normal_order`].
pub fn vacuum_expectation(word: &OperatorWord) -> QPolynomial {
    if word.mode_multiset(OpKind::Creator) != word.mode_multiset(OpKind::Annihilator) {
        return QPolynomial::zero();
    }
    rewrite(word, true).constant_term()
}

/// Labels of `a†_{j1}…a†_{jn}|0⟩`, leftmost label created last.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockWord(pub Vec<ModeLabel>);

impl FockWord {
    pub fn vacuum() -> Self {
        Self(Vec::new())
    }

    pub fn new(labels: Vec<ModeLabel>) -> Self {
        Self(labels)
    }

    pub fn from_u32s(labels: &[u32]) -> Self {
        Self(labels.iter().copied().map(ModeLabel).collect())
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sorted_labels(&self) -> Vec<ModeLabel> {
        let mut v = self.0.clone();
        v.sort();
        v
    }

    /// `a†_k` applied: prepend `k`.
    pub fn create(&self, k: ModeLabel) -> FockWord {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(k);
        v.extend_from_slice(&self.0);
        FockWord(v)
    }
}

impl fmt::Display for FockWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// Finite linear combination of Fock words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FockVector {
    terms: BTreeMap<FockWord, QPolynomial>,
}

impl FockVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(word: FockWord) -> Self {
        let mut v = Self::zero();
        v.add_term(word, &QPolynomial::one());
        v
    }

    pub fn vacuum() -> Self {
        Self::basis(FockWord::vacuum())
    }

    pub fn add_term(&mut self, word: FockWord, coeff: &QPolynomial) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(word) {
            Entry::Vacant(e) => {
                e.insert(coeff.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FockVector, c: &QPolynomial) {
        for (w, x) in &other.terms {
            self.add_term(w.clone(), &(x * c));
        }
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.add_scaled(other, &QPolynomial::constant(-1));
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockWord, &QPolynomial)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &FockWord) -> QPolynomial {
        self.terms.get(word).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `a_k` on a single Fock word.
pub fn apply_annihilator(k: ModeLabel, state: &FockWord) -> FockVector {
    let mut out = FockVector::zero();
    for (i, &j) in state.0.iter().enumerate() {
        if j == k {
            let mut rest = state.0.clone();
            rest.remove(i);
            out.add_term(FockWord(rest), &QPolynomial::q_pow(i));
        }
    }
    out
}

pub fn apply_symbol(symbol: OperatorSymbol, state: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (w, c) in state.terms() {
        match symbol.kind {
            OpKind::Creator => out.add_term(w.create(symbol.mode), c),
            OpKind::Annihilator => out.add_scaled(&apply_annihilator(symbol.mode, w), c),
        }
    }
    out
}

/// Applies `word` to `state`, rightmost symbol first.
pub fn apply_word(word: &OperatorWord, state: &FockVector) -> FockVector {
    word.0
        .iter()
        .rev()
        .fold(state.clone(), |acc, &s| apply_symbol(s, &acc))
}

/// `⟨u|v⟩` computed by peeling creators off `u` as annihilators on `v`.
pub fn q_inner_product(u: &FockWord, v: &FockWord) -> QPolynomial {
    if u.len() != v.len() || u.sorted_labels() != v.sorted_labels() {
        return QPolynomial::zero();
    }
    inner_rec(&u.0, v)
}

fn inner_rec(u: &[ModeLabel], v: &FockWord) -> QPolynomial {
    let Some((&first, rest)) = u.split_first() else {
        return if v.is_empty() {
            QPolynomial::one()
        } else {
            QPolynomial::zero()
        };
    };
    let mut acc = QPolynomial::zero();
    for (w, c) in apply_annihilator(first, v).terms() {
        let sub = inner_rec(rest, w);
        if !sub.is_zero() {
            acc += &(c * &sub);
        }
    }
    acc
}

/// Sesquilinear extension of [`q_inner_product`] (coefficients are real
/// polynomials, so no conjugation is needed).
pub fn vector_inner_product(u: &FockVector, v: &FockVector) -> QPolynomial {
    let mut acc = QPolynomial::zero();
    for (wu, cu) in u.terms() {
        for (wv, cv) in v.terms() {
            let ip = q_inner_product(wu, wv);
            if !ip.is_zero() {
                acc += &(&(cu * cv) * &ip);
            }
        }
    }
    acc
}

/// All words of length exactly `n` over `modes`, lexicographic in `modes` order.
pub fn words_of_length(modes: &[ModeLabel], n: usize) -> Vec<FockWord> {
    let mut out = vec![FockWord::vacuum()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                modes.iter().map(move |&m| {
                    let mut v = w.0.clone();
                    v.push(m);
                    FockWord(v)
                })
            })
            .collect();
    }
    out
}
