//! Vacuum expectation values by contraction enumeration.
//!
//! Each complete contraction pairs an annihilator with a creator of the same
//! mode standing to its right. Drawing the pairs as arcs above the word, the
//! term carries `q` to the number of interleaving arc pairs. This is an
//! independent route to [`crate::qfock::vacuum_expectation`].

use serde::Serialize;
use thiserror::Error;

use crate::poly::QPolynomial;
use crate::qfock::{OpKind, OperatorWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WickError {
    #[error("word has {annihilators} annihilators but {creators} creators; not a vacuum expectation")]
    Unbalanced { annihilators: usize, creators: usize },
}

/// Perfect matching of word positions, `(annihilator, creator)` with the
/// annihilator strictly left; sorted by annihilator position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ChordDiagram {
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CrossingCount(pub usize);

/// Two chords interleave iff exactly one endpoint of one lies strictly
/// between the endpoints of the other.
pub fn chords_interleave(a: (usize, usize), b: (usize, usize)) -> bool {
    let (a0, a1) = (a.0.min(a.1), a.0.max(a.1));
    let (b0, b1) = (b.0.min(b.1), b.0.max(b.1));
    (a0 < b0 && b0 < a1 && a1 < b1) || (b0 < a0 && a0 < b1 && b1 < a1)
}

impl ChordDiagram {
    pub fn crossings(&self) -> CrossingCount {
        let mut c = 0;
        for (i, &a) in self.pairs.iter().enumerate() {
            for &b in &self.pairs[i + 1..] {
                if chords_interleave(a, b) {
                    c += 1;
                }
            }
        }
        CrossingCount(c)
    }

    /// Index pairs `(i, j)`, `i < j`, of interleaving chords.
    pub fn crossing_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.pairs.len() {
            for j in i + 1..self.pairs.len() {
                if chords_interleave(self.pairs[i], self.pairs[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

fn check_balanced(word: &OperatorWord) -> Result<(), WickError> {
    let annihilators = word.count(OpKind::Annihilator);
    let creators = word.count(OpKind::Creator);
    if annihilators != creators {
        return Err(WickError::Unbalanced {
            annihilators,
            creators,
        });
    }
    Ok(())
}

/// Every label-respecting contraction of `word`, lexicographic by annihilator
/// position then creator position.
pub fn enumerate_contractions(
    word: &OperatorWord,
) -> Result<Vec<(ChordDiagram, CrossingCount)>, WickError> {
    check_balanced(word)?;
    let syms = word.symbols();
    let annihilators: Vec<usize> = (0..syms.len())
        .filter(|&i| syms[i].is_annihilator())
        .collect();
    let mut used = vec![false; syms.len()];
    let mut current = Vec::with_capacity(annihilators.len());
    let mut out = Vec::new();

    fn recurse(
        word: &OperatorWord,
        annihilators: &[usize],
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<(ChordDiagram, CrossingCount)>,
    ) {
        let Some((&a, rest)) = annihilators.split_first() else {
            let d = ChordDiagram {
                pairs: current.clone(),
            };
            let c = d.crossings();
            out.push((d, c));
            return;
        };
        let syms = word.symbols();
        for j in a + 1..syms.len() {
            if !used[j] && syms[j].is_creator() && syms[j].mode == syms[a].mode {
                used[j] = true;
                current.push((a, j));
                recurse(word, rest, used, current, out);
                current.pop();
                used[j] = false;
            }
        }
    }

    recurse(word, &annihilators, &mut used, &mut current, &mut out);
    Ok(out)
}

/// `Σ_diagrams q^crossings`.
pub fn wick_expectation(word: &OperatorWord) -> Result<QPolynomial, WickError> {
    let diagrams = enumerate_contractions(word)?;
    let max = diagrams.iter().map(|(_, c)| c.0).max().unwrap_or(0);
    let mut counts = vec![0i64; max + 1];
    for (_, c) in &diagrams {
        counts[c.0] += 1;
    }
    if diagrams.is_empty() {
        return Ok(QPolynomial::zero());
    }
    Ok(QPolynomial::from_i64s(&counts))
}
