//! Random-sign Bose-component ansatz for quon operators.
//!
//! `a_k = N^{-1/2} Σ_α b_k^(α)` where components `α ≠ β` commute up to a sign
//! `s(α, β) = ±1` drawn with `P(+1) = (1 + q) / 2`. The vacuum expectation
//! of a word at finite `N` is evaluated combinatorially: each contraction
//! diagram contributes `Σ_assignments Π_{crossing chords} s(α_i, α_j)` (with
//! `s(α, α) = 1`), and the sum over component assignments is done by variable
//! elimination on the crossing graph.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::qfock::OperatorWord;
use crate::wick::{enumerate_contractions, ChordDiagram, WickError};

/// Largest elimination table the evaluator will build.
pub const MAX_TABLE: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpeicherError {
    #[error("q = {0} is outside [-1, 1]")]
    QOutOfRange(f64),
    #[error("component count must be at least 1")]
    NoComponents,
    #[error("at least one sample is required")]
    NoSamples,
    #[error(transparent)]
    Word(#[from] WickError),
    #[error("component sum needs a table of {entries} entries (limit {limit})")]
    TooExpensive { entries: String, limit: usize },
}

/// Symmetric ±1 signs over unordered component pairs, stored as the packed
/// strict upper triangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    n: usize,
    upper: Vec<i8>,
}

impl SignMatrix {
    pub fn constant(n: usize, s: i8) -> Self {
        Self {
            n,
            upper: vec![s; n * n.saturating_sub(1) / 2],
        }
    }

    /// Row-major `n × n` entries; only the strict upper triangle is read.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i8) -> Self {
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                upper.push(if f(a, b) < 0 { -1 } else { 1 });
            }
        }
        Self { n, upper }
    }

    pub fn components(&self) -> usize {
        self.n
    }

    fn index(&self, a: usize, b: usize) -> usize {
        // row a of the strict upper triangle starts after Σ_{i<a} (n-1-i) entries
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    pub fn get(&self, a: usize, b: usize) -> i8 {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Less => self.upper[self.index(a, b)],
            std::cmp::Ordering::Greater => self.upper[self.index(b, a)],
        }
    }

    pub fn off_diagonal(&self) -> &[i8] {
        &self.upper
    }
}

fn check_q(q: f64) -> Result<(), SpeicherError> {
    if (-1.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(SpeicherError::QOutOfRange(q))
    }
}

/// Signs for sample `stream` of a run seeded by `seed`.
pub fn sample_sign_matrix_stream(
    n: usize,
    q: f64,
    seed: u64,
    stream: u64,
) -> Result<SignMatrix, SpeicherError> {
    check_q(q)?;
    if n == 0 {
        return Err(SpeicherError::NoComponents);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let coin = Bernoulli::new((1.0 + q) / 2.0).expect("probability in [0, 1]");
    Ok(SignMatrix::from_fn(n, |_, _| {
        if coin.sample(&mut rng) {
            1
        } else {
            -1
        }
    }))
}

pub fn sample_sign_matrix(n: usize, q: f64, seed: u64) -> Result<SignMatrix, SpeicherError> {
    sample_sign_matrix_stream(n, q, seed, 0)
}

struct Factor {
    vars: Vec<usize>,
    table: Vec<i128>,
}

impl Factor {
    fn value(&self, assignment: &[usize], n: usize) -> i128 {
        let idx = self.vars.iter().fold(0, |acc, &v| acc * n + assignment[v]);
        self.table[idx]
    }
}

fn table_len(n: usize, vars: usize) -> Result<usize, SpeicherError> {
    n.checked_pow(vars as u32)
        .filter(|&t| t <= MAX_TABLE)
        .ok_or_else(|| SpeicherError::TooExpensive {
            entries: BigInt::from(n).pow(vars as u32).to_string(),
            limit: MAX_TABLE,
        })
}

/// `Σ_{α ∈ [N]^chords} Π_{(i,j) ∈ edges} w(α_i, α_j)`.
fn sum_over_assignments(
    chords: usize,
    edges: &[(usize, usize)],
    n: usize,
    w: impl Fn(usize, usize) -> i128,
) -> Result<i128, SpeicherError> {
    let mut factors: Vec<Factor> = edges
        .iter()
        .map(|&(i, j)| {
            let mut table = vec![0; n * n];
            for a in 0..n {
                for b in 0..n {
                    table[a * n + b] = w(a, b);
                }
            }
            Factor {
                vars: vec![i, j],
                table,
            }
        })
        .collect();
    let mut scalar: i128 = 1;
    let mut remaining: Vec<usize> = (0..chords).collect();
    while !remaining.is_empty() {
        // eliminate the variable with the smallest neighbourhood
        let scope_of = |v: usize, factors: &[Factor]| {
            let mut s: Vec<usize> = factors
                .iter()
                .filter(|f| f.vars.contains(&v))
                .flat_map(|f| f.vars.iter().copied())
                .filter(|&x| x != v)
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let (pos, v, scope) = remaining
            .iter()
            .enumerate()
            .map(|(p, &v)| (p, v, scope_of(v, &factors)))
            .min_by_key(|(_, v, s)| (s.len(), *v))
            .expect("non-empty");
        remaining.remove(pos);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        if touching.is_empty() {
            scalar *= n as i128;
            continue;
        }
        let size = table_len(n, scope.len() + 1)? / n;
        let mut table = vec![0; size];
        let mut assignment = vec![0usize; chords];
        for (idx, slot) in table.iter_mut().enumerate() {
            let mut rem = idx;
            for &s in scope.iter().rev() {
                assignment[s] = rem % n;
                rem /= n;
            }
            let mut total = 0;
            for a in 0..n {
                assignment[v] = a;
                total += touching
                    .iter()
                    .map(|f| f.value(&assignment, n))
                    .product::<i128>();
            }
            *slot = total;
        }
        if scope.is_empty() {
            scalar *= table[0];
        } else {
            factors.push(Factor { vars: scope, table });
        }
    }
    Ok(scalar)
}

fn diagram_sum(d: &ChordDiagram, s: &SignMatrix) -> Result<i128, SpeicherError> {
    sum_over_assignments(d.pairs.len(), &d.crossing_pairs(), s.components(), |a, b| {
        s.get(a, b) as i128
    })
}

fn check_word(word: &OperatorWord) -> Result<Vec<ChordDiagram>, SpeicherError> {
    Ok(enumerate_contractions(word)?
        .into_iter()
        .map(|(d, _)| d)
        .collect())
}

/// Integer numerator `Σ_diagrams Σ_assignments Π s`, to be divided by `N^n`.
fn numerator(diagrams: &[ChordDiagram], s: &SignMatrix) -> Result<i128, SpeicherError> {
    diagrams.iter().map(|d| diagram_sum(d, s)).sum()
}

/// Exact finite-`N` vacuum expectation of `word` for fixed signs.
pub fn expectation_given_signs(
    word: &OperatorWord,
    s: &SignMatrix,
) -> Result<BigRational, SpeicherError> {
    let diagrams = check_word(word)?;
    let chords = word.len() / 2;
    let num = numerator(&diagrams, s)?;
    Ok(BigRational::new(
        BigInt::from(num),
        BigInt::from(s.components()).pow(chords as u32),
    ))
}

/// Exact average of [`expectation_given_signs`] over the sign law at `q`.
///
/// Crossing edges whose chords land on the same unordered component pair
/// share one sign, so the average of `s^m` is `1` for even `m` and `q` for
/// odd `m`. Brute force over assignments; meant for small `N`.
pub fn sign_averaged_expectation(
    word: &OperatorWord,
    q: &BigRational,
    n: usize,
) -> Result<BigRational, SpeicherError> {
    if n == 0 {
        return Err(SpeicherError::NoComponents);
    }
    let diagrams = check_word(word)?;
    let chords = word.len() / 2;
    let count = table_len(n, chords)?;
    let mut total = BigRational::zero();
    for d in &diagrams {
        let edges = d.crossing_pairs();
        let mut assignment = vec![0usize; chords];
        for idx in 0..count {
            let mut rem = idx;
            for slot in assignment.iter_mut().rev() {
                *slot = rem % n;
                rem /= n;
            }
            let mut odd: BTreeMap<(usize, usize), bool> = BTreeMap::new();
            for &(i, j) in &edges {
                let (a, b) = (assignment[i], assignment[j]);
                if a != b {
                    *odd.entry((a.min(b), a.max(b))).or_default() ^= true;
                }
            }
            let odd_pairs = odd.values().filter(|&&o| o).count();
            total += q.pow(odd_pairs as i32);
        }
    }
    Ok(total / BigRational::from_integer(BigInt::from(n).pow(chords as u32)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub components: usize,
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean of the exact finite-`N` expectation over `samples` independent sign
/// draws; sample `i` uses stream `i` of the generator seeded by `seed`.
pub fn mc_estimate(
    word: &OperatorWord,
    q: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, SpeicherError> {
    check_q(q)?;
    if n == 0 {
        return Err(SpeicherError::NoComponents);
    }
    if samples == 0 {
        return Err(SpeicherError::NoSamples);
    }
    let diagrams = check_word(word)?;
    let denom = (n as f64).powi((word.len() / 2) as i32);
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_sign_matrix_stream(n, q, seed, i as u64)?;
            Ok(numerator(&diagrams, &s)? as f64 / denom)
        })
        .collect::<Result<_, SpeicherError>>()?;
    let mean = pairwise_sum(&values) / samples as f64;
    let stderr = if samples > 1 {
        let dev: Vec<f64> = values.iter().map(|x| (x - mean).powi(2)).collect();
        (pairwise_sum(&dev) / (samples - 1) as f64).sqrt() / (samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr,
        samples,
        components: n,
    })
}

/// `x` as an `f64`, for reports.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> OperatorWord {
        s.parse().unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn packed_indexing() {
        let s = SignMatrix::from_fn(5, |a, b| if (a + b) % 2 == 0 { 1 } else { -1 });
        for a in 0..5 {
            for b in 0..5 {
                let expect = if a == b || (a + b) % 2 == 0 { 1 } else { -1 };
                assert_eq!(s.get(a, b), expect);
                assert_eq!(s.get(a, b), s.get(b, a));
            }
        }
    }

    #[test]
    fn corner_laws() {
        let plus = sample_sign_matrix(30, 1.0, 7).unwrap();
        assert!(plus.off_diagonal().iter().all(|&x| x == 1));
        let minus = sample_sign_matrix(30, -1.0, 7).unwrap();
        assert!(minus.off_diagonal().iter().all(|&x| x == -1));
        assert_eq!(
            sample_sign_matrix(3, 1.5, 0),
            Err(SpeicherError::QOutOfRange(1.5))
        );
    }

    #[test]
    fn fair_coin_mean() {
        let s = sample_sign_matrix(200, 0.0, 11).unwrap();
        let k = s.off_diagonal().len() as f64;
        let mean: f64 = s.off_diagonal().iter().map(|&x| x as f64).sum::<f64>() / k;
        assert!(mean.abs() < 3.0 / k.sqrt());
    }

    #[test]
    fn deterministic_streams() {
        assert_eq!(
            sample_sign_matrix_stream(20, 0.3, 5, 9).unwrap(),
            sample_sign_matrix_stream(20, 0.3, 5, 9).unwrap()
        );
        assert_ne!(
            sample_sign_matrix_stream(20, 0.3, 5, 9).unwrap(),
            sample_sign_matrix_stream(20, 0.3, 5, 10).unwrap()
        );
    }

    #[test]
    fn fixed_sign_examples() {
        let s = SignMatrix::constant(2, -1);
        assert_eq!(expectation_given_signs(&w("a1 c1"), &s).unwrap(), rat(1, 1));
        assert_eq!(
            expectation_given_signs(&w("a1 a2 c2 c1"), &s).unwrap(),
            rat(1, 1)
        );
        // (2 + 2 s) / 4
        assert_eq!(
            expectation_given_signs(&w("a1 a2 c1 c2"), &s).unwrap(),
            rat(0, 1)
        );
        let s = SignMatrix::constant(2, 1);
        assert_eq!(
            expectation_given_signs(&w("a1 a2 c1 c2"), &s).unwrap(),
            rat(1, 1)
        );
    }

    #[test]
    fn elimination_matches_brute_force_on_triangle() {
        // three mutually crossing chords
        let word = w("a1 a2 a3 c1 c2 c3");
        let s = SignMatrix::from_fn(4, |a, b| if a * 3 + b == 5 { -1 } else { 1 });
        let fast = expectation_given_signs(&word, &s).unwrap();
        let mut total = 0i64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    total += (s.get(a, b) * s.get(a, c) * s.get(b, c)) as i64;
                }
            }
        }
        assert_eq!(fast, rat(total, 64));
    }

    #[test]
    fn averaged_single_crossing() {
        let q = rat(1, 2);
        for n in 1..5 {
            let expect = &q + (rat(1, 1) - &q) / rat(n as i64, 1);
            assert_eq!(
                sign_averaged_expectation(&w("a1 a2 c1 c2"), &q, n).unwrap(),
                expect
            );
        }
    }

    #[test]
    fn trivial_word_has_no_variance() {
        let e = mc_estimate(&w("a1 c1"), 0.3, 10, 50, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn unbalanced_word_rejected() {
        let s = SignMatrix::constant(2, 1);
        assert!(matches!(
            expectation_given_signs(&w("a1 c1 c2"), &s),
            Err(SpeicherError::Word(_))
        ));
    }
}
