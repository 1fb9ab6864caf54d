//! n-quon Gram matrices and the Zagier determinant.
//!
//! Rows and columns are indexed by the permutations of `n` distinct labels
//! `1..=n` in lexicographic order of one-line notation. Entry `(σ, τ)` is
//! `⟨σ|τ⟩`, where `|σ⟩ = a†_{σ(1)}…a†_{σ(n)}|0⟩`; it equals `q^{d(σ, τ)}`
//! with `d` the number of label pairs whose relative order differs between
//! the two orderings (the inversion count of `σ⁻¹∘τ`).

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::QPolynomial;
use crate::qfock::{q_inner_product, FockWord, ModeLabel};

/// Eigenvalues above this are reported positive.
pub const EIGEN_POSITIVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GramError {
    #[error("particle count {n} must be at least 1")]
    ZeroParticles { n: usize },
    #[error("n = {n} exceeds the configured Gram limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("exact determinant of a {dim}x{dim} matrix exceeds the configured limit of {limit}")]
    ExactLimit { dim: usize, limit: usize },
    #[error("sample q = {0} is not strictly inside (-1, 1)")]
    SampleOutOfRange(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GramLimits {
    /// Largest particle count for which the n!×n! matrix is built.
    pub max_n: usize,
    /// Largest matrix dimension for exact polynomial elimination.
    pub max_exact_dim: usize,
}

impl Default for GramLimits {
    fn default() -> Self {
        Self {
            max_n: 5,
            max_exact_dim: 24,
        }
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation
    while let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) {
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

pub fn inversions(perm: &[usize]) -> usize {
    let mut c = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                c += 1;
            }
        }
    }
    c
}

pub fn sign(perm: &[usize]) -> i64 {
    if inversions(perm).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// `(a∘b)(i) = a(b(i))`.
pub fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

/// Fock word `(σ(0)+1, …, σ(n-1)+1)`.
pub fn permutation_word(perm: &[usize]) -> FockWord {
    FockWord(perm.iter().map(|&p| ModeLabel(p as u32 + 1)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramMatrix {
    pub n: usize,
    pub permutations: Vec<Vec<usize>>,
    entries: Vec<QPolynomial>,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.permutations.len()
    }

    pub fn get(&self, row: usize, col: usize) -> &QPolynomial {
        &self.entries[row * self.dim() + col]
    }

    pub fn rows(&self) -> Vec<Vec<QPolynomial>> {
        self.entries
            .chunks(self.dim())
            .map(<[QPolynomial]>::to_vec)
            .collect()
    }

    pub fn eval_f64(&self, q: f64) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.get(i, j).eval_f64(q))
    }

    pub fn eval_int(&self, q: i64) -> Vec<Vec<BigInt>> {
        let q = BigInt::from(q);
        self.entries
            .chunks(self.dim())
            .map(|row| row.iter().map(|p| p.eval_int(&q)).collect())
            .collect()
    }
}

/// Builds `M_n(q)` entry by entry from the free-Fock inner product.
pub fn gram_matrix(n: usize, limits: &GramLimits) -> Result<GramMatrix, GramError> {
    if n == 0 {
        return Err(GramError::ZeroParticles { n });
    }
    if n > limits.max_n {
        return Err(GramError::TooLarge {
            n,
            limit: limits.max_n,
        });
    }
    let perms = permutations(n);
    let words: Vec<FockWord> = perms.iter().map(|p| permutation_word(p)).collect();
    let d = perms.len();
    let entries: Vec<QPolynomial> = (0..d * d)
        .into_par_iter()
        .map(|idx| q_inner_product(&words[idx / d], &words[idx % d]))
        .collect();
    Ok(GramMatrix {
        n,
        permutations: perms,
        entries,
    })
}

/// Factored form `Π_{k=1}^{n-1} (1 - q^{k(k+1)})^{(n-k) n! / (k(k+1))}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZagierProduct {
    pub n: usize,
    /// `(k(k+1), exponent)` per factor, `k = 1..n-1`.
    pub factors: Vec<(usize, u64)>,
}

impl ZagierProduct {
    pub fn new(n: usize) -> Self {
        let nf = factorial(n);
        let factors = (1..n)
            .map(|k| {
                let kk = (k * (k + 1)) as u64;
                let num = (n - k) as u64 * nf;
                debug_assert_eq!(num % kk, 0);
                (k * (k + 1), num / kk)
            })
            .collect();
        Self { n, factors }
    }

    pub fn expand(&self) -> QPolynomial {
        self.factors.iter().fold(QPolynomial::one(), |acc, &(pw, e)| {
            let base = &QPolynomial::one() - &QPolynomial::q_pow(pw);
            &acc * &base.pow(e)
        })
    }

    pub fn eval_f64(&self, q: f64) -> f64 {
        self.factors
            .iter()
            .map(|&(pw, e)| (1.0 - q.powi(pw as i32)).powf(e as f64))
            .product()
    }
}

impl std::fmt::Display for ZagierProduct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, &(pw, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "(1-q^{pw})")?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

pub fn zagier_determinant(n: usize) -> QPolynomial {
    ZagierProduct::new(n).expand()
}

/// Fraction-free (Bareiss) determinant over `Z[q]`.
pub fn bareiss_det(mut m: Vec<Vec<QPolynomial>>) -> QPolynomial {
    let d = m.len();
    if d == 0 {
        return QPolynomial::one();
    }
    let mut negate = false;
    let mut prev = QPolynomial::one();
    for k in 0..d - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..d).find(|&r| !m[r][k].is_zero()) else {
                return QPolynomial::zero();
            };
            m.swap(k, p);
            negate = !negate;
        }
        let (top, bottom) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pivot = &pivot_row[k];
        bottom.par_iter_mut().for_each(|row| {
            let lead = row[k].clone();
            for j in k + 1..d {
                let num = &(pivot * &row[j]) - &(&lead * &pivot_row[j]);
                row[j] = num
                    .exact_div(&prev)
                    .expect("Bareiss step must divide exactly");
            }
            row[k] = QPolynomial::zero();
        });
        prev = m[k][k].clone();
    }
    let det = m[d - 1][d - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

pub fn det_exact(m: &GramMatrix, limits: &GramLimits) -> Result<QPolynomial, GramError> {
    if m.dim() > limits.max_exact_dim {
        return Err(GramError::ExactLimit {
            dim: m.dim(),
            limit: limits.max_exact_dim,
        });
    }
    Ok(bareiss_det(m.rows()))
}

/// Determinant of the evaluated matrix via LU with partial pivoting.
pub fn det_f64(m: &GramMatrix, q: f64) -> f64 {
    m.eval_f64(q).lu().determinant()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZagierSample {
    pub q: f64,
    pub det_gram: f64,
    pub det_zagier: f64,
    pub relative_error: f64,
}

/// Floating comparison of `det M_n(q)` against the product formula.
pub fn zagier_float_check(m: &GramMatrix, samples: &[f64]) -> Vec<ZagierSample> {
    let z = ZagierProduct::new(m.n);
    samples
        .par_iter()
        .map(|&q| {
            let det_gram = det_f64(m, q);
            let det_zagier = z.eval_f64(q);
            ZagierSample {
                q,
                det_gram,
                det_zagier,
                relative_error: ((det_gram - det_zagier) / det_zagier).abs(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenSample {
    pub q: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub positive: bool,
}

/// Minimum eigenvalue of `M_n(q)` at each sample.
pub fn positivity_scan(m: &GramMatrix, samples: &[f64]) -> Result<Vec<EigenSample>, GramError> {
    if let Some(&bad) = samples.iter().find(|q| !(q.abs() < 1.0)) {
        return Err(GramError::SampleOutOfRange(bad));
    }
    Ok(samples
        .par_iter()
        .map(|&q| {
            let eig = SymmetricEigen::new(m.eval_f64(q)).eigenvalues;
            let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            EigenSample {
                q,
                min_eigenvalue: min,
                max_eigenvalue: max,
                positive: min > EIGEN_POSITIVE_TOL,
            }
        })
        .collect())
}

/// `n` evenly spaced points strictly inside `(lo, hi)` (cell midpoints).
pub fn midpoint_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64)
        .collect()
}

/// Exact rank of an integer matrix by rational Gaussian elimination.
pub fn exact_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().cloned().map(BigRational::from).collect())
        .collect();
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in 0..nrows {
            if r != rank && !m[r][col].is_zero() {
                let factor = &m[r][col] / &pivot;
                for c in col..ncols {
                    let delta = &factor * &m[rank][c];
                    m[r][c] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of `M_n(±1)`, evaluated exactly.
pub fn rank_at_limit(m: &GramMatrix, sign: i64) -> usize {
    exact_rank(&m.eval_int(sign.signum()))
}

/// The all-ones vector at `q = 1`, or `sgn(σ)` at `q = -1`.
pub fn limit_sign_vector(m: &GramMatrix, sign: i64) -> Vec<i64> {
    m.permutations
        .iter()
        .map(|p| if sign > 0 { 1 } else { self::sign(p) })
        .collect()
}

/// Whether the limit sign vector is an exact eigenvector of `M_n(±1)` with
/// eigenvalue `n!`.
pub fn limit_eigenvector_holds(m: &GramMatrix, sign: i64) -> bool {
    let mat = m.eval_int(sign.signum());
    let v = limit_sign_vector(m, sign);
    let nf = BigInt::from(factorial(m.n));
    mat.iter().zip(&v).all(|(row, &vi)| {
        let dot: BigInt = row
            .iter()
            .zip(&v)
            .map(|(a, &b)| a * BigInt::from(b))
            .sum();
        dot == &nf * BigInt::from(vi)
    })
}

/// Checks an exact equality `det == zagier` and returns both.
pub fn zagier_exact_match(
    n: usize,
    limits: &GramLimits,
) -> Result<(QPolynomial, QPolynomial, bool), GramError> {
    let m = gram_matrix(n, limits)?;
    let det = det_exact(&m, limits)?;
    let z = zagier_determinant(n);
    let ok = det == z;
    Ok((det, z, ok))
}

/// Largest absolute coefficient, for reporting.
pub fn max_abs_coeff(p: &QPolynomial) -> BigInt {
    p.coeffs()
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(BigInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> QPolynomial {
        QPolynomial::from_i64s(c)
    }

    #[test]
    fn permutations_are_lexicographic() {
        let perms = permutations(3);
        assert_eq!(
            perms,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn small_gram_matrices() {
        let lim = GramLimits::default();
        let g1 = gram_matrix(1, &lim).unwrap();
        assert_eq!(g1.rows(), vec![vec![p(&[1])]]);
        let g2 = gram_matrix(2, &lim).unwrap();
        assert_eq!(
            g2.rows(),
            vec![vec![p(&[1]), p(&[0, 1])], vec![p(&[0, 1]), p(&[1])]]
        );
        let g3 = gram_matrix(3, &lim).unwrap();
        // identity vs adjacent transposition (0 2 1), vs 3-cycle (1 2 0)
        assert_eq!(g3.get(0, 1), &p(&[0, 1]));
        assert_eq!(g3.get(0, 3), &p(&[0, 0, 1]));
        assert_eq!(g3.get(0, 5), &p(&[0, 0, 0, 1]));
    }

    #[test]
    fn zero_and_oversized_rejected() {
        let lim = GramLimits::default();
        assert_eq!(gram_matrix(0, &lim), Err(GramError::ZeroParticles { n: 0 }));
        assert_eq!(
            gram_matrix(6, &lim),
            Err(GramError::TooLarge { n: 6, limit: 5 })
        );
        let g5 = gram_matrix(5, &lim).unwrap();
        assert_eq!(
            det_exact(&g5, &lim),
            Err(GramError::ExactLimit { dim: 120, limit: 24 })
        );
    }

    #[test]
    fn zagier_small_cases() {
        assert_eq!(zagier_determinant(1), QPolynomial::one());
        assert_eq!(zagier_determinant(2), p(&[1, 0, -1]));
        let z3 = ZagierProduct::new(3);
        assert_eq!(z3.factors, vec![(2, 6), (6, 1)]);
        assert_eq!(z3.to_string(), "(1-q^2)^6 (1-q^6)");
        assert_eq!(ZagierProduct::new(1).to_string(), "1");
        assert_eq!(ZagierProduct::new(4).factors, vec![(2, 36), (6, 8), (12, 2)]);
    }

    #[test]
    fn bareiss_small() {
        assert_eq!(bareiss_det(vec![]), QPolynomial::one());
        let id = vec![vec![p(&[1]), p(&[])], vec![p(&[]), p(&[1])]];
        assert_eq!(bareiss_det(id), QPolynomial::one());
        // needs a row swap
        let m = vec![vec![p(&[]), p(&[1])], vec![p(&[1]), p(&[0, 1])]];
        assert_eq!(bareiss_det(m), p(&[-1]));
        let singular = vec![vec![p(&[1, 1]), p(&[1, 1])], vec![p(&[1, 1]), p(&[1, 1])]];
        assert!(bareiss_det(singular).is_zero());
    }

    #[test]
    fn exact_det_n2_n3() {
        let lim = GramLimits::default();
        let (det2, z2, ok2) = zagier_exact_match(2, &lim).unwrap();
        assert!(ok2);
        assert_eq!(det2, z2);
        let (_, _, ok3) = zagier_exact_match(3, &lim).unwrap();
        assert!(ok3);
    }

    #[test]
    fn positivity_closed_form_n2() {
        let g = gram_matrix(2, &GramLimits::default()).unwrap();
        let s = positivity_scan(&g, &[0.0, 0.5]).unwrap();
        assert!((s[0].min_eigenvalue - 1.0).abs() < 1e-14);
        assert!((s[1].min_eigenvalue - 0.5).abs() < 1e-14);
        assert!(positivity_scan(&g, &[1.0]).is_err());
        let g3 = gram_matrix(3, &GramLimits::default()).unwrap();
        assert!(positivity_scan(&g3, &[0.9]).unwrap()[0].positive);
    }

    #[test]
    fn rank_collapse_at_limits() {
        let lim = GramLimits::default();
        assert_eq!(rank_at_limit(&gram_matrix(2, &lim).unwrap(), 1), 1);
        assert_eq!(rank_at_limit(&gram_matrix(3, &lim).unwrap(), -1), 1);
        assert_eq!(rank_at_limit(&gram_matrix(1, &lim).unwrap(), -1), 1);
        assert!(limit_eigenvector_holds(&gram_matrix(3, &lim).unwrap(), -1));
        assert!(limit_eigenvector_holds(&gram_matrix(3, &lim).unwrap(), 1));
    }

    #[test]
    fn exact_rank_basic() {
        let m = vec![
            vec![BigInt::from(1), BigInt::from(2)],
            vec![BigInt::from(2), BigInt::from(4)],
        ];
        assert_eq!(exact_rank(&m), 1);
        assert_eq!(exact_rank(&[]), 0);
    }

    #[test]
    fn midpoints_stay_inside() {
        let s = midpoint_samples(-0.99, 0.99, 50);
        assert_eq!(s.len(), 50);
        assert!(s.iter().all(|q| q.abs() < 0.99));
        assert_eq!(max_abs_coeff(&p(&[1, -3])), BigInt::from(3));
    }
}
