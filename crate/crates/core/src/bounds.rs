//! Arithmetic of statistics-violation parameters.
//!
//! A fermionic violation `v_F` and a bosonic one `v_B` map to the quon
//! parameter by `q = 2 v_F - 1` and `q = 1 - 2 v_B`. Everything that the
//! bound bookkeeping needs is done in exact rationals so that numbers like
//! `1 - 6.8e-26` survive.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::qfock::{apply_word, q_inner_product, words_of_length, FockVector, FockWord, ModeLabel, OperatorSymbol, OperatorWord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("cannot parse {0:?} as an exact number")]
    Parse(String),
    #[error("violation parameter {0} is outside [0, 1]")]
    VOutOfRange(String),
    #[error("q = {0} is outside [-1, 1]")]
    QOutOfRange(String),
    #[error("q = {0} is negative and has no real square root")]
    NegativeQ(String),
    #[error("constituent count must be at least 1")]
    NoConstituents,
    #[error("lambda = {0} must satisfy |lambda| < 1")]
    LambdaOutOfRange(f64),
    #[error("density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("momenta give coinciding labels ({0}); the δ terms are excluded")]
    CoincidentMomenta(String),
    #[error("momentum label {0} is negative")]
    NegativeLabel(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Fermionic,
    Bosonic,
}

/// Exact decimal, scientific (`1.7e-26`) or fraction (`3/4`) input.
pub fn parse_rational(s: &str) -> Result<BigRational, BoundsError> {
    let err = || BoundsError::Parse(s.to_string());
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let all: BigInt = format!("0{int}{frac}").parse().map_err(|_| err())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut x = if scale >= 0 {
        BigRational::from_integer(all * ten.pow(scale as u32))
    } else {
        BigRational::new(all, ten.pow((-scale) as u32))
    };
    if neg {
        x = -x;
    }
    Ok(x)
}

/// Terminating decimals print in full; anything else as `p/q`.
pub fn format_rational(x: &BigRational) -> String {
    let mut d = x.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while d.is_multiple_of(&two) {
        d /= &two;
        twos += 1;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", x.numer(), x.denom());
    }
    let places = twos.max(fives);
    let scaled = (x * BigRational::from_integer(BigInt::from(10).pow(places))).to_integer();
    if places == 0 {
        return scaled.to_string();
    }
    let digits = scaled.abs().to_string();
    let width = places as usize + 1;
    let padded = format!("{digits:0>width$}");
    let (int, frac) = padded.split_at(padded.len() - places as usize);
    let sign = if scaled.is_negative() { "-" } else { "" };
    format!("{sign}{int}.{frac}")
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn two() -> BigRational {
    BigRational::from_integer(2.into())
}

fn check_q(q: &BigRational) -> Result<(), BoundsError> {
    if q.abs() > BigRational::one() {
        Err(BoundsError::QOutOfRange(format_rational(q)))
    } else {
        Ok(())
    }
}

pub fn q_from_v(v: &BigRational, flavor: Flavor) -> Result<BigRational, BoundsError> {
    if v.is_negative() || v > &BigRational::one() {
        return Err(BoundsError::VOutOfRange(format_rational(v)));
    }
    Ok(match flavor {
        Flavor::Fermionic => two() * v - BigRational::one(),
        Flavor::Bosonic => BigRational::one() - two() * v,
    })
}

pub fn v_from_q(q: &BigRational, flavor: Flavor) -> Result<BigRational, BoundsError> {
    check_q(q)?;
    Ok(match flavor {
        Flavor::Fermionic => (BigRational::one() + q) * half(),
        Flavor::Bosonic => (BigRational::one() - q) * half(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Propagation {
    pub q_f: String,
    pub v_f: String,
    /// `q_f²`.
    pub q_b: String,
    pub q_b_f64: f64,
    /// `(1 - q_b) / 2 = 2 v_F (1 - v_F)`.
    pub v_b: String,
    /// Leading order in `v_F`: `2 v_F`.
    pub v_b_leading: String,
    /// `1 - 2 v_b_leading = 1 - 4 v_F`.
    pub q_b_leading: String,
}

/// Exact values behind [`Propagation`].
#[derive(Clone, Debug, PartialEq)]
pub struct PropagationExact {
    pub q_f: BigRational,
    pub v_f: BigRational,
    pub q_b: BigRational,
    pub v_b: BigRational,
    pub v_b_leading: BigRational,
    pub q_b_leading: BigRational,
}

impl PropagationExact {
    pub fn report(&self) -> Propagation {
        Propagation {
            q_f: format_rational(&self.q_f),
            v_f: format_rational(&self.v_f),
            q_b: format_rational(&self.q_b),
            q_b_f64: self.q_b.to_f64().unwrap_or(f64::NAN),
            v_b: format_rational(&self.v_b),
            v_b_leading: format_rational(&self.v_b_leading),
            q_b_leading: format_rational(&self.q_b_leading),
        }
    }
}

pub fn propagate_statistics(q_f: &BigRational) -> Result<PropagationExact, BoundsError> {
    let v_f = v_from_q(q_f, Flavor::Fermionic)?;
    let q_b = q_f * q_f;
    let v_b = v_from_q(&q_b, Flavor::Bosonic)?;
    let v_b_leading = two() * &v_f;
    let q_b_leading = BigRational::one() - two() * &v_b_leading;
    Ok(PropagationExact {
        q_f: q_f.clone(),
        v_f,
        q_b,
        v_b,
        v_b_leading,
        q_b_leading,
    })
}

fn exact_sqrt(x: &BigRational) -> Option<BigRational> {
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeQ {
    /// `+√q_b` when it is rational.
    pub exact: Option<String>,
    /// `1 - (1 - q_b) / 2`.
    pub first_order: String,
    pub float: f64,
}

pub fn relative_q(q_b: &BigRational) -> Result<RelativeQ, BoundsError> {
    if q_b.is_negative() {
        return Err(BoundsError::NegativeQ(format_rational(q_b)));
    }
    check_q(q_b)?;
    let first_order = BigRational::one() - (BigRational::one() - q_b) * half();
    Ok(RelativeQ {
        exact: exact_sqrt(q_b).map(|r| format_rational(&r)),
        first_order: format_rational(&first_order),
        float: q_b.to_f64().unwrap_or(f64::NAN).sqrt(),
    })
}

/// `q^(n²)`.
pub fn composite_q(q: &BigRational, n: u32) -> Result<BigRational, BoundsError> {
    check_q(q)?;
    if n == 0 {
        return Err(BoundsError::NoConstituents);
    }
    Ok(q.pow((n * n) as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Overlap {
    pub exact_norm_sq: f64,
    pub approx_norm_sq: f64,
}

pub fn compositeness_overlap(la: f64, lb: f64) -> Result<Overlap, BoundsError> {
    for l in [la, lb] {
        if !(l.abs() < 1.0) {
            return Err(BoundsError::LambdaOutOfRange(l));
        }
    }
    let cross = (1.0 - la * la).sqrt() * lb - la * (1.0 - lb * lb).sqrt();
    Ok(Overlap {
        exact_norm_sq: cross * cross,
        approx_norm_sq: (la - lb) * (la - lb),
    })
}

pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Swap operator on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> DMatrix<Complex64> {
    let mut s = DMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = Complex64::new(1.0, 0.0);
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Weight of the anomalous sector.
    pub v: f64,
    pub symmetric_trace: f64,
    pub antisymmetric_trace: f64,
    /// `P_s ρ P_s / tr`, absent when the sector has no weight.
    pub symmetric_part: Option<DMatrix<Complex64>>,
    pub antisymmetric_part: Option<DMatrix<Complex64>>,
    /// `‖P_s ρ P_a‖_F`, coherence between the sectors.
    pub off_block_norm: f64,
}

pub fn decompose_density_matrix(
    rho: &DMatrix<Complex64>,
    d: usize,
    flavor: Flavor,
) -> Result<Decomposition, BoundsError> {
    let invalid = |m: String| Err(BoundsError::InvalidDensityMatrix(m));
    if rho.nrows() != d * d || rho.ncols() != d * d {
        return invalid(format!("expected {0}x{0}, got {1}x{2}", d * d, rho.nrows(), rho.ncols()));
    }
    if (rho - rho.adjoint()).norm() > PSD_TOL {
        return invalid("not hermitian".into());
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
        return invalid(format!("trace {trace} differs from 1"));
    }
    let min_eig = rho
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -PSD_TOL {
        return invalid(format!("eigenvalue {min_eig} is negative"));
    }
    let id = DMatrix::<Complex64>::identity(d * d, d * d);
    let swap = swap_operator(d);
    let h = Complex64::new(0.5, 0.0);
    let ps = (&id + &swap) * h;
    let pa = (&id - &swap) * h;
    let sym = &ps * rho * &ps;
    let anti = &pa * rho * &pa;
    let ts = sym.trace().re;
    let ta = anti.trace().re;
    let normalize = |m: DMatrix<Complex64>, t: f64| {
        (t > TRACE_TOL).then(|| m * Complex64::new(1.0 / t, 0.0))
    };
    let v = match flavor {
        Flavor::Fermionic => ts,
        Flavor::Bosonic => ta,
    };
    Ok(Decomposition {
        v,
        symmetric_trace: ts,
        antisymmetric_trace: ta,
        off_block_norm: (&ps * rho * &pa).norm(),
        symmetric_part: normalize(sym, ts),
        antisymmetric_part: normalize(anti, ta),
    })
}

/// Discrete momenta for the bilinear commutation check. Labels are
/// `C = p`, `A = k + p`, `D = l + r`, `B = r`; the operators are
/// `O1 = b†(C) b(A)` and `O2 = b†(D) b(B)`.
#[derive(Clone, Debug)]
pub struct ConservationSetup {
    pub momenta: [i64; 4],
    pub labels: [ModeLabel; 4],
    pub cap: usize,
    states: Vec<(FockWord, FockVector, FockVector)>,
}

fn label(x: i64) -> Result<ModeLabel, BoundsError> {
    u32::try_from(x)
        .map(ModeLabel)
        .map_err(|_| BoundsError::NegativeLabel(x))
}

impl ConservationSetup {
    pub fn new(momenta: [i64; 4], cap: usize) -> Result<Self, BoundsError> {
        Self::with_addition(momenta, cap, |a, b| a + b)
    }

    pub fn with_addition(
        momenta: [i64; 4],
        cap: usize,
        add: impl Fn(i64, i64) -> i64,
    ) -> Result<Self, BoundsError> {
        let [k, l, p, r] = momenta;
        let (c, a, d, b) = (p, add(k, p), add(l, r), r);
        if a == d {
            return Err(BoundsError::CoincidentMomenta("k+p = l+r".into()));
        }
        if b == c {
            return Err(BoundsError::CoincidentMomenta("r = p".into()));
        }
        let vals = [c, a, d, b];
        for i in 0..4 {
            for j in i + 1..4 {
                if vals[i] == vals[j] {
                    return Err(BoundsError::CoincidentMomenta(format!(
                        "labels {} and {} are both {}",
                        ["p", "k+p", "l+r", "r"][i],
                        ["p", "k+p", "l+r", "r"][j],
                        vals[i]
                    )));
                }
            }
        }
        let labels = [label(c)?, label(a)?, label(d)?, label(b)?];
        let [lc, la, ld, lb] = labels;
        let o1 = [OperatorSymbol::creator(lc), OperatorSymbol::annihilator(la)];
        let o2 = [OperatorSymbol::creator(ld), OperatorSymbol::annihilator(lb)];
        let o1o2 = OperatorWord::new(o1.iter().chain(o2.iter()).copied().collect());
        let o2o1 = OperatorWord::new(o2.iter().chain(o1.iter()).copied().collect());
        let mut modes = labels.to_vec();
        modes.sort();
        let words: Vec<FockWord> = (0..=cap).flat_map(|n| words_of_length(&modes, n)).collect();
        let states = words
            .into_par_iter()
            .map(|w| {
                let v = FockVector::basis(w.clone());
                let x = apply_word(&o1o2, &v);
                let y = apply_word(&o2o1, &v);
                (w, x, y)
            })
            .collect();
        Ok(Self {
            momenta,
            labels,
            cap,
            states,
        })
    }

    pub fn states(&self) -> impl Iterator<Item = &FockWord> {
        self.states.iter().map(|(w, _, _)| w)
    }
}

type RationalVector = BTreeMap<FockWord, BigRational>;

fn residual_vector(
    x: &FockVector,
    y: &FockVector,
    q_e: &BigRational,
    q_gamma: &BigRational,
) -> RationalVector {
    let mut out = RationalVector::new();
    for (w, c) in x.terms() {
        *out.entry(w.clone()).or_insert_with(BigRational::zero) += c.eval_rational(q_e);
    }
    for (w, c) in y.terms() {
        *out.entry(w.clone()).or_insert_with(BigRational::zero) -= q_gamma * c.eval_rational(q_e);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `⟨x, x⟩` at `q = -1`: the squared norm of the image in the Fermi Fock
/// space. Words with a repeated label are null; the others collapse onto
/// their sorted form with the sign of the sorting permutation.
pub fn fermi_seminorm_sq(x: &RationalVector) -> BigRational {
    let mut collapsed: BTreeMap<Vec<ModeLabel>, BigRational> = BTreeMap::new();
    for (w, c) in x {
        let labels = w.labels();
        let mut inv = 0usize;
        let mut repeated = false;
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                match labels[i].cmp(&labels[j]) {
                    std::cmp::Ordering::Greater => inv += 1,
                    std::cmp::Ordering::Equal => repeated = true,
                    std::cmp::Ordering::Less => {}
                }
            }
        }
        if repeated {
            continue;
        }
        let signed = if inv.is_multiple_of(2) { c.clone() } else { -c.clone() };
        *collapsed.entry(w.sorted_labels()).or_insert_with(BigRational::zero) += signed;
    }
    collapsed.values().map(|c| c * c).sum()
}

/// `⟨x, x⟩` in the free Fock space at parameter `q`.
pub fn q_norm_sq(x: &RationalVector, q: &BigRational) -> BigRational {
    let mut total = BigRational::zero();
    let terms: Vec<_> = x.iter().collect();
    for (u, cu) in &terms {
        for (v, cv) in &terms {
            if u.len() == v.len() && u.sorted_labels() == v.sorted_labels() {
                total += *cu * *cv * q_inner_product(u, v).eval_rational(q);
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateResidual {
    pub state: String,
    /// Fermi-seminorm of `R w`.
    pub residual: f64,
    pub residual_sq: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    pub momenta: [i64; 4],
    pub labels: [ModeLabel; 4],
    pub cap: usize,
    pub q_e: String,
    pub q_e_f64: f64,
    pub q_gamma: String,
    pub q_gamma_f64: f64,
    pub states_checked: usize,
    pub nonzero_states: usize,
    /// `sqrt(Σ_w ‖R w‖²)` in the Fermi seminorm.
    pub residual: f64,
    pub residual_sq: String,
    /// Same aggregate in the free Fock norm at `q_e`.
    pub residual_qe_norm: f64,
    pub per_state: Vec<StateResidual>,
}

/// `R = O1 O2 - q_γ O2 O1` on every test state, `q_γ` defaulting to `q_e²`.
pub fn conservation_residual(
    setup: &ConservationSetup,
    q_e: &BigRational,
    q_gamma: Option<&BigRational>,
) -> Result<ConservationReport, BoundsError> {
    check_q(q_e)?;
    let q_gamma = q_gamma.cloned().unwrap_or_else(|| q_e * q_e);
    let rows: Vec<(StateResidual, BigRational, BigRational)> = setup
        .states
        .par_iter()
        .map(|(w, x, y)| {
            let r = residual_vector(x, y, q_e, &q_gamma);
            let f = fermi_seminorm_sq(&r);
            let qn = q_norm_sq(&r, q_e);
            (
                StateResidual {
                    state: w.to_string(),
                    residual: f.to_f64().unwrap_or(f64::NAN).sqrt(),
                    residual_sq: format_rational(&f),
                },
                f,
                qn,
            )
        })
        .collect();
    let total: BigRational = rows.iter().map(|r| r.1.clone()).sum();
    let total_q: BigRational = rows.iter().map(|r| r.2.clone()).sum();
    let nonzero = rows.iter().filter(|r| !r.1.is_zero()).count();
    Ok(ConservationReport {
        momenta: setup.momenta,
        labels: setup.labels,
        cap: setup.cap,
        q_e: format_rational(q_e),
        q_e_f64: q_e.to_f64().unwrap_or(f64::NAN),
        q_gamma: format_rational(&q_gamma),
        q_gamma_f64: q_gamma.to_f64().unwrap_or(f64::NAN),
        states_checked: rows.len(),
        nonzero_states: nonzero,
        residual: total.to_f64().unwrap_or(f64::NAN).sqrt(),
        residual_sq: format_rational(&total),
        residual_qe_norm: total_q.to_f64().unwrap_or(f64::NAN).max(0.0).sqrt(),
        per_state: rows.into_iter().map(|r| r.0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub q_e: String,
    pub one_minus_qe_sq: f64,
    pub residual: f64,
    pub residual_qe_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationSweep {
    pub at_minus_one: f64,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of `ln residual` against `ln (1 - q_e²)`.
    pub slope: f64,
    pub slope_qe_norm: f64,
    /// Smallest `C` with `residual ≤ C (1 - q_e²)` on every sweep point.
    pub fitted_c: f64,
    pub decreasing: bool,
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// The default sweep `q_e = -1 + 10^-j`, `j = 1, 2, 3`.
pub fn default_sweep() -> Vec<BigRational> {
    (1..=3)
        .map(|j| {
            -BigRational::one()
                + BigRational::new(1.into(), BigInt::from(10).pow(j))
        })
        .collect()
}

pub fn conservation_sweep(
    setup: &ConservationSetup,
    q_values: &[BigRational],
) -> Result<ConservationSweep, BoundsError> {
    let at_minus_one = conservation_residual(setup, &-BigRational::one(), None)?.residual;
    let mut points = Vec::new();
    for q in q_values {
        let r = conservation_residual(setup, q, None)?;
        let one_minus = (BigRational::one() - q * q).to_f64().unwrap_or(f64::NAN);
        points.push(SweepPoint {
            q_e: r.q_e,
            one_minus_qe_sq: one_minus,
            residual: r.residual,
            residual_qe_norm: r.residual_qe_norm,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.one_minus_qe_sq).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.residual).collect();
    let yq: Vec<f64> = points.iter().map(|p| p.residual_qe_norm).collect();
    let fitted_c = points
        .iter()
        .map(|p| p.residual / p.one_minus_qe_sq)
        .fold(0.0, f64::max);
    let mut by_distance: Vec<&SweepPoint> = points.iter().collect();
    by_distance.sort_by(|a, b| b.one_minus_qe_sq.total_cmp(&a.one_minus_qe_sq));
    let decreasing = by_distance.windows(2).all(|w| w[1].residual < w[0].residual);
    Ok(ConservationSweep {
        at_minus_one,
        slope: log_log_slope(&xs, &ys),
        slope_qe_norm: log_log_slope(&xs, &yq),
        fitted_c,
        decreasing,
        points,
    })
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Fermionic => "fermionic",
            Flavor::Bosonic => "bosonic",
        })
    }
}

impl FromStr for Flavor {
    type Err = BoundsError;

    fn from_str(s: &str) -> Result<Self, BoundsError> {
        match s {
            "fermionic" | "f" => Ok(Flavor::Fermionic),
            "bosonic" | "b" => Ok(Flavor::Bosonic),
            other => Err(BoundsError::Parse(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parsing_and_formatting() {
        assert_eq!(r("1.7e-26"), BigRational::new(17.into(), BigInt::from(10).pow(27)));
        assert_eq!(r("-0.999"), BigRational::new((-999).into(), 1000.into()));
        assert_eq!(r("3/4"), BigRational::new(3.into(), 4.into()));
        assert_eq!(r("2"), BigRational::from_integer(2.into()));
        assert_eq!(r(".5"), half());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(format_rational(&r("0.998001")), "0.998001");
        assert_eq!(format_rational(&r("-1")), "-1");
        assert_eq!(format_rational(&r("-0.05")), "-0.05");
        assert_eq!(format_rational(&r("1/3")), "1/3");
        assert_eq!(format_rational(&r("12.5")), "12.5");
    }

    #[test]
    fn conversions() {
        assert_eq!(q_from_v(&r("0"), Flavor::Fermionic).unwrap(), r("-1"));
        assert_eq!(q_from_v(&r("0"), Flavor::Bosonic).unwrap(), r("1"));
        assert_eq!(
            q_from_v(&r("1.7e-26"), Flavor::Fermionic).unwrap(),
            r("-1") + r("3.4e-26")
        );
        assert!(q_from_v(&r("1.5"), Flavor::Fermionic).is_err());
        assert!(v_from_q(&r("-1.01"), Flavor::Bosonic).is_err());
    }

    #[test]
    fn propagation() {
        let p = propagate_statistics(&r("-0.999")).unwrap();
        assert_eq!(p.q_b, r("0.998001"));
        assert_eq!(propagate_statistics(&r("-1")).unwrap().q_b, r("1"));
        assert_eq!(propagate_statistics(&r("0")).unwrap().q_b, r("0"));
        let e = r("1.7e-26");
        let p = propagate_statistics(&(r("-1") + &e * two())).unwrap();
        assert_eq!(p.v_b, two() * &e * (BigRational::one() - &e));
        assert_eq!(p.q_b_leading, r("1") - r("6.8e-26"));
        assert_eq!(p.v_b_leading, r("3.4e-26"));
    }

    #[test]
    fn relative() {
        assert_eq!(relative_q(&r("1")).unwrap().exact.as_deref(), Some("1"));
        assert_eq!(relative_q(&r("0.25")).unwrap().exact.as_deref(), Some("0.5"));
        let near = relative_q(&(r("1") - r("6.8e-26"))).unwrap();
        assert_eq!(near.exact, None);
        assert_eq!(near.first_order, format_rational(&(r("1") - r("3.4e-26"))));
        assert!(relative_q(&r("-0.1")).is_err());
    }

    #[test]
    fn composite() {
        assert_eq!(composite_q(&r("-1"), 2).unwrap(), r("1"));
        assert_eq!(composite_q(&r("-1"), 3).unwrap(), r("-1"));
        assert_eq!(composite_q(&r("0.3"), 1).unwrap(), r("0.3"));
        assert!(composite_q(&r("0.3"), 0).is_err());
    }

    #[test]
    fn overlaps() {
        assert_eq!(compositeness_overlap(0.4, 0.4).unwrap().exact_norm_sq, 0.0);
        let o = compositeness_overlap(0.1, 0.0).unwrap();
        assert!((o.exact_norm_sq - 0.01).abs() < 1e-15);
        assert!((o.approx_norm_sq - 0.01).abs() < 1e-15);
        let o = compositeness_overlap(0.3, 0.1).unwrap();
        assert!((o.exact_norm_sq - o.approx_norm_sq).abs() < 0.3f64.powi(4));
        assert!(compositeness_overlap(1.0, 0.0).is_err());
    }

    #[test]
    fn density_matrices() {
        let mixed = DMatrix::<Complex64>::identity(4, 4) * Complex64::new(0.25, 0.0);
        let dec = decompose_density_matrix(&mixed, 2, Flavor::Fermionic).unwrap();
        assert!((dec.v - 0.75).abs() < 1e-12);
        assert!((dec.symmetric_trace + dec.antisymmetric_trace - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = DMatrix::from_column_slice(4, 1, &[0.0, s, -s, 0.0].map(|x| Complex64::new(x, 0.0)));
        let rho = &singlet * singlet.adjoint();
        assert!(decompose_density_matrix(&rho, 2, Flavor::Fermionic).unwrap().v.abs() < 1e-12);
        let triplet = DMatrix::from_column_slice(4, 1, &[0.0, s, s, 0.0].map(|x| Complex64::new(x, 0.0)));
        let rho = &triplet * triplet.adjoint();
        assert!((decompose_density_matrix(&rho, 2, Flavor::Fermionic).unwrap().v - 1.0).abs() < 1e-12);
        let bad = DMatrix::<Complex64>::identity(4, 4) * Complex64::new(0.3, 0.0);
        assert!(decompose_density_matrix(&bad, 2, Flavor::Fermionic).is_err());
    }

    #[test]
    fn momentum_exclusions() {
        assert!(matches!(
            ConservationSetup::new([1, 2, 5, 4], 1),
            Err(BoundsError::CoincidentMomenta(_))
        ));
        assert!(matches!(
            ConservationSetup::new([1, 2, 5, 5], 1),
            Err(BoundsError::CoincidentMomenta(_))
        ));
    }

    #[test]
    fn conservation_at_fermi_point() {
        let setup = ConservationSetup::new([1, 2, 5, 9], 2).unwrap();
        let rep = conservation_residual(&setup, &r("-1"), None).unwrap();
        assert_eq!(rep.residual_sq, "0");
        let off = conservation_residual(&setup, &r("-1"), Some(&r("0.9"))).unwrap();
        assert!(off.nonzero_states > 0);
    }
}
