//! Green-ansatz realizations of parabose and parafermi operators.
//!
//! `a_k = Σ_α b_k^(α)` over `p` components. Components are laid out as sites
//! `(α, k)`; a basis state is an occupation vector over sites. Parafermi sites
//! are two-level with a Jordan-Wigner string inside each component, so
//! different components commute. Parabose sites are truncated oscillators in
//! the unnormalized basis `b|n⟩ = n|n-1⟩`, `b†|n⟩ = |n+1⟩` (all entries are
//! integers, the metric is `⟨n|n⟩ = n!`); a Klein sign `(-1)^(Σ_{β<α} N_β)`
//! makes different components anticommute.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gram::{factorial, permutations, sign};

pub const DEFAULT_MAX_DIM: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParaKind {
    Parabose,
    Parafermi,
}

impl std::str::FromStr for ParaKind {
    type Err = ParaError;

    fn from_str(s: &str) -> Result<Self, ParaError> {
        match s {
            "bose" | "parabose" => Ok(ParaKind::Parabose),
            "fermi" | "parafermi" => Ok(ParaKind::Parafermi),
            other => Err(ParaError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectorKind {
    Symmetrizer,
    Antisymmetrizer,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParaError {
    #[error("unknown statistics kind {0:?} (expected bose or fermi)")]
    UnknownKind(String),
    #[error("order p must be at least 1")]
    ZeroOrder,
    #[error("at least one mode is required")]
    NoModes,
    #[error("parabose realizations need a component truncation cap >= 1")]
    MissingCap,
    #[error("state space dimension {dim} exceeds the budget {limit}")]
    DimensionBudget { dim: String, limit: usize },
    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("{n} distinct modes needed but only {modes} configured")]
    InsufficientModes { n: usize, modes: usize },
    #[error("state exceeded the component truncation cap {cap}")]
    Truncated { cap: u32 },
}

/// Occupation numbers indexed by site `α * modes + k`.
pub type Occupation = Vec<u32>;

/// Integer combination of occupation states.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParaVector(BTreeMap<Occupation, i64>);

impl ParaVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(occ: Occupation) -> Self {
        let mut v = Self::zero();
        v.add_term(occ, 1);
        v
    }

    pub fn add_term(&mut self, occ: Occupation, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.0.entry(occ.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&occ);
        }
    }

    pub fn add_scaled(&mut self, other: &ParaVector, c: i64) {
        for (o, x) in &other.0 {
            self.add_term(o.clone(), x * c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &i64)> {
        self.0.iter()
    }

    pub fn coefficient(&self, occ: &[u32]) -> i64 {
        self.0.get(occ).copied().unwrap_or(0)
    }

    pub fn max_abs(&self) -> i64 {
        self.0.values().map(|c| c.abs()).max().unwrap_or(0)
    }
}

/// Result of acting with an operator: either a vector or a truncation hit.
type Applied = Result<ParaVector, ParaError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreenRealization {
    pub kind: ParaKind,
    pub order: usize,
    pub modes: usize,
    /// Per-site cap for parabose; parafermi sites are exact.
    pub cap: Option<u32>,
    pub dimension: usize,
}

/// Sparse integer matrix in `(row, col, value)` triplets over [`GreenRealization::basis`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SparseMatrix {
    pub dim: usize,
    pub entries: Vec<(usize, usize, i64)>,
}

impl SparseMatrix {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v as f64;
        }
        m
    }
}

pub fn build_green(
    kind: ParaKind,
    p: usize,
    modes: usize,
    cap: Option<u32>,
    max_dim: usize,
) -> Result<GreenRealization, ParaError> {
    if p == 0 {
        return Err(ParaError::ZeroOrder);
    }
    if modes == 0 {
        return Err(ParaError::NoModes);
    }
    let (local, cap) = match kind {
        ParaKind::Parafermi => (2u64, None),
        ParaKind::Parabose => match cap {
            Some(c) if c >= 1 => (c as u64 + 1, Some(c)),
            _ => return Err(ParaError::MissingCap),
        },
    };
    let dim = BigInt::from(local).pow((p * modes) as u32);
    let budget_err = || ParaError::DimensionBudget {
        dim: dim.to_string(),
        limit: max_dim,
    };
    let d = dim.to_usize().ok_or_else(budget_err)?;
    if d > max_dim {
        return Err(budget_err());
    }
    Ok(GreenRealization {
        kind,
        order: p,
        modes,
        cap,
        dimension: d,
    })
}

impl GreenRealization {
    fn sites(&self) -> usize {
        self.order * self.modes
    }

    fn local_dim(&self) -> u32 {
        match self.kind {
            ParaKind::Parafermi => 2,
            ParaKind::Parabose => self.cap.unwrap_or(0) + 1,
        }
    }

    pub fn vacuum(&self) -> Occupation {
        vec![0; self.sites()]
    }

    /// All occupation vectors, ordered as mixed-radix numbers with site 0
    /// most significant.
    pub fn basis(&self) -> Vec<Occupation> {
        let base = self.local_dim();
        let sites = self.sites();
        (0..self.dimension)
            .map(|mut idx| {
                let mut occ = vec![0; sites];
                for s in (0..sites).rev() {
                    occ[s] = (idx % base as usize) as u32;
                    idx /= base as usize;
                }
                occ
            })
            .collect()
    }

    fn index_of(&self, occ: &[u32]) -> usize {
        let base = self.local_dim() as usize;
        occ.iter().fold(0, |acc, &n| acc * base + n as usize)
    }

    fn check_mode(&self, k: usize) -> Result<(), ParaError> {
        if k < self.modes {
            Ok(())
        } else {
            Err(ParaError::ModeOutOfRange {
                mode: k,
                modes: self.modes,
            })
        }
    }

    /// `b_k^(α)` or its adjoint on one basis state.
    fn component_step(
        &self,
        alpha: usize,
        k: usize,
        dagger: bool,
        occ: &[u32],
    ) -> Result<Option<(Occupation, i64)>, ParaError> {
        let site = alpha * self.modes + k;
        let n = occ[site];
        let mut out = occ.to_vec();
        let (amp, sign_count) = match self.kind {
            ParaKind::Parafermi => {
                if dagger == (n == 1) {
                    return Ok(None);
                }
                out[site] = 1 - n;
                let jw: u32 = occ[alpha * self.modes..site].iter().sum();
                (1, jw)
            }
            ParaKind::Parabose => {
                let cap = self.cap.unwrap_or(0);
                let amp = if dagger {
                    if n == cap {
                        return Err(ParaError::Truncated { cap });
                    }
                    out[site] = n + 1;
                    1
                } else {
                    if n == 0 {
                        return Ok(None);
                    }
                    out[site] = n - 1;
                    n as i64
                };
                let klein: u32 = occ[..alpha * self.modes].iter().sum();
                (amp, klein)
            }
        };
        let s = if sign_count % 2 == 0 { 1 } else { -1 };
        Ok(Some((out, s * amp)))
    }

    /// `a_k` (or `a†_k`) applied to a vector.
    pub fn apply(&self, k: usize, dagger: bool, v: &ParaVector) -> Applied {
        self.check_mode(k)?;
        let mut out = ParaVector::zero();
        for (occ, &c) in v.terms() {
            for alpha in 0..self.order {
                if let Some((o, a)) = self.component_step(alpha, k, dagger, occ)? {
                    out.add_term(o, a * c);
                }
            }
        }
        Ok(out)
    }

    /// Apply a product, rightmost factor first. Factors are `(mode, dagger)`.
    pub fn apply_product(&self, ops: &[(usize, bool)], v: &ParaVector) -> Applied {
        ops.iter()
            .rev()
            .try_fold(v.clone(), |acc, &(k, d)| self.apply(k, d, &acc))
    }

    pub fn matrix(&self, k: usize, dagger: bool) -> Result<SparseMatrix, ParaError> {
        self.check_mode(k)?;
        let mut entries = Vec::new();
        for occ in self.basis() {
            let col = self.index_of(&occ);
            for alpha in 0..self.order {
                match self.component_step(alpha, k, dagger, &occ) {
                    Ok(Some((o, a))) => entries.push((self.index_of(&o), col, a)),
                    Ok(None) | Err(ParaError::Truncated { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        entries.sort();
        Ok(SparseMatrix {
            dim: self.dimension,
            entries,
        })
    }

    /// `⟨v|v⟩` in the realization's metric.
    pub fn norm_sq(&self, v: &ParaVector) -> BigInt {
        v.terms()
            .map(|(occ, &c)| {
                let metric = match self.kind {
                    ParaKind::Parafermi => BigInt::one(),
                    ParaKind::Parabose => occ
                        .iter()
                        .map(|&n| BigInt::from(factorial(n as usize)))
                        .product::<BigInt>(),
                };
                BigInt::from(c) * BigInt::from(c) * metric
            })
            .sum()
    }

    fn norm_sq_complex(&self, v: &BTreeMap<Occupation, Complex64>) -> f64 {
        v.iter()
            .map(|(occ, c)| {
                let metric: f64 = match self.kind {
                    ParaKind::Parafermi => 1.0,
                    ParaKind::Parabose => occ
                        .iter()
                        .map(|&n| (1..=n).map(f64::from).product::<f64>())
                        .product(),
                };
                c.norm_sqr() * metric
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrilinearReport {
    pub kind: ParaKind,
    pub order: usize,
    pub modes: usize,
    pub cap: Option<u32>,
    pub dimension: usize,
    pub triples_checked: usize,
    /// Basis states checked per triple whose images stayed below the cap.
    pub protected_states: usize,
    /// (triple, state) pairs skipped because some term hit the cap.
    pub contaminated: usize,
    pub max_residual: i64,
    pub holds: bool,
}

/// `[[a†_k, a_l]_±, a†_m] - 2 δ_lm a†_k` on one state: anticommutator inside
/// for parabose, commutator for parafermi.
fn trilinear_residual(
    r: &GreenRealization,
    k: usize,
    l: usize,
    m: usize,
    v: &ParaVector,
) -> Applied {
    let inner_sign = match r.kind {
        ParaKind::Parabose => 1,
        ParaKind::Parafermi => -1,
    };
    let terms: [(&[(usize, bool)], i64); 4] = [
        (&[(k, true), (l, false), (m, true)], 1),
        (&[(l, false), (k, true), (m, true)], inner_sign),
        (&[(m, true), (k, true), (l, false)], -1),
        (&[(m, true), (l, false), (k, true)], -inner_sign),
    ];
    let mut out = ParaVector::zero();
    for (ops, c) in terms {
        out.add_scaled(&r.apply_product(ops, v)?, c);
    }
    if l == m {
        out.add_scaled(&r.apply(k, true, v)?, -2);
    }
    Ok(out)
}

pub fn check_trilinear(r: &GreenRealization) -> Result<TrilinearReport, ParaError> {
    let basis = r.basis();
    let triples: Vec<(usize, usize, usize)> = (0..r.modes)
        .flat_map(|k| (0..r.modes).flat_map(move |l| (0..r.modes).map(move |m| (k, l, m))))
        .collect();
    let per_triple: Vec<(usize, usize, i64)> = triples
        .par_iter()
        .map(|&(k, l, m)| {
            let mut protected = 0;
            let mut contaminated = 0;
            let mut max = 0;
            for occ in &basis {
                match trilinear_residual(r, k, l, m, &ParaVector::basis(occ.clone())) {
                    Ok(res) => {
                        protected += 1;
                        max = max.max(res.max_abs());
                    }
                    Err(ParaError::Truncated { .. }) => contaminated += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((protected, contaminated, max))
        })
        .collect::<Result<_, _>>()?;
    let protected = per_triple.iter().map(|t| t.0).min().unwrap_or(0);
    let contaminated = per_triple.iter().map(|t| t.1).sum();
    let max_residual = per_triple.iter().map(|t| t.2).max().unwrap_or(0);
    Ok(TrilinearReport {
        kind: r.kind,
        order: r.order,
        modes: r.modes,
        cap: r.cap,
        dimension: r.dimension,
        triples_checked: triples.len(),
        protected_states: protected,
        contaminated,
        max_residual,
        holds: max_residual == 0 && protected > 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VacuumReport {
    pub annihilates_vacuum: bool,
    /// `c` in `a_k a†_l|0⟩ = c δ_kl |0⟩`, if the same for every mode.
    pub constant: Option<i64>,
    pub off_diagonal_zero: bool,
    pub holds: bool,
}

pub fn check_vacuum_conditions(r: &GreenRealization) -> Result<VacuumReport, ParaError> {
    let vac = ParaVector::basis(r.vacuum());
    let mut annihilates = true;
    let mut constants = Vec::new();
    let mut off_diagonal_zero = true;
    for k in 0..r.modes {
        annihilates &= r.apply(k, false, &vac)?.is_zero();
        for l in 0..r.modes {
            let v = r.apply_product(&[(k, false), (l, true)], &vac)?;
            if k == l {
                let c = v.coefficient(&r.vacuum());
                let only_vacuum = v.terms().count() == usize::from(c != 0);
                constants.push(only_vacuum.then_some(c));
            } else {
                off_diagonal_zero &= v.is_zero();
            }
        }
    }
    let constant = match constants.first() {
        Some(&Some(c)) if constants.iter().all(|&x| x == Some(c)) => Some(c),
        _ => None,
    };
    Ok(VacuumReport {
        annihilates_vacuum: annihilates,
        constant,
        off_diagonal_zero,
        holds: annihilates && constant.is_some() && off_diagonal_zero,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalReport {
    pub max_residual: i64,
    pub contaminated: usize,
    pub holds: bool,
}

/// For `p = 1`: `[a_k, a†_l]_∓ = δ_kl` and `[a_k, a_l]_∓ = 0` (anticommutators
/// for Fermi, commutators for Bose) on every state whose images stay below
/// the cap.
pub fn check_canonical(r: &GreenRealization) -> Result<CanonicalReport, ParaError> {
    let s = match r.kind {
        ParaKind::Parabose => -1,
        ParaKind::Parafermi => 1,
    };
    let mut max = 0;
    let mut contaminated = 0;
    for occ in r.basis() {
        let v = ParaVector::basis(occ);
        for k in 0..r.modes {
            for l in 0..r.modes {
                let run = || -> Applied {
                    let mut mixed = r.apply_product(&[(k, false), (l, true)], &v)?;
                    mixed.add_scaled(&r.apply_product(&[(l, true), (k, false)], &v)?, s);
                    if k == l {
                        mixed.add_scaled(&v, -1);
                    }
                    let mut same = r.apply_product(&[(k, false), (l, false)], &v)?;
                    same.add_scaled(&r.apply_product(&[(l, false), (k, false)], &v)?, s);
                    mixed.add_scaled(&same, 1);
                    Ok(mixed)
                };
                match run() {
                    Ok(res) => max = max.max(res.max_abs()),
                    Err(ParaError::Truncated { .. }) => contaminated += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(CanonicalReport {
        max_residual: max,
        contaminated,
        holds: max == 0,
    })
}

/// `(1/n!) Σ_σ χ(σ) a†_{m_σ(1)} … a†_{m_σ(n)} |0⟩` with `χ` trivial or the
/// sign character, scaled by `n!` so the coefficients stay integral.
fn projected_state_times_factorial(
    r: &GreenRealization,
    modes: &[usize],
    projector: ProjectorKind,
) -> Applied {
    let n = modes.len();
    let vac = ParaVector::basis(r.vacuum());
    let mut out = ParaVector::zero();
    for perm in permutations(n) {
        let ops: Vec<(usize, bool)> = perm.iter().map(|&i| (modes[i], true)).collect();
        let c = match projector {
            ProjectorKind::Symmetrizer => 1,
            ProjectorKind::Antisymmetrizer => sign(&perm),
        };
        out.add_scaled(&r.apply_product(&ops, &vac)?, c);
    }
    Ok(out)
}

/// Squared norm of the (anti)symmetrized `n`-particle state on the given
/// modes, exact.
pub fn projected_norm_sq(
    r: &GreenRealization,
    modes: &[usize],
    projector: ProjectorKind,
) -> Result<BigRational, ParaError> {
    let v = projected_state_times_factorial(r, modes, projector)?;
    let f = BigInt::from(factorial(modes.len()));
    Ok(BigRational::new(r.norm_sq(&v), &f * &f))
}

/// Symmetrizer: `n` particles in mode 0, i.e. `‖(a†_0)^n|0⟩‖²`.
/// Antisymmetrizer: `n` particles in modes `0..n`.
pub fn max_occupancy(
    r: &GreenRealization,
    n: usize,
    projector: ProjectorKind,
) -> Result<BigRational, ParaError> {
    let modes: Vec<usize> = match projector {
        ProjectorKind::Symmetrizer => vec![0; n],
        ProjectorKind::Antisymmetrizer => {
            if n > r.modes {
                return Err(ParaError::InsufficientModes { n, modes: r.modes });
            }
            (0..n).collect()
        }
    };
    projected_norm_sq(r, &modes, projector)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyRow {
    pub n: usize,
    pub projector: ProjectorKind,
    pub norm_sq: String,
    pub norm_sq_f64: f64,
    pub expected_zero: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyReport {
    pub kind: ParaKind,
    pub order: usize,
    pub rows: Vec<OccupancyRow>,
    pub holds: bool,
}

/// Occupancy limit sweep `n = 1..=p+1`: the symmetrizer on one mode for
/// parafermi, the antisymmetrizer on distinct modes for parabose.
pub fn occupancy_report(r: &GreenRealization) -> Result<OccupancyReport, ParaError> {
    let projector = match r.kind {
        ParaKind::Parafermi => ProjectorKind::Symmetrizer,
        ParaKind::Parabose => ProjectorKind::Antisymmetrizer,
    };
    let mut rows = Vec::new();
    for n in 1..=r.order + 1 {
        let v = max_occupancy(r, n, projector)?;
        let expected_zero = n == r.order + 1;
        rows.push(OccupancyRow {
            n,
            projector,
            norm_sq_f64: v.to_f64().unwrap_or(f64::NAN),
            norm_sq: v.to_string(),
            expected_zero,
            ok: v.is_zero() == expected_zero && !v.is_negative(),
        });
    }
    let holds = rows.iter().all(|r| r.ok);
    Ok(OccupancyReport {
        kind: r.kind,
        order: r.order,
        rows,
        holds,
    })
}

/// `‖(Σ_l u_l a†_l)^n |0⟩‖²` for a rotated single-particle mode `u`.
pub fn rotated_power_norm_sq(
    r: &GreenRealization,
    u: &[Complex64],
    n: usize,
) -> Result<f64, ParaError> {
    if u.len() != r.modes {
        return Err(ParaError::ModeOutOfRange {
            mode: u.len(),
            modes: r.modes,
        });
    }
    let mut v: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    v.insert(r.vacuum(), Complex64::new(1.0, 0.0));
    for _ in 0..n {
        let mut next: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, c) in &v {
            for (l, ul) in u.iter().enumerate() {
                if ul.norm_sqr() == 0.0 {
                    continue;
                }
                for (o, a) in r.apply(l, true, &ParaVector::basis(occ.clone()))?.terms() {
                    *next.entry(o.clone()).or_default() += c * ul * (*a as f64);
                }
            }
        }
        v = next;
    }
    Ok(r.norm_sq_complex(&v))
}

/// Orthogonal projector onto the (anti)symmetric part of `(C^d)^{⊗n}`.
#[derive(Clone, Debug)]
pub struct SymmetryProjector {
    pub n: usize,
    pub d: usize,
    pub kind: ProjectorKind,
    pub matrix: DMatrix<Complex64>,
}

fn tensor_digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in (0..n).rev() {
        digits[slot] = idx % d;
        idx /= d;
    }
    digits
}

fn tensor_index(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

impl SymmetryProjector {
    pub fn new(n: usize, d: usize, kind: ProjectorKind) -> Self {
        let dim = d.pow(n as u32);
        let perms = permutations(n);
        let norm = 1.0 / perms.len() as f64;
        let mut matrix = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let digits = tensor_digits(col, d, n);
            for perm in &perms {
                let permuted: Vec<usize> = perm.iter().map(|&i| digits[i]).collect();
                let s = match kind {
                    ProjectorKind::Symmetrizer => 1.0,
                    ProjectorKind::Antisymmetrizer => sign(perm) as f64,
                };
                matrix[(tensor_index(&permuted, d), col)] += Complex64::new(s * norm, 0.0);
            }
        }
        Self { n, d, kind, matrix }
    }

    /// `‖P² - P‖_F`.
    pub fn idempotency_defect(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).norm()
    }

    /// `‖[P, U^{⊗n}]‖_F`.
    pub fn commutator_norm(&self, u: &DMatrix<Complex64>) -> f64 {
        let un = tensor_power(u, self.n);
        (&self.matrix * &un - &un * &self.matrix).norm()
    }
}

pub fn tensor_power(u: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for _ in 0..n {
        out = out.kronecker(u);
    }
    out
}

/// Real rotation by `theta` acting on two modes.
pub fn rotation(theta: f64) -> DMatrix<Complex64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParafermiContrast {
    /// Every occupancy-pattern-symmetrized 3-particle state of the p = 2
    /// realization is exactly zero, so the symmetric sector vanishes in any
    /// single-particle basis.
    pub pattern_states_zero: bool,
    pub norm_sq_before: f64,
    pub norm_sq_after: f64,
    pub projector_commutator_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GentileReport {
    pub n_max: usize,
    pub particles: usize,
    pub mode: usize,
    pub original_allowed_norm_sq: f64,
    pub transformed_allowed_norm_sq: f64,
    pub transformed_forbidden_norm_sq: f64,
    pub basis_dependent: bool,
    pub parafermi: ParafermiContrast,
}

/// Allowed weight of `u⊗u⊗…⊗u` (the image of `|k,…,k⟩` under `U^{⊗n}`):
/// the tensor components whose occupancy pattern has every count `≤ n_max`.
fn allowed_weight(u: &[Complex64], n: usize, n_max: usize) -> f64 {
    let d = u.len();
    (0..d.pow(n as u32))
        .filter_map(|idx| {
            let digits = tensor_digits(idx, d, n);
            let mut counts = vec![0; d];
            for &x in &digits {
                counts[x] += 1;
            }
            (counts.iter().all(|&c| c <= n_max))
                .then(|| digits.iter().map(|&x| u[x].norm_sqr()).product::<f64>())
        })
        .sum()
}

/// Three particles in one mode of a two-mode system under a Gentile
/// occupancy bound, before and after a basis change `U`.
pub fn gentile_demo(n_max: usize, u: &DMatrix<Complex64>) -> Result<GentileReport, ParaError> {
    let particles = 3;
    let k = 0;
    let original: Vec<Complex64> = (0..2)
        .map(|l| Complex64::new(if l == k { 1.0 } else { 0.0 }, 0.0))
        .collect();
    // image of |k⟩ is column k of U
    let row: Vec<Complex64> = (0..2).map(|l| u[(l, k)]).collect();
    let allowed = allowed_weight(&row, particles, n_max);
    let total: f64 = row.iter().map(|c| c.norm_sqr()).sum::<f64>().powi(particles as i32);

    let pf = build_green(ParaKind::Parafermi, 2, 2, None, DEFAULT_MAX_DIM)?;
    let mut pattern_states_zero = true;
    for n0 in 0..=particles {
        let modes: Vec<usize> = std::iter::repeat_n(0, n0)
            .chain(std::iter::repeat_n(1, particles - n0))
            .collect();
        pattern_states_zero &=
            projected_state_times_factorial(&pf, &modes, ProjectorKind::Symmetrizer)?.is_zero();
    }
    let contrast = ParafermiContrast {
        pattern_states_zero,
        norm_sq_before: rotated_power_norm_sq(&pf, &original, particles)?,
        norm_sq_after: rotated_power_norm_sq(&pf, &row, particles)?,
        projector_commutator_norm: SymmetryProjector::new(particles, 2, ProjectorKind::Symmetrizer)
            .commutator_norm(u),
    };
    Ok(GentileReport {
        n_max,
        particles,
        mode: k,
        original_allowed_norm_sq: allowed_weight(&original, particles, n_max),
        transformed_allowed_norm_sq: allowed,
        transformed_forbidden_norm_sq: total - allowed,
        basis_dependent: allowed > 1e-12,
        parafermi: contrast,
    })
}
