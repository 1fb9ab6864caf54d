//! Python bindings. Exact polynomials come back as `QPolynomial` objects,
//! exact rationals as decimal or fraction strings, reports as plain dicts.

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use quon_core::bounds::{self, ConservationSetup, Flavor};
use quon_core::gram::{self, GramLimits};
use quon_core::observables::{self, TruncatedFockSpace};
use quon_core::parastat::{self, ParaKind, DEFAULT_MAX_DIM};
use quon_core::qfock::{self, FockWord, OperatorWord};
use quon_core::speicher;
use quon_core::verify::{self, VerifyConfig};
use quon_core::wick;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_word(word: &str) -> PyResult<OperatorWord> {
    word.parse().map_err(value_error)
}

fn rational(s: &str) -> PyResult<num_rational::BigRational> {
    bounds::parse_rational(s).map_err(value_error)
}

/// Polynomial in `q` with integer coefficients.
#[pyclass(name = "QPolynomial", module = "quon", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyQPolynomial(quon_core::QPolynomial);

#[pymethods]
impl PyQPolynomial {
    #[new]
    fn new(coeffs: Vec<BigInt>) -> Self {
        Self(quon_core::QPolynomial::from_coeffs(coeffs))
    }

    /// Coefficients, constant term first.
    #[getter]
    fn coeffs(&self) -> Vec<BigInt> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn degree(&self) -> Option<usize> {
        self.0.degree()
    }

    fn __call__(&self, q: f64) -> f64 {
        self.0.eval_f64(q)
    }

    /// Exact value at a rational `q` given as a string.
    fn eval_exact(&self, q: &str) -> PyResult<String> {
        Ok(bounds::format_rational(&self.0.eval_rational(&rational(q)?)))
    }

    fn __add__(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    fn __sub__(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("QPolynomial('{}')", self.0)
    }
}

/// `⟨0|word|0⟩`; `method` is "rewrite" or "wick".
#[pyfunction]
#[pyo3(signature = (word, method = "rewrite"))]
fn vev(word: &str, method: &str) -> PyResult<PyQPolynomial> {
    let w = parse_word(word)?;
    match method {
        "rewrite" => Ok(PyQPolynomial(qfock::vacuum_expectation(&w))),
        "wick" => wick::wick_expectation(&w)
            .map(PyQPolynomial)
            .map_err(value_error),
        other => Err(value_error(format!("unknown method {other:?}"))),
    }
}

/// Normal-ordered form as `[(word, coefficient)]`.
#[pyfunction]
fn normal_order(word: &str) -> PyResult<Vec<(String, PyQPolynomial)>> {
    let sum = qfock::normal_order(&parse_word(word)?);
    Ok(sum
        .terms()
        .map(|(w, c)| (w.to_string(), PyQPolynomial(c.clone())))
        .collect())
}

/// `⟨u|v⟩` for creator strings given as mode lists.
#[pyfunction]
fn inner_product(u: Vec<u32>, v: Vec<u32>) -> PyQPolynomial {
    PyQPolynomial(qfock::q_inner_product(
        &FockWord::from_u32s(&u),
        &FockWord::from_u32s(&v),
    ))
}

/// Contractions as `[(pairs, crossings)]`, pairs as `(annihilator, creator)` positions.
#[pyfunction]
fn wick_contractions(word: &str) -> PyResult<Vec<(Vec<(usize, usize)>, usize)>> {
    let diagrams = wick::enumerate_contractions(&parse_word(word)?).map_err(value_error)?;
    Ok(diagrams.into_iter().map(|(d, c)| (d.pairs, c.0)).collect())
}

fn limits(max_n: usize) -> GramLimits {
    GramLimits {
        max_n,
        ..GramLimits::default()
    }
}

#[pyfunction]
#[pyo3(signature = (n, max_n = 5))]
fn gram_matrix(n: usize, max_n: usize) -> PyResult<Vec<Vec<PyQPolynomial>>> {
    let m = gram::gram_matrix(n, &limits(max_n)).map_err(value_error)?;
    Ok(m.rows()
        .into_iter()
        .map(|row| row.into_iter().map(PyQPolynomial).collect())
        .collect())
}

/// Closed-form product, expanded.
#[pyfunction]
fn zagier_determinant(n: usize) -> PyQPolynomial {
    PyQPolynomial(gram::zagier_determinant(n))
}

/// Factored closed form as text.
#[pyfunction]
fn zagier_product(n: usize) -> String {
    gram::ZagierProduct::new(n).to_string()
}

/// Exact determinant of the Gram matrix for `n` particles.
#[pyfunction]
fn det_exact(n: usize) -> PyResult<PyQPolynomial> {
    let l = GramLimits::default();
    let m = gram::gram_matrix(n, &l).map_err(value_error)?;
    gram::det_exact(&m, &l).map(PyQPolynomial).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (n, samples = 50, lo = -0.99, hi = 0.99))]
fn positivity_scan<'py>(
    py: Python<'py>,
    n: usize,
    samples: usize,
    lo: f64,
    hi: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let m = gram::gram_matrix(n, &GramLimits::default()).map_err(value_error)?;
    let scan = gram::positivity_scan(&m, &gram::midpoint_samples(lo, hi, samples))
        .map_err(value_error)?;
    to_py(py, &scan)
}

/// Exact rank of the Gram matrix at `q = sign`.
#[pyfunction]
fn rank_at_limit(n: usize, sign: i64) -> PyResult<usize> {
    if sign.abs() != 1 {
        return Err(value_error("sign must be +1 or -1"));
    }
    let m = gram::gram_matrix(n, &GramLimits::default()).map_err(value_error)?;
    Ok(gram::rank_at_limit(&m, sign))
}

/// Truncated `q = 0` commutator check over all index triples.
#[pyfunction]
#[pyo3(signature = (modes, cap, depth = None))]
fn number_operator_check<'py>(
    py: Python<'py>,
    modes: u32,
    cap: usize,
    depth: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let space = TruncatedFockSpace::with_mode_count(modes, cap).map_err(value_error)?;
    let depth = depth.unwrap_or(cap.saturating_sub(1));
    let reports = observables::check_all_commutators(&space, depth).map_err(value_error)?;
    to_py(py, &reports)
}

/// Green realization check: "trilinear", "vacuum", "occupancy" or "canonical".
#[pyfunction]
#[pyo3(signature = (kind, p, modes, check, cap = None, max_dim = DEFAULT_MAX_DIM))]
fn para_check<'py>(
    py: Python<'py>,
    kind: &str,
    p: usize,
    modes: usize,
    check: &str,
    cap: Option<u32>,
    max_dim: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: ParaKind = kind.parse().map_err(value_error)?;
    let r = parastat::build_green(kind, p, modes, cap, max_dim).map_err(value_error)?;
    match check {
        "trilinear" => to_py(py, &parastat::check_trilinear(&r).map_err(value_error)?),
        "vacuum" => to_py(py, &parastat::check_vacuum_conditions(&r).map_err(value_error)?),
        "occupancy" => to_py(py, &parastat::occupancy_report(&r).map_err(value_error)?),
        "canonical" => to_py(py, &parastat::check_canonical(&r).map_err(value_error)?),
        other => Err(value_error(format!("unknown check {other:?}"))),
    }
}

#[pyfunction]
#[pyo3(signature = (n_max = 2, theta = std::f64::consts::FRAC_PI_4))]
fn gentile<'py>(py: Python<'py>, n_max: usize, theta: f64) -> PyResult<Bound<'py, PyAny>> {
    let rep = parastat::gentile_demo(n_max, &parastat::rotation(theta)).map_err(value_error)?;
    to_py(py, &rep)
}

/// Monte Carlo estimate over random sign matrices.
#[pyfunction]
#[pyo3(signature = (word, q, n, samples = 2000, seed = 0))]
fn speicher_estimate<'py>(
    py: Python<'py>,
    word: &str,
    q: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let est = speicher::mc_estimate(&parse_word(word)?, q, n, samples, seed).map_err(value_error)?;
    to_py(py, &est)
}

/// Exact sign-averaged finite-`N` expectation; `q` as a rational string.
#[pyfunction]
fn speicher_exact(word: &str, q: &str, n: usize) -> PyResult<String> {
    let v = speicher::sign_averaged_expectation(&parse_word(word)?, &rational(q)?, n)
        .map_err(value_error)?;
    Ok(v.to_string())
}

/// `q` from a violation parameter; `flavor` is "fermionic" or "bosonic".
#[pyfunction]
fn q_from_v(v: &str, flavor: &str) -> PyResult<String> {
    let flavor: Flavor = flavor.parse().map_err(value_error)?;
    let q = bounds::q_from_v(&rational(v)?, flavor).map_err(value_error)?;
    Ok(bounds::format_rational(&q))
}

#[pyfunction]
fn v_from_q(q: &str, flavor: &str) -> PyResult<String> {
    let flavor: Flavor = flavor.parse().map_err(value_error)?;
    let v = bounds::v_from_q(&rational(q)?, flavor).map_err(value_error)?;
    Ok(bounds::format_rational(&v))
}

#[pyfunction]
fn propagate<'py>(py: Python<'py>, q_e: &str) -> PyResult<Bound<'py, PyAny>> {
    let p = bounds::propagate_statistics(&rational(q_e)?).map_err(value_error)?;
    to_py(py, &p.report())
}

#[pyfunction]
fn composite_q(q: &str, n: u32) -> PyResult<String> {
    let v = bounds::composite_q(&rational(q)?, n).map_err(value_error)?;
    Ok(bounds::format_rational(&v))
}

/// Residual of the bilinear commutator check; `sweep` adds the default q_e sweep.
#[pyfunction]
#[pyo3(signature = (momenta, q_e = "-1", q_gamma = None, cap = 3, sweep = false))]
fn conservation<'py>(
    py: Python<'py>,
    momenta: [i64; 4],
    q_e: &str,
    q_gamma: Option<&str>,
    cap: usize,
    sweep: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let setup = ConservationSetup::new(momenta, cap).map_err(value_error)?;
    let g = q_gamma.map(rational).transpose()?;
    let report =
        bounds::conservation_residual(&setup, &rational(q_e)?, g.as_ref()).map_err(value_error)?;
    let out = to_py(py, &report)?;
    if sweep {
        let s = bounds::conservation_sweep(&setup, &bounds::default_sweep()).map_err(value_error)?;
        out.set_item("sweep", to_py(py, &s)?)?;
    }
    Ok(out)
}

/// All end-to-end checks; returns the aggregate report.
#[pyfunction]
#[pyo3(signature = (seed = None, zagier_n5 = true))]
fn verify_all<'py>(
    py: Python<'py>,
    seed: Option<u64>,
    zagier_n5: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = VerifyConfig::default();
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.zagier_n5 = zagier_n5;
    let report = py.detach(|| verify::run_all(&config));
    to_py(py, &report)
}

#[pymodule]
fn quon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQPolynomial>()?;
    m.add_function(wrap_pyfunction!(vev, m)?)?;
    m.add_function(wrap_pyfunction!(normal_order, m)?)?;
    m.add_function(wrap_pyfunction!(inner_product, m)?)?;
    m.add_function(wrap_pyfunction!(wick_contractions, m)?)?;
    m.add_function(wrap_pyfunction!(gram_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(zagier_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(zagier_product, m)?)?;
    m.add_function(wrap_pyfunction!(det_exact, m)?)?;
    m.add_function(wrap_pyfunction!(positivity_scan, m)?)?;
    m.add_function(wrap_pyfunction!(rank_at_limit, m)?)?;
    m.add_function(wrap_pyfunction!(number_operator_check, m)?)?;
    m.add_function(wrap_pyfunction!(para_check, m)?)?;
    m.add_function(wrap_pyfunction!(gentile, m)?)?;
    m.add_function(wrap_pyfunction!(speicher_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(speicher_exact, m)?)?;
    m.add_function(wrap_pyfunction!(q_from_v, m)?)?;
    m.add_function(wrap_pyfunction!(v_from_q, m)?)?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(composite_q, m)?)?;
    m.add_function(wrap_pyfunction!(conservation, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}
