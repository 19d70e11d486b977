//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! sets are accepted as any iterable of positive ints and normalized.

use std::time::Duration;

use motzkin_core::density::{self, BoundMethod, BoundsOptions, DensityError, PeriodicSet as CorePeriodic};
use motzkin_core::families::{self, BlockFamily, FamilyCase as CoreCase};
use motzkin_core::verify::{self, SweepOptions, VerificationRecord as CoreRecord};
use motzkin_core::{DifferenceSet as CoreSet, Family, Rational};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.numer(), r.denom()))
}

fn opt_fraction<'py>(py: Python<'py>, r: Option<&Rational>) -> PyResult<Option<Bound<'py, PyAny>>> {
    r.map(|r| fraction(py, r)).transpose()
}

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn density_error(e: DensityError) -> PyErr {
    match e {
        DensityError::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        other => value_error(other),
    }
}

fn to_set(elements: Vec<i64>) -> PyResult<CoreSet> {
    motzkin_core::arith::normalize_signed(&elements).map_err(value_error)
}

fn parse_family(family: &str) -> PyResult<Family> {
    family.parse().map_err(value_error)
}

fn method_name(m: &BoundMethod) -> &'static str {
    match m {
        BoundMethod::PairSumKappa => "pair-sum-kappa",
        BoundMethod::PrefixSearch { .. } => "prefix-search",
        BoundMethod::WindowCycle => "window-cycle",
        BoundMethod::Trivial => "trivial",
    }
}

/// A finite set of positive forbidden differences, divided by its gcd.
#[pyclass(frozen, name = "DifferenceSet", module = "motzkin")]
struct PyDifferenceSet {
    inner: CoreSet,
}

#[pymethods]
impl PyDifferenceSet {
    #[new]
    fn new(elements: Vec<i64>) -> PyResult<Self> {
        Ok(PyDifferenceSet {
            inner: to_set(elements)?,
        })
    }

    #[getter]
    fn elements(&self) -> Vec<u64> {
        self.inner.elements().to_vec()
    }

    #[getter]
    fn normalization_factor(&self) -> u64 {
        self.inner.normalization_factor()
    }

    fn pair_sums(&self) -> Vec<u64> {
        self.inner.pair_sums()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, x: u64) -> bool {
        self.inner.contains(x)
    }

    fn __repr__(&self) -> String {
        format!("DifferenceSet({})", self.inner)
    }
}

#[pyclass(frozen, name = "KappaResult", module = "motzkin")]
struct PyKappaResult {
    inner: motzkin_core::KappaResult,
}

#[pymethods]
impl PyKappaResult {
    #[getter]
    fn value<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.value)
    }

    #[getter]
    fn witness_c(&self) -> u64 {
        self.inner.witness_c
    }

    #[getter]
    fn witness_m(&self) -> u64 {
        self.inner.witness_m
    }

    #[getter]
    fn achieved_d(&self) -> u64 {
        self.inner.achieved_d
    }

    fn __repr__(&self) -> String {
        let k = &self.inner;
        format!("KappaResult({}, c={}, m={}, d={})", k.value, k.witness_c, k.witness_m, k.achieved_d)
    }
}

/// One period of a periodic set; `pattern` is a 0/1 string.
#[pyclass(frozen, name = "PeriodicSet", module = "motzkin")]
struct PyPeriodicSet {
    inner: CorePeriodic,
}

#[pymethods]
impl PyPeriodicSet {
    #[getter]
    fn pattern(&self) -> String {
        self.inner.bits()
    }

    #[getter]
    fn period(&self) -> u64 {
        self.inner.period()
    }

    #[getter]
    fn density<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.density())
    }

    fn positions(&self) -> Vec<u64> {
        self.inner.positions()
    }

    fn is_mset(&self, set: &PyDifferenceSet) -> bool {
        density::validate_periodic_mset(&self.inner, &set.inner)
    }

    fn __repr__(&self) -> String {
        format!("PeriodicSet('{}', density={})", self.inner.bits(), self.inner.density())
    }
}

#[pyclass(frozen, name = "DensityBounds", module = "motzkin")]
struct PyDensityBounds {
    inner: density::DensityBounds,
}

#[pymethods]
impl PyDensityBounds {
    #[getter]
    fn lower<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.lower)
    }

    #[getter]
    fn upper<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.upper)
    }

    #[getter]
    fn exact<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        opt_fraction(py, self.inner.exact.as_ref())
    }

    #[getter]
    fn lower_method(&self) -> &'static str {
        method_name(&self.inner.lower_method)
    }

    #[getter]
    fn upper_method(&self) -> &'static str {
        method_name(&self.inner.upper_method)
    }

    #[getter]
    fn witness(&self) -> Option<PyPeriodicSet> {
        self.inner.witness.clone().map(|inner| PyPeriodicSet { inner })
    }

    #[getter]
    fn exact_skipped(&self) -> Option<String> {
        self.inner.exact_skipped.clone()
    }

    /// `(chi_f or None, upper bound on chi_c)`.
    fn coloring_numbers<'py>(&self, py: Python<'py>) -> PyResult<(Option<Bound<'py, PyAny>>, Bound<'py, PyAny>)> {
        let c = density::coloring_numbers(&self.inner).map_err(density_error)?;
        Ok((opt_fraction(py, c.chi_f.as_ref())?, fraction(py, &c.chi_c_upper)?))
    }

    fn __repr__(&self) -> String {
        let b = &self.inner;
        match &b.exact {
            Some(e) => format!("DensityBounds(exact={e})"),
            None => format!("DensityBounds(lower={}, upper={})", b.lower, b.upper),
        }
    }
}

#[pyclass(frozen, name = "FamilyCase", module = "motzkin")]
struct PyFamilyCase {
    inner: CoreCase,
}

#[pymethods]
impl PyFamilyCase {
    #[getter]
    fn family(&self) -> String {
        self.inner.family.to_string()
    }

    #[getter]
    fn a(&self) -> u64 {
        self.inner.a
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n
    }

    #[getter]
    fn label(&self) -> &'static str {
        self.inner.label.as_str()
    }

    /// Only the indices that apply to the case are present.
    #[getter]
    fn indices<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let ix = &self.inner.indices;
        for (k, v) in [("i", ix.i), ("j", ix.j), ("l", ix.l), ("q", ix.q), ("r", ix.r), ("t", ix.t), ("m", ix.m)] {
            if let Some(v) = v {
                d.set_item(k, v)?;
            }
        }
        Ok(d)
    }

    #[getter]
    fn bound<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        opt_fraction(py, self.inner.bound.as_ref())
    }

    #[getter]
    fn exact(&self) -> bool {
        self.inner.exact
    }

    #[getter]
    fn covered(&self) -> bool {
        self.inner.is_covered()
    }

    fn set(&self) -> PyResult<PyDifferenceSet> {
        Ok(PyDifferenceSet {
            inner: families::build_set(&self.inner).map_err(value_error)?,
        })
    }

    /// `(c, m, value, matches)` for the pair certifying the bound.
    fn replay_proof_witness<'py>(&self, py: Python<'py>) -> PyResult<(u64, u64, Bound<'py, PyAny>, bool)> {
        let r = families::replay_proof_witness(&self.inner).map_err(value_error)?;
        Ok((r.c, r.m, fraction(py, &r.value)?, r.matches))
    }

    fn __repr__(&self) -> String {
        format!("FamilyCase({})", self.inner.display_label())
    }
}

#[pyclass(frozen, name = "VerificationRecord", module = "motzkin")]
struct PyVerificationRecord {
    inner: CoreRecord,
}

#[pymethods]
impl PyVerificationRecord {
    #[getter]
    fn family(&self) -> String {
        self.inner.family.to_string()
    }

    #[getter]
    fn a(&self) -> u64 {
        self.inner.a
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n
    }

    #[getter]
    fn case(&self) -> Option<PyFamilyCase> {
        self.inner.case.clone().map(|inner| PyFamilyCase { inner })
    }

    #[getter]
    fn computed_kappa<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        opt_fraction(py, self.inner.computed_kappa.as_ref())
    }

    #[getter]
    fn theorem_bound<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        opt_fraction(py, self.inner.theorem_bound.as_ref())
    }

    #[getter]
    fn kappa_ge_bound(&self) -> Option<bool> {
        self.inner.kappa_ge_bound
    }

    #[getter]
    fn replay_matches(&self) -> Option<bool> {
        self.inner.replay.as_ref().map(|r| r.matches)
    }

    #[getter]
    fn ceiling_ok(&self) -> Option<bool> {
        self.inner.ceiling_ok
    }

    #[getter]
    fn exactness_confirmed(&self) -> Option<bool> {
        self.inner.exactness_confirmed
    }

    #[getter]
    fn skipped(&self) -> bool {
        self.inner.skip.is_some()
    }

    #[getter]
    fn violation(&self) -> bool {
        self.inner.is_violation()
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        format!(
            "VerificationRecord({} a={} n={} {})",
            r.family,
            r.a,
            r.n,
            if r.is_violation() { "FAIL" } else { "ok" }
        )
    }
}

#[pyfunction]
fn normalize(elements: Vec<i64>) -> PyResult<PyDifferenceSet> {
    PyDifferenceSet::new(elements)
}

/// Exact κ from the pair-sum moduli.
#[pyfunction]
fn kappa(elements: Vec<i64>) -> PyResult<PyKappaResult> {
    Ok(PyKappaResult {
        inner: motzkin_core::kappa_exact(&to_set(elements)?),
    })
}

/// κ by scanning every modulus in `[2, m_max]`.
#[pyfunction]
fn kappa_oracle(elements: Vec<i64>, m_max: u64) -> PyResult<PyKappaResult> {
    let inner = motzkin_core::kappa_sweep_oracle(&to_set(elements)?, m_max).map_err(value_error)?;
    Ok(PyKappaResult { inner })
}

#[pyfunction]
fn witness_value<'py>(py: Python<'py>, elements: Vec<i64>, c: u64, m: u64) -> PyResult<Bound<'py, PyAny>> {
    let v = motzkin_core::witness_value(&to_set(elements)?, c, m).map_err(value_error)?;
    fraction(py, &v)
}

/// `{s : c*s mod m < d}` for the best `d`, as one period.
#[pyfunction]
fn witness_set(elements: Vec<i64>, c: u64, m: u64) -> PyResult<PyPeriodicSet> {
    let inner = motzkin_core::witness_mset(&to_set(elements)?, c, m).map_err(value_error)?;
    Ok(PyPeriodicSet { inner })
}

#[pyfunction]
#[pyo3(signature = (elements, k_max, state_cap = density::DEFAULT_STATE_CAP))]
fn haralambis_upper<'py>(
    py: Python<'py>,
    elements: Vec<i64>,
    k_max: u64,
    state_cap: usize,
) -> PyResult<(Bound<'py, PyAny>, u64)> {
    let h = density::haralambis_upper(&to_set(elements)?, k_max, state_cap).map_err(density_error)?;
    Ok((fraction(py, &h.alpha)?, h.best_k))
}

/// Exact maximal density with a periodic witness.
#[pyfunction]
#[pyo3(signature = (elements, state_cap = density::DEFAULT_STATE_CAP, time_budget = None))]
fn mu(elements: Vec<i64>, state_cap: usize, time_budget: Option<f64>) -> PyResult<PyPeriodicSet> {
    let opts = density::MuOptions {
        state_cap,
        time_budget: budget(time_budget)?,
    };
    let m = density::mu_exact_with(&to_set(elements)?, &opts).map_err(density_error)?;
    Ok(PyPeriodicSet { inner: m.witness })
}

fn budget(seconds: Option<f64>) -> PyResult<Option<Duration>> {
    match seconds {
        Some(s) if s.is_finite() && s >= 0.0 => Ok(Some(Duration::from_secs_f64(s))),
        Some(_) => Err(value_error("time_budget must be a nonnegative number of seconds")),
        None => Ok(None),
    }
}

#[pyfunction]
#[pyo3(signature = (elements, k_max = None, state_cap = density::DEFAULT_STATE_CAP, time_budget = None))]
fn density_bounds(
    elements: Vec<i64>,
    k_max: Option<u64>,
    state_cap: usize,
    time_budget: Option<f64>,
) -> PyResult<PyDensityBounds> {
    let opts = BoundsOptions {
        k_max,
        state_cap,
        time_budget: budget(time_budget)?,
    };
    let inner = density::density_bounds(&to_set(elements)?, &opts).map_err(density_error)?;
    Ok(PyDensityBounds { inner })
}

#[pyfunction]
fn classify(family: &str, a: u64, n: u64) -> PyResult<PyFamilyCase> {
    let inner = families::classify(parse_family(family)?, a, n).map_err(value_error)?;
    Ok(PyFamilyCase { inner })
}

/// The three blocks for index `i`; `blocks` is `"N"`, `"O"` or `"P"`.
#[pyfunction]
fn blocks(blocks: &str, a: u64, i: u64) -> PyResult<Vec<Vec<u64>>> {
    let b: BlockFamily = blocks.parse().map_err(value_error)?;
    Ok(b.blocks(a, i).map_err(value_error)?.to_vec())
}

#[pyfunction]
fn partition_check<'py>(py: Python<'py>, blocks: &str, a: u64, horizon: u64) -> PyResult<Bound<'py, PyDict>> {
    let b: BlockFamily = blocks.parse().map_err(value_error)?;
    let rep = families::partition_check(b, a, horizon).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("start", rep.start)?;
    d.set_item("period", rep.period)?;
    d.set_item("horizon", rep.horizon)?;
    d.set_item("tiles", rep.tiles)?;
    d.set_item("first_overlap", rep.first_overlap)?;
    d.set_item("first_gap", rep.first_gap)?;
    d.set_item("claimed_excluded", rep.claimed_excluded)?;
    d.set_item("uncovered_below_start", rep.uncovered_below_start)?;
    Ok(d)
}

/// Verifies every `(a, n)` in the inclusive ranges; records come back sorted.
#[pyfunction]
#[pyo3(signature = (family, a_range, n_range, skip_mu = false, time_budget = 5.0))]
fn sweep(
    py: Python<'_>,
    family: &str,
    a_range: (u64, u64),
    n_range: (u64, u64),
    skip_mu: bool,
    time_budget: f64,
) -> PyResult<Vec<PyVerificationRecord>> {
    let family = parse_family(family)?;
    let options = SweepOptions {
        skip_mu,
        time_budget: budget(Some(time_budget))?.unwrap_or_default(),
        ..SweepOptions::default()
    };
    let records = py
        .detach(|| verify::sweep(family, a_range.0..=a_range.1, n_range.0..=n_range.1, &options))
        .map_err(value_error)?;
    Ok(records.into_iter().map(|inner| PyVerificationRecord { inner }).collect())
}

#[pymodule]
fn motzkin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDifferenceSet>()?;
    m.add_class::<PyKappaResult>()?;
    m.add_class::<PyPeriodicSet>()?;
    m.add_class::<PyDensityBounds>()?;
    m.add_class::<PyFamilyCase>()?;
    m.add_class::<PyVerificationRecord>()?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(witness_value, m)?)?;
    m.add_function(wrap_pyfunction!(witness_set, m)?)?;
    m.add_function(wrap_pyfunction!(haralambis_upper, m)?)?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(density_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(blocks, m)?)?;
    m.add_function(wrap_pyfunction!(partition_check, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
