//! Python bindings: build or load a density matrix, then evaluate criteria,
//! noise thresholds and classifications. Reports come back as dicts.

use entcert::classify::{classify3, classify_dc, exclusion_scan};
use entcert::criteria::{fidelity_from, ksep_from, lz_condition, Quantities};
use entcert::observables::pauli_family;
use entcert::partitions::{solution_sets as sets_for, Split, SplitLevel};
use entcert::qmat::{validate_density, ComplexMatrix, C64, VALIDATION_TOL};
use entcert::robustness::{threshold_channel, RobustCriterion};
use entcert::states::{named_state as build_named, NoiseKind, StateParams};
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict};
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A validated multiqubit density matrix.
#[pyclass(name = "DensityMatrix", module = "entcert_py", frozen)]
pub struct PyDensity {
    inner: entcert::qmat::DensityMatrix,
    label: String,
}

#[pymethods]
impl PyDensity {
    /// Build from a flat row-major list of 4^N complex entries.
    #[staticmethod]
    #[pyo3(signature = (n_qubits, entries, tol = None))]
    fn from_entries(n_qubits: usize, entries: Vec<C64>, tol: Option<f64>) -> PyResult<Self> {
        if n_qubits == 0 || n_qubits > entcert::partitions::MAX_QUBITS {
            return Err(value_err(format!("n_qubits={n_qubits} outside 1..={}", entcert::partitions::MAX_QUBITS)));
        }
        let d = 1usize << n_qubits;
        let m = ComplexMatrix::new(d, d, entries).map_err(value_err)?;
        let rho = validate_density(&m, n_qubits, tol.unwrap_or(VALIDATION_TOL)).map_err(value_err)?;
        Ok(Self { inner: rho, label: "dense".into() })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn label(&self) -> &str {
        &self.label
    }

    /// Flat row-major list of complex entries.
    fn entries(&self) -> Vec<C64> {
        self.inner.matrix().data().to_vec()
    }

    fn entry(&self, row: usize, col: usize) -> PyResult<C64> {
        let d = self.inner.dim();
        if row >= d || col >= d {
            return Err(value_err(format!("index ({row}, {col}) outside {d}x{d}")));
        }
        Ok(self.inner.entry(row, col))
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix({}, n_qubits={})", self.label, self.inner.n_qubits())
    }
}

fn param_text(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if value.is_instance_of::<PyBool>() {
        return Ok(if value.extract::<bool>()? { "true" } else { "false" }.into());
    }
    if let Ok(s) = value.extract::<String>() {
        return Ok(s);
    }
    if let Ok(i) = value.extract::<i64>() {
        return Ok(i.to_string());
    }
    if let Ok(f) = value.extract::<f64>() {
        return Ok(f.to_string());
    }
    Err(PyTypeError::new_err(format!("unsupported parameter value {value}")))
}

/// Catalog state by name, e.g. `named_state("ghz", n=4)`.
#[pyfunction]
#[pyo3(signature = (name, **params))]
fn named_state(name: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<PyDensity> {
    let mut p = StateParams::new();
    let mut label = name.to_string();
    if let Some(dict) = params {
        for (k, v) in dict.iter() {
            let key: String = k.extract()?;
            let text = param_text(&v)?;
            label.push_str(&format!(" {key}={text}"));
            p = p.with(&key, text);
        }
    }
    let rho = build_named(name, &p).map_err(value_err)?;
    Ok(PyDensity { inner: rho, label })
}

fn need_two(rho: &PyDensity) -> PyResult<usize> {
    match rho.inner.n_qubits() {
        n if n >= 2 => Ok(n),
        n => Err(value_err(format!("criteria need at least 2 qubits, state has {n}"))),
    }
}

#[derive(Serialize)]
struct Overview {
    fidelity: entcert::criteria::CriterionVerdict,
    biseparability: entcert::criteria::CriterionVerdict,
    levels: Vec<entcert::criteria::KsepVerdict>,
    violated: bool,
}

/// Fidelity, biseparability and every k-separability level.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, rho: &PyDensity) -> PyResult<Bound<'py, PyAny>> {
    let n = need_two(rho)?;
    let q = Quantities::from_matrix(&rho.inner).map_err(value_err)?;
    let fidelity = fidelity_from(&q);
    let biseparability = lz_condition(&rho.inner, 2).map_err(value_err)?;
    let levels =
        (2..=n).map(|k| SplitLevel::new(n, k).map(|level| ksep_from(&q, &level))).collect::<Result<Vec<_>, _>>().map_err(value_err)?;
    let violated = fidelity.violated || biseparability.violated || levels.iter().any(|l| l.strong.violated || l.weak.violated);
    to_py(py, &Overview { fidelity, biseparability, levels, violated })
}

/// Noise threshold p0 for one channel and criterion.
#[pyfunction]
#[pyo3(signature = (rho, noise = "white", criterion = "full"))]
fn threshold<'py>(py: Python<'py>, rho: &PyDensity, noise: &str, criterion: &str) -> PyResult<Bound<'py, PyAny>> {
    need_two(rho)?;
    let kind: NoiseKind = noise.parse().map_err(value_err)?;
    let criterion: RobustCriterion = criterion.parse().map_err(value_err)?;
    let r = threshold_channel(&rho.inner, kind, criterion, &rho.label).map_err(value_err)?;
    to_py(py, &r)
}

/// Excluded and consistent classes: auto, three-qubit, dc or scan.
#[pyfunction]
#[pyo3(signature = (rho, method = "auto"))]
fn classify<'py>(py: Python<'py>, rho: &PyDensity, method: &str) -> PyResult<Bound<'py, PyAny>> {
    let n = need_two(rho)?;
    let family = pauli_family(n).map_err(value_err)?;
    let report = match method {
        "auto" if n == 3 => classify3(&rho.inner, &family),
        "auto" | "scan" => exclusion_scan(&rho.inner, &family),
        "three-qubit" => classify3(&rho.inner, &family),
        "dc" => classify_dc(&rho.inner),
        other => return Err(value_err(format!("unknown method '{other}' (auto, three-qubit, dc, scan)"))),
    }
    .map_err(value_err)?;
    to_py(py, &report)
}

/// Solution sets of a split label such as `(ab)-(cd)`, as lists of labels.
#[pyfunction]
fn solution_sets(n_qubits: usize, split: &str) -> PyResult<Vec<Vec<usize>>> {
    let split = Split::parse(n_qubits, split).map_err(value_err)?;
    Ok(sets_for(&split).map_err(value_err)?.sets)
}

#[pyfunction]
fn version() -> &'static str {
    entcert::VERSION
}

#[pymodule]
fn entcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensity>()?;
    m.add_function(wrap_pyfunction!(named_state, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(solution_sets, m)?)?;
    m.add_function(wrap_pyfunction!(version, m)?)?;
    Ok(())
}
