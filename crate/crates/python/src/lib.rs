//! Python bindings. Results cross the boundary as plain dicts and lists,
//! built from the same JSON the CLI writes.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use splitspec_core::experiments::{run, state_spectrum, ExperimentConfig, ModelSpec, OutputFormat, Scenario};
use splitspec_core::hilbert::{ChainBasis, StateVector};
use splitspec_core::models::Partition;
use splitspec_core::{squashed, triseparable_oracle, Error, Numerics};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<PyObject> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

fn model_spec(model: &str, j: f64, alpha: f64, h: f64, disorder: f64) -> PyResult<ModelSpec> {
    match model {
        "xy" => Ok(ModelSpec::Xy { j, alpha, h }),
        "random_field" => Ok(ModelSpec::RandomField { j, disorder }),
        _ => Err(PyValueError::new_err(format!("unknown model {model:?}; use xy or random_field"))),
    }
}

/// Split spectrum of one eigenstate as `{eps, eps_aux, peaks, eta, grid, values}`.
#[pyfunction]
#[pyo3(signature = (length, model="xy", j=1.0, alpha=0.0, h=0.0, disorder=1.0, state="gs", eta=0.05, seed=0))]
#[allow(clippy::too_many_arguments)]
fn spectrum(
    py: Python<'_>,
    length: usize,
    model: &str,
    j: f64,
    alpha: f64,
    h: f64,
    disorder: f64,
    state: &str,
    eta: f64,
    seed: u64,
) -> PyResult<PyObject> {
    let mut cfg = ExperimentConfig::new(Scenario::Coefficients, model_spec(model, j, alpha, h, disorder)?);
    cfg.sizes = vec![length];
    cfg.states = vec![state.parse().map_err(to_py)?];
    cfg.numerics.eta = eta;
    cfg.seed = seed;
    let s = py.allow_threads(|| state_spectrum(&cfg)).map_err(to_py)?;
    json_to_py(py, &s.to_json())
}

/// Runs a TOML experiment config and returns its JSON output as Python objects.
#[pyfunction]
fn run_config(py: Python<'_>, toml: &str) -> PyResult<PyObject> {
    let cfg = ExperimentConfig::from_toml_str(toml).map_err(to_py)?;
    let out = py.allow_threads(|| run(&cfg)).map_err(to_py)?;
    json_to_py(py, &out.to_json().map_err(to_py)?)
}

/// Runs a TOML experiment config and returns the rendered `csv` or `json` text.
#[pyfunction]
#[pyo3(signature = (toml, format="csv"))]
fn render_config(py: Python<'_>, toml: &str, format: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_toml_str(toml).map_err(to_py)?;
    let format: OutputFormat = format.parse().map_err(to_py)?;
    let out = py.allow_threads(|| run(&cfg)).map_err(to_py)?;
    let mut buf = Vec::new();
    out.write(&mut buf, format).map_err(to_py)?;
    String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Entanglement of a pure chain state split into A | M | B at the center.
/// Amplitudes are indexed with site 0 as the most significant bit, 0 = up.
#[pyfunction]
fn entanglement<'py>(py: Python<'py>, amplitudes: Vec<C64>) -> PyResult<Bound<'py, PyDict>> {
    let dim = amplitudes.len();
    if dim < 8 || !dim.is_power_of_two() {
        return Err(PyValueError::new_err(format!("need 2^L amplitudes with L >= 3, got {dim}")));
    }
    let len = dim.trailing_zeros() as usize;
    let basis = ChainBasis::spin_half(len).map_err(to_py)?;
    let psi = StateVector::new(basis, amplitudes.into()).map_err(to_py)?;
    let partition = Partition::center(len).map_err(to_py)?;
    let report = squashed(&psi, &partition).map_err(to_py)?;
    let tri = triseparable_oracle(&psi, &partition, Numerics::default().rank_tol).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("s_a", report.s_a)?;
    d.set_item("s_b", report.s_b)?;
    d.set_item("s_m", report.s_m)?;
    d.set_item("e_sq", report.e_sq)?;
    d.set_item("triseparable", tri)?;
    Ok(d)
}

#[pymodule]
fn splitspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(render_config, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement, m)?)?;
    Ok(())
}
