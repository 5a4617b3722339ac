//! Python bindings for the `dqchain` core crate.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dqchain::analysis;
use dqchain::chain;
use dqchain::io::{self, FitModel, SignalTrace};
use dqchain::liouville::{self, BilinearClass};
use dqchain::oracle;
use dqchain::{Complex64, Error, HamiltonianKind, InitialState};

fn to_py(err: Error) -> PyErr {
    match dqchain::cli::exit_code(&err) {
        1 => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn parse_kind(kind: &str) -> PyResult<HamiltonianKind> {
    match kind {
        "dq" => Ok(HamiltonianKind::Dq),
        "xx" => Ok(HamiltonianKind::Xx),
        other => Err(PyValueError::new_err(format!("hamiltonian must be 'dq' or 'xx', got {other:?}"))),
    }
}

/// `"thermal"`, `"end-polarized"`, or a 1-based site index.
fn parse_state(state: &Bound<'_, PyAny>) -> PyResult<InitialState> {
    if let Ok(site) = state.extract::<usize>() {
        return Ok(InitialState::SingleSite(site));
    }
    match state.extract::<String>()?.as_str() {
        "thermal" => Ok(InitialState::Thermal),
        "end-polarized" | "end_polarized" => Ok(InitialState::EndPolarized),
        other => Err(PyValueError::new_err(format!("unknown state {other:?}"))),
    }
}

fn parse_model(model: &str) -> PyResult<FitModel> {
    match model {
        "thermal" => Ok(FitModel::Thermal),
        "end-polarized" | "end_polarized" => Ok(FitModel::EndPolarized),
        other => Err(PyValueError::new_err(format!("unknown fit model {other:?}"))),
    }
}

/// Open chain of `n_sites` spins with nearest-neighbour coupling `d` (rad/s).
#[pyclass(name = "ChainSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChainSpec {
    inner: chain::ChainSpec,
}

#[pymethods]
impl PyChainSpec {
    #[new]
    #[pyo3(signature = (n_sites, coupling, spacing = None))]
    fn new(n_sites: usize, coupling: f64, spacing: Option<f64>) -> PyResult<Self> {
        let inner = match spacing {
            Some(a) => chain::ChainSpec::with_spacing(n_sites, coupling, a),
            None => chain::ChainSpec::new(n_sites, coupling),
        }
        .map_err(to_py)?;
        Ok(PyChainSpec { inner })
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.coupling
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    fn mirror_time(&self) -> f64 {
        self.inner.mirror_time()
    }

    fn group_velocity(&self) -> f64 {
        chain::group_velocity(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "ChainSpec(n_sites={}, coupling={}, spacing={})",
            self.inner.n_sites, self.inner.coupling, self.inner.spacing
        )
    }
}

/// Transport amplitude `A_{j,q}(t)`.
#[pyfunction]
fn amplitude(spec: &PyChainSpec, j: usize, q: usize, t: f64) -> PyResult<Complex64> {
    chain::amplitude(&spec.inner, j, q, t).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (spec, state, t, hamiltonian = "dq"))]
fn magnetization_profile(spec: &PyChainSpec, state: &Bound<'_, PyAny>, t: f64, hamiltonian: &str) -> PyResult<Vec<f64>> {
    chain::magnetization_profile(&spec.inner, parse_state(state)?, parse_kind(hamiltonian)?, t).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (spec, state, t, hamiltonian = "dq"))]
fn collective_signal(spec: &PyChainSpec, state: &Bound<'_, PyAny>, t: f64, hamiltonian: &str) -> PyResult<f64> {
    chain::collective_signal(&spec.inner, parse_state(state)?, parse_kind(hamiltonian)?, t).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (spec, state, t, hamiltonian = "dq"))]
fn two_spin_signal(spec: &PyChainSpec, state: &Bound<'_, PyAny>, t: f64, hamiltonian: &str) -> PyResult<f64> {
    chain::two_spin_signal(&spec.inner, parse_state(state)?, parse_kind(hamiltonian)?, t).map_err(to_py)
}

/// Bilinear coefficients as `{(p, q, class): complex}`.
#[pyfunction]
#[pyo3(signature = (spec, state, t, hamiltonian = "dq"))]
fn evolve_coefficients<'py>(
    py: Python<'py>,
    spec: &PyChainSpec,
    state: &Bound<'py, PyAny>,
    t: f64,
    hamiltonian: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let c = liouville::evolve_coefficients(&spec.inner, parse_state(state)?, parse_kind(hamiltonian)?, t)
        .map_err(to_py)?;
    let out = PyDict::new(py);
    for (k, v) in &c.entries {
        let class = match k.class {
            BilinearClass::Symmetric => "symmetric",
            BilinearClass::Antisymmetric => "antisymmetric",
            BilinearClass::Current => "current",
        };
        out.set_item((k.p, k.q, class), *v)?;
    }
    Ok(out)
}

/// Coherence-order intensities `{order: intensity}` about `"z"` or `"x"`.
#[pyfunction]
#[pyo3(signature = (spec, state, t, basis = "z", hamiltonian = "dq"))]
fn coherence_spectrum<'py>(
    py: Python<'py>,
    spec: &PyChainSpec,
    state: &Bound<'py, PyAny>,
    t: f64,
    basis: &str,
    hamiltonian: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let c = liouville::evolve_coefficients(&spec.inner, parse_state(state)?, parse_kind(hamiltonian)?, t)
        .map_err(to_py)?;
    let s = match basis {
        "z" => liouville::z_basis_spectrum(&c),
        "x" => liouville::x_basis_spectrum(&c),
        other => return Err(PyValueError::new_err(format!("basis must be 'z' or 'x', got {other:?}"))),
    };
    let out = PyDict::new(py);
    for (order, v) in &s.intensities {
        out.set_item(*order, *v)?;
    }
    Ok(out)
}

#[pyfunction]
fn mirror_scan<'py>(
    py: Python<'py>,
    spec: &PyChainSpec,
    source: usize,
    target: usize,
    times: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = analysis::mirror_scan(&spec.inner, source, target, &times).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("mirror_time_estimate", r.mirror_time_estimate)?;
    out.set_item("enhancement_factor", r.enhancement_factor)?;
    out.set_item("window_peak_ratio", r.window_peak_ratio)?;
    out.set_item("peak_probability", r.peak_probability)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (n_min = 50, n_max = 500, d = 1.0))]
fn scaling_exponent(n_min: usize, n_max: usize, d: f64) -> PyResult<f64> {
    analysis::scaling_exponent(n_min, n_max, d).map_err(to_py)
}

/// Fit `scale·S(d, t) + baseline` to a trace.
#[pyfunction]
#[pyo3(signature = (times, values, sigma = None, model = "thermal", init_d = chain::FAP_STRUCTURAL_COUPLING))]
fn fit_signal<'py>(
    py: Python<'py>,
    times: Vec<f64>,
    values: Vec<f64>,
    sigma: Option<Vec<f64>>,
    model: &str,
    init_d: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let trace = SignalTrace::new(times, values, sigma).map_err(to_py)?;
    let r = io::fit_signal(&trace, parse_model(model)?, init_d).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("coupling_d", r.coupling_d)?;
    out.set_item("coupling_sigma", r.coupling_sigma())?;
    out.set_item("scale", r.scale)?;
    out.set_item("baseline", r.baseline)?;
    out.set_item("residual_norm", r.residual_norm)?;
    out.set_item("iterations", r.iterations)?;
    out.set_item("converged", r.converged)?;
    Ok(out)
}

/// Largest closed-form versus dense-simulator deviations.
#[pyfunction]
fn oracle_deviations<'py>(py: Python<'py>, n: usize, d: f64, times: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let dev = dqchain::cli::oracle_deviations(n, d, &times).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("profile", dev.profile)?;
    out.set_item("collective", dev.collective)?;
    out.set_item("two_spin", dev.two_spin)?;
    out.set_item("coefficients", dev.coefficients)?;
    out.set_item("cases", dev.cases)?;
    Ok(out)
}

/// Leakage out of the bilinear space under `1/r^power` DQ couplings.
#[pyfunction]
#[pyo3(signature = (n, d, state, times, cutoff = None, range_power = 3.0))]
fn leakage_series(
    n: usize,
    d: f64,
    state: &Bound<'_, PyAny>,
    times: Vec<f64>,
    cutoff: Option<usize>,
    range_power: f64,
) -> PyResult<Vec<f64>> {
    let mut spec = oracle::HamiltonianSpec::dq_long_range(n, d);
    spec.range_power = range_power;
    if let Some(k) = cutoff {
        spec = spec.with_cutoff(k);
    }
    oracle::leakage_series(&spec, parse_state(state)?, &times).map_err(to_py)
}

#[pymodule]
fn dqchain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChainSpec>()?;
    m.add_function(wrap_pyfunction!(amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(magnetization_profile, m)?)?;
    m.add_function(wrap_pyfunction!(collective_signal, m)?)?;
    m.add_function(wrap_pyfunction!(two_spin_signal, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(coherence_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(mirror_scan, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(fit_signal, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_deviations, m)?)?;
    m.add_function(wrap_pyfunction!(leakage_series, m)?)?;
    m.add("SCHEMA_VERSION", io::SCHEMA_VERSION)?;
    Ok(())
}
