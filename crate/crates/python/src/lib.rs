//! Python module `drlab`: simulation config and runs, sweeps, metrics,
//! reconciliation primitives, statistical checks and the authentication
//! experiments.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use drlab_core::auth::scenarios::{mitm_experiment as core_mitm, MitmConfig};
use drlab_core::harness::{self, Experiment, Scale, SimOutput, SweepSpec};
use drlab_core::{distributions, reconcile, statcheck};

fn py_err(e: drlab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Simulation parameters. Keyword arguments use the config-file key names.
#[pyclass(name = "SimConfig", module = "drlab", from_py_object)]
#[derive(Clone)]
pub struct PySimConfig {
    inner: harness::SimConfig,
}

#[pymethods]
impl PySimConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = harness::SimConfig::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                inner.set(&key, &v.str()?.to_string().to_lowercase()).map_err(py_err)?;
            }
        }
        Ok(Self { inner })
    }

    /// Parses `key = value` lines.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        harness::SimConfig::from_text(text).map(|inner| Self { inner }).map_err(py_err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(py_err)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn w(&self) -> usize {
        self.inner.w
    }

    #[getter]
    fn repetitions(&self) -> usize {
        self.inner.repetitions
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn avoidance(&self) -> bool {
        self.inner.avoidance
    }

    #[getter]
    fn strategy(&self) -> String {
        self.inner.strategy.to_string()
    }

    fn __repr__(&self) -> String {
        format!("SimConfig({})", self.inner.to_text().trim_end().replace('\n', ", "))
    }
}

/// Result of one simulation.
#[pyclass(name = "SimResult", module = "drlab")]
pub struct PySimResult {
    inner: SimOutput,
}

#[pymethods]
impl PySimResult {
    #[getter]
    fn eps(&self) -> f64 {
        self.inner.metrics.eps
    }

    #[getter]
    fn eps_prime(&self) -> f64 {
        self.inner.metrics.eps_prime
    }

    #[getter]
    fn cl(&self) -> f64 {
        self.inner.metrics.cl
    }

    #[getter]
    fn raw_error(&self) -> f64 {
        self.inner.raw_error
    }

    #[getter]
    fn bits_out(&self) -> usize {
        self.inner.metrics.bits_out
    }

    #[getter]
    fn under_sampled(&self) -> bool {
        self.inner.under_sampled
    }

    /// All metrics as a dict.
    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = &self.inner.metrics;
        let d = PyDict::new(py);
        d.set_item("eps", m.eps)?;
        d.set_item("eps_prime", m.eps_prime)?;
        d.set_item("cl", m.cl)?;
        d.set_item("cl_full", m.cl_full)?;
        d.set_item("discard_rate", m.discard_rate)?;
        d.set_item("contributive_rate", m.contributive_rate)?;
        d.set_item("bits_in", m.bits_in)?;
        d.set_item("bits_out", m.bits_out)?;
        d.set_item("raw_error", self.inner.raw_error)?;
        d.set_item("raw_opponent_agreement", self.inner.raw_opponent_agreement)?;
        Ok(d)
    }

    fn csv(&self) -> String {
        harness::simulation_csv(&self.inner, 0.0)
    }

    fn stages_csv(&self) -> String {
        harness::stages_csv(&self.inner)
    }

    fn blocks_csv(&self) -> String {
        harness::blocks_csv(&self.inner)
    }
}

/// Runs one configuration (releases the GIL while it runs).
#[pyfunction]
fn run_simulation(py: Python<'_>, config: &PySimConfig) -> PyResult<PySimResult> {
    let cfg = config.inner.clone();
    py.detach(move || harness::run_simulation(&cfg))
        .map(|inner| PySimResult { inner })
        .map_err(py_err)
}

/// Runs sweep 1, 2 or 3 and returns its CSV. `base` replaces the preset
/// base config; `values` replaces the preset sweep values.
#[pyfunction]
#[pyo3(signature = (experiment, scale = "desk", values = None, base = None))]
fn sweep(
    py: Python<'_>,
    experiment: u8,
    scale: &str,
    values: Option<Vec<usize>>,
    base: Option<PySimConfig>,
) -> PyResult<String> {
    let experiment = Experiment::from_id(experiment).map_err(py_err)?;
    let scale: Scale = scale.parse().map_err(py_err)?;
    let mut spec = SweepSpec::preset(experiment, scale);
    if let Some(b) = base {
        spec.base = b.inner;
    }
    if let Some(v) = values {
        spec.values = v;
    }
    let rows = py.detach(move || harness::sweep(&spec, false)).map_err(py_err)?;
    Ok(harness::sweep_csv(&rows))
}

/// `(eps, eps_prime, cl)` from raw probabilities.
#[pyfunction]
fn compute_metrics(p_err: f64, p_opp_agree: f64, residual_bits: usize, denominator_bits: usize) -> (f64, f64, f64) {
    let m = harness::compute_metrics(p_err, p_opp_agree, residual_bits, denominator_bits);
    (m.eps, m.eps_prime, m.cl)
}

#[pyfunction]
fn majority_decode(word: Vec<u8>) -> PyResult<u8> {
    reconcile::majority_decode(&word).map_err(py_err)
}

#[pyfunction]
fn exact_decode(word: Vec<u8>) -> Option<u8> {
    reconcile::exact_decode(&word)
}

#[pyfunction]
fn privacy_amplify(x: u64, a: u64, b: u64, pa_bits: u32) -> u8 {
    reconcile::privacy_amplify(x, a, b, pa_bits)
}

/// Exact entropy of the degraded distribution, in nats.
#[pyfunction]
fn entropy_phi0(n: usize) -> PyResult<f64> {
    distributions::entropy_phi0(n).map_err(py_err)
}

#[pyfunction]
fn det_sq_closed_form(n: usize, theta: f64) -> f64 {
    statcheck::det_sq_closed_form(n, theta)
}

#[pyfunction]
fn det_sq_exhaustive(n: usize, theta: f64) -> PyResult<f64> {
    statcheck::det_sq_exhaustive(n, theta).map_err(py_err)
}

/// Rows of `(name, expected, observed, tolerance, passed)`.
#[pyfunction]
#[pyo3(signature = (quick = true, seed = 1))]
fn verify_suite(py: Python<'_>, quick: bool, seed: u64) -> Vec<(String, String, String, String, bool)> {
    py.detach(move || statcheck::verify_suite(quick, seed))
        .into_iter()
        .map(|r| (r.name, r.expected, r.observed, r.tolerance, r.passed))
        .collect()
}

/// Acceptance rates of honest, substituted and tampered sessions.
#[pyfunction]
#[pyo3(signature = (sessions = 10_000, secret_bits = 16, seed = 1))]
fn mitm_experiment<'py>(py: Python<'py>, sessions: usize, secret_bits: u32, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let cfg = MitmConfig {
        sessions,
        secret_bits,
        seed,
        ..MitmConfig::default()
    };
    let stats = py.detach(move || core_mitm(&cfg)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("sessions", stats.sessions)?;
    d.set_item("honest_rate", stats.honest_rate())?;
    d.set_item("substitution_rate", stats.substitution_rate())?;
    d.set_item("tamper_rate", stats.tamper_rate())?;
    d.set_item("expected_forgery", stats.expected_forgery())?;
    Ok(d)
}

#[pymodule]
fn drlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySimConfig>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(majority_decode, m)?)?;
    m.add_function(wrap_pyfunction!(exact_decode, m)?)?;
    m.add_function(wrap_pyfunction!(privacy_amplify, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_phi0, m)?)?;
    m.add_function(wrap_pyfunction!(det_sq_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(det_sq_exhaustive, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    m.add_function(wrap_pyfunction!(mitm_experiment, m)?)?;
    Ok(())
}
