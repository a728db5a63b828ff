//! Python bindings. Bitstrings cross the boundary as text (`x_0` first),
//! records and configs as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyList;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpac::experiments::{self, ExperimentConfig, ResultRow};
use qpac::statevector::Gate;
use qpac::{BitString, LearnParams, ParityUpdate, ProductDistribution, QpacError, Schedule, TnnState, TruthTable};

fn err(e: QpacError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bits(s: &str) -> PyResult<BitString> {
    s.parse().map_err(err)
}

fn schedule(s: &str) -> PyResult<Schedule> {
    s.parse().map_err(err)
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = value.py().import("json")?.call_method1("dumps", (value,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Boolean function in algebraic normal form.
#[pyclass(name = "Anf", module = "qpac_py", frozen, eq, from_py_object)]
#[derive(Debug, Clone, PartialEq)]
struct PyAnf(qpac::Anf);

#[pymethods]
impl PyAnf {
    #[new]
    #[pyo3(signature = (n, monomials=Vec::new()))]
    fn new(n: usize, monomials: Vec<u64>) -> PyResult<Self> {
        qpac::Anf::from_masks(n, monomials).map(Self).map_err(err)
    }

    #[staticmethod]
    fn parity(s: &str) -> PyResult<Self> {
        Ok(Self(qpac::parity_anf(&bits(s)?)))
    }

    /// Table indexed by the integer value of `x` (bit i = `x_i`).
    #[staticmethod]
    fn from_truth_table(values: Vec<bool>) -> PyResult<Self> {
        let n = values.len().trailing_zeros() as usize;
        if values.len() != 1 << n {
            return Err(PyValueError::new_err("truth table length must be a power of two"));
        }
        Ok(Self(qpac::Anf::from_truth_table(
            &TruthTable::new(n, values).map_err(err)?,
        )))
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        qpac::Anf::parse_rendered(text).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn monomials(&self) -> Vec<u64> {
        self.0.monomials().collect()
    }

    fn evaluate(&self, x: &str) -> PyResult<bool> {
        self.0.evaluate(&bits(x)?).map_err(err)
    }

    fn evaluate_bits(&self, x: u64) -> bool {
        self.0.evaluate_bits(x)
    }

    fn truth_table(&self) -> Vec<bool> {
        self.0.to_truth_table().values().to_vec()
    }

    fn __xor__(&self, other: &Self) -> PyResult<Self> {
        self.0.xor(&other.0).map(Self).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.render()
    }

    fn __repr__(&self) -> String {
        format!("Anf('{}')", self.0.render())
    }
}

#[pyclass(name = "StateVector", module = "qpac_py")]
struct PyStateVector(qpac::StateVector);

#[pymethods]
impl PyStateVector {
    #[new]
    fn new(n_qubits: usize) -> PyResult<Self> {
        qpac::StateVector::new(n_qubits).map(Self).map_err(err)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    fn probabilities(&self) -> Vec<f64> {
        self.0.amplitudes().iter().map(|a| a.norm_sqr()).collect()
    }

    fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    fn mcx(&mut self, controls: Vec<usize>, target: usize) -> PyResult<()> {
        let n_qubits = self.0.n_qubits();
        if let Some(&qubit) = controls.iter().find(|&&q| q >= n_qubits) {
            return Err(err(QpacError::QubitOutOfRange { qubit, n_qubits }));
        }
        let controls = controls.iter().fold(0u64, |m, &q| m | 1 << q);
        self.0.apply_gate(&Gate::McX { controls, target }).map_err(err)
    }

    fn ry(&mut self, qubit: usize, angle: f64) -> PyResult<()> {
        self.0.apply_gate(&Gate::Ry { qubit, angle }).map_err(err)
    }

    fn cry(&mut self, control: usize, target: usize, angle: f64) -> PyResult<()> {
        self.0.apply_gate(&Gate::CRy { control, target, angle }).map_err(err)
    }

    fn cz(&mut self, control: usize, target: usize) -> PyResult<()> {
        self.0.apply_gate(&Gate::Cz { control, target }).map_err(err)
    }

    fn reflect_zero(&mut self) -> PyResult<()> {
        self.0.apply_gate(&Gate::ReflectZero).map_err(err)
    }

    /// Appends the oracle circuit; needs `oracle.n + 1` qubits.
    fn apply_oracle(&mut self, oracle: &PyOracle) -> PyResult<()> {
        self.0.apply_circuit(oracle.0.circuit()).map_err(err)
    }

    /// Basis-state indices drawn from the Born distribution.
    #[pyo3(signature = (shots, seed=0))]
    fn sample(&self, shots: usize, seed: u64) -> Vec<u64> {
        self.0.sample_indices(&mut ChaCha8Rng::seed_from_u64(seed), shots)
    }
}

/// Example oracle for a concept under a product distribution.
#[pyclass(name = "Oracle", module = "qpac_py", frozen)]
struct PyOracle(qpac::Oracle);

#[pymethods]
impl PyOracle {
    /// `angles=None` draws a random distribution from `seed`.
    #[new]
    #[pyo3(signature = (concept, angles=None, seed=0))]
    fn new(concept: PyAnf, angles: Option<Vec<f64>>, seed: u64) -> PyResult<Self> {
        let n = concept.0.n();
        let dist = match angles {
            Some(a) => ProductDistribution::new(a),
            None => ProductDistribution::random(n, &mut ChaCha8Rng::seed_from_u64(seed)),
        }
        .map_err(err)?;
        qpac::Oracle::build(concept.0, dist).map(Self).map_err(err)
    }

    #[staticmethod]
    fn uniform(concept: PyAnf) -> PyResult<Self> {
        let dist = ProductDistribution::uniform(concept.0.n()).map_err(err)?;
        qpac::Oracle::build(concept.0, dist).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn concept(&self) -> PyAnf {
        PyAnf(self.0.concept().clone())
    }

    #[getter]
    fn angles(&self) -> Vec<f64> {
        self.0.distribution().angles().to_vec()
    }

    fn distribution(&self) -> Vec<f64> {
        self.0.distribution().probabilities()
    }

    fn exact_error(&self, hypothesis: &PyAnf) -> PyResult<f64> {
        self.0.exact_error(&hypothesis.0).map_err(err)
    }

    /// Flagged-outcome probability after `m` Grover iterations with the
    /// network set to `hypothesis`.
    fn amplified_probability(&self, hypothesis: &PyAnf, m: usize) -> PyResult<f64> {
        let setup = qpac::AmplificationSetup::new(&self.0, &TnnState::from_anf(&hypothesis.0)).map_err(err)?;
        Ok(setup.flagged_probability(&setup.amplified_state(m)))
    }
}

#[pyfunction]
fn m_max(epsilon: f64) -> PyResult<usize> {
    qpac::m_max(epsilon).map_err(err)
}

#[pyfunction]
fn compute_n(delta: f64) -> PyResult<usize> {
    qpac::compute_n(delta).map_err(err)
}

#[pyfunction]
fn posterior_confidence(n_shots: usize) -> PyResult<f64> {
    qpac::posterior_confidence(n_shots).map_err(err)
}

/// Exact value as a `fractions.Fraction`.
#[pyfunction]
fn posterior_confidence_exact(py: Python<'_>, n_shots: usize) -> PyResult<Bound<'_, PyAny>> {
    let q = qpac::learner::posterior_confidence_exact(n_shots).map_err(err)?;
    py.import("fractions")?.getattr("Fraction")?.call1((q.to_string(),))
}

#[pyfunction]
fn predicted_probability(error: f64, m: usize) -> f64 {
    qpac::predicted_probability(error, m)
}

#[pyfunction]
#[pyo3(signature = (m_max, kind="linear"))]
fn schedule_values(m_max: usize, kind: &str) -> PyResult<Vec<usize>> {
    Ok(qpac::schedule_values(schedule(kind)?, m_max))
}

#[pyfunction]
fn parity_update(errors: Vec<String>, corrects: Vec<String>) -> PyResult<Vec<String>> {
    let group = |v: Vec<String>| -> PyResult<Vec<BitString>> { v.iter().map(|s| bits(s)).collect() };
    let (e, c) = (group(errors)?, group(corrects)?);
    let n = e.first().or(c.first()).map_or(0, BitString::width);
    if e.iter().chain(&c).any(|b| b.width() != n) {
        return Err(PyValueError::new_err("bitstrings must share one width"));
    }
    let out = qpac::parity_update(&qpac::GroupedInputs::new(n, e), &qpac::GroupedInputs::new(n, c));
    Ok(out.iter().map(ToString::to_string).collect())
}

/// Runs the learner and returns its record as a dict.
#[pyfunction]
#[pyo3(signature = (oracle, epsilon, delta, schedule="linear", seed=0, max_updates=None))]
fn learn<'py>(
    py: Python<'py>,
    oracle: &PyOracle,
    epsilon: f64,
    delta: f64,
    schedule: &str,
    seed: u64,
    max_updates: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut params = LearnParams::new(epsilon, delta, self::schedule(schedule)?, seed).map_err(err)?;
    if let Some(cap) = max_updates {
        params = params.with_max_updates(cap);
    }
    let record = py
        .detach(|| qpac::learn(&oracle.0, &params, &ParityUpdate))
        .map_err(err)?;
    to_py(py, &record)
}

/// Runs an experiment grid from a config dict (same keys as the JSON
/// config file) and returns the result rows.
#[pyfunction]
fn run_grid<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let cfg: ExperimentConfig = from_py(config)?;
    cfg.validate().map_err(err)?;
    let out = py
        .detach(|| match &cfg.out {
            Some(path) => experiments::run_grid_to_csv(&cfg, path),
            None => experiments::run_grid(&cfg),
        })
        .map_err(err)?;
    let rows: Vec<ResultRow> = out.into_iter().map(|o| o.row).collect();
    to_py(py, &rows)
}

#[pyfunction]
fn summarize<'py>(py: Python<'py>, rows: &Bound<'py, PyList>) -> PyResult<Bound<'py, PyAny>> {
    let rows: Vec<ResultRow> = from_py(rows.as_any())?;
    to_py(py, &experiments::summarize(&rows).map_err(err)?)
}

#[pymodule]
fn qpac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAnf>()?;
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyOracle>()?;
    m.add_function(wrap_pyfunction!(m_max, m)?)?;
    m.add_function(wrap_pyfunction!(compute_n, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_confidence, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_confidence_exact, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_probability, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_values, m)?)?;
    m.add_function(wrap_pyfunction!(parity_update, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    Ok(())
}
