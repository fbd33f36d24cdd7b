//! Python bindings: configuration, scenario runs, sweeps, the verify suite
//! and a few model-level helpers.

use std::path::Path;

use epr_cqed::dynamics;
use epr_cqed::experiments::{self, ScenarioConfig, Solver, Table};
use epr_cqed::hilbert::{self, BasisConfiguration, Level};
use epr_cqed::model::{self, NamedLabel};
use epr_cqed::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict, PyList};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::IntegrationFailure { .. } | Error::VanishingJumpWeights { .. } | Error::NonFinite(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Run configuration; same keys as the command-line config file.
#[pyclass(name = "Config", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyConfig {
    /// Defaults, optionally overridden by `key=value` keyword arguments.
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = ScenarioConfig::default();
        if let Some(kw) = overrides {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let value = v.str()?.to_string();
                let value = if value == "True" || value == "False" {
                    value.to_lowercase()
                } else {
                    value
                };
                inner.set(&key, &value).map_err(to_py_err)?;
            }
        }
        Ok(Self { inner })
    }

    /// Parses the text of a config file.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioConfig::parse(text).map_err(to_py_err)?,
        })
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(to_py_err)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py_err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.physical_params().kappa
    }

    #[getter]
    fn kappa_over_g0(&self) -> f64 {
        self.inner.kappa_over_g0()
    }

    #[getter]
    fn solver(&self) -> String {
        self.inner.solver.to_string()
    }

    #[getter]
    fn master_seed(&self) -> u64 {
        self.inner.master_seed
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(solver={}, n_max={}, kappa={}, n_trajectories={}, master_seed={})",
            self.inner.solver,
            self.inner.n_max,
            self.kappa(),
            self.inner.n_trajectories,
            self.inner.master_seed
        )
    }
}

/// Truncated composite space {g, a, b, e} ⊗ four cavity modes.
#[pyclass(name = "HilbertSpace")]
struct PyHilbertSpace {
    inner: hilbert::HilbertSpace,
}

#[pymethods]
impl PyHilbertSpace {
    #[new]
    fn new(n_max: usize) -> PyResult<Self> {
        Ok(Self {
            inner: hilbert::HilbertSpace::new(n_max).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    /// Index of atom level `atom` ("g", "a", "b", "e") with occupations of
    /// (c1+, c1-, c2+, c2-).
    fn index_of(&self, atom: &str, occupation: [usize; 4]) -> PyResult<usize> {
        let level: Level = atom.parse().map_err(to_py_err)?;
        self.inner
            .index_of(&BasisConfiguration::new(level, occupation))
            .map_err(to_py_err)
    }

    fn state_of(&self, index: usize) -> PyResult<(String, [usize; 4])> {
        let cfg = self.inner.state_of(index).map_err(to_py_err)?;
        Ok((cfg.atom.to_string(), cfg.occupation))
    }
}

fn with_solver(config: &PyConfig, solver: Option<&str>) -> PyResult<ScenarioConfig> {
    let mut c = config.inner.clone();
    if let Some(s) = solver {
        c.solver = s.parse::<Solver>().map_err(to_py_err)?;
    }
    Ok(c)
}

fn table_dict<'py>(py: Python<'py>, table: &Table) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("columns", table.columns.clone())?;
    d.set_item("rows", table.rows.clone())?;
    Ok(d)
}

/// Runs one scenario. Returns a dict with `populations`, `pulses`
/// (column/row tables), `metrics` and `stderr_P`. When `out` is given the
/// CSV files are written there as well.
#[pyfunction]
#[pyo3(signature = (config, solver=None, workers=None, out=None))]
fn run_scenario<'py>(
    py: Python<'py>,
    config: &PyConfig,
    solver: Option<&str>,
    workers: Option<usize>,
    out: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let c = with_solver(config, solver)?;
    let output = py
        .detach(|| experiments::run_scenario(&c, workers))
        .map_err(to_py_err)?;
    if let Some(dir) = out {
        output.write(Path::new(dir), "python").map_err(to_py_err)?;
    }
    let m = &output.metrics;
    let metrics = PyDict::new(py);
    metrics.set_item("P", m.success_probability)?;
    metrics.set_item("F_uncond", m.fidelity_unconditional)?;
    metrics.set_item("F_cond", m.fidelity_conditional)?;
    metrics.set_item("sector_weight", m.success_sector_weight)?;
    metrics.set_item("leakage", m.leakage)?;
    metrics.set_item("Q", m.q_expectation)?;
    let d = PyDict::new(py);
    d.set_item("populations", table_dict(py, &output.populations)?)?;
    d.set_item("pulses", table_dict(py, &output.pulses)?)?;
    d.set_item("metrics", metrics)?;
    d.set_item("stderr_P", output.stderr_p)?;
    d.set_item("warnings", output.warnings.clone())?;
    Ok(d)
}

/// Final P and F for every ratio in `config`'s sweep grid.
#[pyfunction]
#[pyo3(signature = (config, solver=None, workers=None))]
fn run_sweep<'py>(
    py: Python<'py>,
    config: &PyConfig,
    solver: Option<&str>,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyList>> {
    let c = with_solver(config, solver)?;
    let result = py.detach(|| experiments::run_sweep(&c, workers)).map_err(to_py_err)?;
    let rows = PyList::empty(py);
    for r in &result.rows {
        let d = PyDict::new(py);
        d.set_item("kappa_over_g0", r.kappa_over_g0)?;
        d.set_item("P", r.success_probability)?;
        d.set_item("stderr_P", r.stderr)?;
        d.set_item("F_cond", r.fidelity_conditional)?;
        d.set_item("F_uncond", r.fidelity_unconditional)?;
        rows.append(d)?;
    }
    Ok(rows)
}

/// Runs the invariant suite; returns `(passed, checks)`.
#[pyfunction]
#[pyo3(signature = (config, workers=None))]
fn verify<'py>(py: Python<'py>, config: &PyConfig, workers: Option<usize>) -> PyResult<(bool, Bound<'py, PyList>)> {
    let c = config.inner.clone();
    let report = py.detach(|| experiments::verify(&c, workers)).map_err(to_py_err)?;
    let checks = PyList::empty(py);
    for check in &report.checks {
        let d = PyDict::new(py);
        d.set_item("name", check.name)?;
        d.set_item("status", check.status.to_string())?;
        d.set_item("value", check.value)?;
        d.set_item("threshold", check.threshold)?;
        d.set_item("note", &check.note)?;
        checks.append(d)?;
    }
    Ok((report.passed(), checks))
}

/// Mixing angles and dark-state coordinates on the output grid.
#[pyfunction]
fn darkstate<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Bound<'py, PyDict>> {
    let model = config.inner.model().map_err(to_py_err)?;
    let table = experiments::darkstate_table(&model, &config.inner.grid.output_times()).map_err(to_py_err)?;
    table_dict(py, &table)
}

/// θ, β, γ, ϑ for given field strengths; `None` where undefined.
#[pyfunction]
fn mixing_angles(omega: f64, g1: f64, g2: f64) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    let a = model::mixing_angles(omega, g1, g2);
    (a.theta, a.beta, a.gamma, a.vartheta)
}

/// The 8×8 table ⟨X|H(t)|Y⟩ over |A⟩…|H⟩.
#[pyfunction]
fn manifold_matrix_elements<'py>(py: Python<'py>, config: &PyConfig, t: f64) -> PyResult<Bound<'py, PyList>> {
    let model = config.inner.model().map_err(to_py_err)?;
    let table = model.manifold_matrix_elements(t);
    let rows = PyList::empty(py);
    for a in NamedLabel::ALL {
        let row = PyList::empty(py);
        for b in NamedLabel::ALL {
            let v = table.get(a, b);
            row.append(PyComplex::from_doubles(py, v.re, v.im))?;
        }
        rows.append(row)?;
    }
    Ok(rows)
}

/// Named-basis amplitudes of the global dark state at time `t`.
#[pyfunction]
fn dark_state_global<'py>(py: Python<'py>, config: &PyConfig, t: f64) -> PyResult<Bound<'py, PyDict>> {
    let model = config.inner.model().map_err(to_py_err)?;
    let dark = model.dark_state_global(t).map_err(to_py_err)?;
    let d = PyDict::new(py);
    for l in NamedLabel::ALL {
        let a = model.named_basis().amplitude(l, &dark);
        d.set_item(l.to_string(), PyComplex::from_doubles(py, a.re, a.im))?;
    }
    Ok(d)
}

/// Seed of trajectory `index` in an ensemble with `master_seed`.
#[pyfunction]
fn derive_seed(master_seed: u64, index: u64) -> u64 {
    dynamics::derive_seed(master_seed, index)
}

#[pymodule]
fn epr_cqed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyHilbertSpace>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(darkstate, m)?)?;
    m.add_function(wrap_pyfunction!(mixing_angles, m)?)?;
    m.add_function(wrap_pyfunction!(manifold_matrix_elements, m)?)?;
    m.add_function(wrap_pyfunction!(dark_state_global, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
