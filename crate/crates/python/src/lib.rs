//! Python bindings: lattice specs, float and integer process states, and the
//! spectral, convergence and Maxwell diagnostics.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use vpsim::analysis::{self, spectral};
use vpsim::lattice::make_state;
use vpsim::oracle;
use vpsim::{Error, InitialCondition, ProcessKind};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Overflow { .. } | Error::InsufficientData(_) | Error::IllDefined(_) => {
            PyArithmeticError::new_err(err.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_kind(kind: &str) -> PyResult<ProcessKind> {
    serde_json::from_value(serde_json::Value::String(kind.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown process kind {kind:?}")))
}

fn parse_initial(initial: &str) -> PyResult<InitialCondition> {
    serde_json::from_str(initial).map_err(|e| PyValueError::new_err(format!("initial condition: {e}")))
}

/// Ring geometry with tau and k derived from lambda, m and the process scaling.
#[pyclass(name = "LatticeSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLatticeSpec {
    kind: ProcessKind,
    inner: vpsim::LatticeSpec,
}

#[pymethods]
impl PyLatticeSpec {
    #[new]
    #[pyo3(signature = (kind, n_sites, lam, m = 0.0))]
    fn new(kind: &str, n_sites: usize, lam: f64, m: f64) -> PyResult<Self> {
        let kind = parse_kind(kind)?;
        let inner = vpsim::LatticeSpec::for_process(kind, n_sites, lam, m).map_err(to_py)?;
        Ok(PyLatticeSpec { kind, inner })
    }

    #[getter]
    fn kind(&self) -> String {
        self.kind.to_string()
    }
    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites
    }
    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }
    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }
    #[getter]
    fn k(&self) -> f64 {
        self.inner.k
    }
    #[getter]
    fn m(&self) -> f64 {
        self.inner.mass
    }
    #[getter]
    fn scaling(&self) -> String {
        self.inner.scaling.to_string()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!("LatticeSpec(kind={}, n_sites={}, lam={}, tau={}, k={}, m={})", self.kind, s.n_sites, s.lambda, s.tau, s.k, s.mass)
    }
}

macro_rules! state_class {
    ($name:ident, $py_name:literal, $t:ty) => {
        /// Species arrays of one process plus the step counter.
        #[pyclass(name = $py_name)]
        struct $name {
            inner: vpsim::ProcessState<$t>,
        }

        #[pymethods]
        impl $name {
            /// `initial` is a JSON initial condition, e.g. `{"type": "delta_pair", "site": 8}`.
            #[new]
            fn new(spec: &PyLatticeSpec, initial: &str) -> PyResult<Self> {
                let ic = parse_initial(initial)?;
                let inner = make_state(spec.inner, spec.kind, &ic).map_err(to_py)?;
                Ok($name { inner })
            }

            #[staticmethod]
            fn from_fields(spec: &PyLatticeSpec, fields: Vec<Vec<$t>>) -> PyResult<Self> {
                let inner = vpsim::ProcessState::from_fields(spec.inner, spec.kind, fields).map_err(to_py)?;
                Ok($name { inner })
            }

            #[getter]
            fn step_index(&self) -> u64 {
                self.inner.step_index
            }

            #[getter]
            fn time(&self) -> f64 {
                self.inner.time()
            }

            /// Stored arrays in storage order (two levels for Klein-Gordon).
            fn fields(&self) -> Vec<Vec<$t>> {
                self.inner.fields.iter().map(|f| f.values.clone()).collect()
            }

            fn step(&mut self) -> PyResult<()> {
                vpsim::step(&mut self.inner).map_err(to_py)
            }

            /// Runs `n_steps` steps; returns `(step, census, occupied_sites)` every `cadence` steps.
            #[pyo3(signature = (n_steps, cadence = 1))]
            fn run(&mut self, n_steps: u64, cadence: u64) -> PyResult<Vec<(u64, $t, usize)>> {
                let reports = vpsim::run(&mut self.inner, n_steps, cadence).map_err(to_py)?;
                Ok(reports.into_iter().map(|r| (r.step_index, r.total_census, r.occupied_sites)).collect())
            }

            /// `(total census, occupied sites, [(species, sum, census)])` of the current level.
            fn census(&self) -> PyResult<($t, usize, Vec<(String, $t, $t)>)> {
                let r = analysis::census(&self.inner).map_err(to_py)?;
                let per_species = r
                    .sums
                    .iter()
                    .zip(&r.census)
                    .map(|(&(s, sum), &(_, c))| (s.to_string(), sum, c))
                    .collect();
                Ok((r.total_census, r.occupied_sites, per_species))
            }
        }
    };
}

state_class!(PyState, "State", f64);
state_class!(PyIntegerState, "IntegerState", i64);

/// Per-mode one-step update matrix as nested `(re, im)` pairs.
#[pyfunction]
fn mode_matrix(spec: &PyLatticeSpec, q: f64) -> PyResult<Vec<Vec<(f64, f64)>>> {
    let m = spectral::mode_matrix(spec.kind, &spec.inner, q).map_err(to_py)?;
    Ok(m.iter().map(|row| row.iter().map(|z| (z.re, z.im)).collect()).collect())
}

/// Rows `(q, branch, omega_lattice, growth, omega_continuum, deviation)`.
#[pyfunction]
#[pyo3(signature = (spec, qs = None))]
fn lattice_dispersion(spec: &PyLatticeSpec, qs: Option<Vec<f64>>) -> PyResult<Vec<(f64, String, f64, f64, f64, f64)>> {
    let qs = qs.unwrap_or_else(|| spectral::nonnegative_modes(&spec.inner));
    let rows = spectral::lattice_dispersion(spec.kind, &spec.inner, &qs).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            let branch = serde_json::to_value(r.branch).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            (r.q, branch, r.omega_lattice, r.growth, r.omega_continuum, r.deviation)
        })
        .collect())
}

#[pyfunction]
fn continuum_dispersion(kind: &str, m: f64, q: f64) -> PyResult<f64> {
    Ok(oracle::continuum_dispersion(parse_kind(kind)?, m, q))
}

/// Returns `(order, [(lambda, error)])`; `order` is `"exact"` or the fitted slope.
#[pyfunction]
fn convergence_study(
    py: Python<'_>,
    kind: &str,
    m: f64,
    length: f64,
    initial: &str,
    lambdas: Vec<f64>,
    horizon: f64,
) -> PyResult<(Py<PyAny>, Vec<(f64, f64)>)> {
    let kind = parse_kind(kind)?;
    let ic = parse_initial(initial)?;
    let report = analysis::convergence_study(kind, m, length, &ic, &lambdas, horizon).map_err(to_py)?;
    let order = match report.order.value() {
        Some(p) => p.into_pyobject(py)?.into_any().unbind(),
        None => "exact".into_pyobject(py)?.into_any().unbind(),
    };
    Ok((order, report.results.iter().map(|r| (r.lambda, r.error)).collect()))
}

/// `(E, B)` from right- and left-moving photon arrays.
#[pyfunction]
fn maxwell_fields(right: Vec<f64>, left: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    if right.len() != left.len() {
        return Err(PyValueError::new_err("right and left arrays differ in length"));
    }
    Ok(oracle::maxwell_fields(&right, &left))
}

#[pymodule]
fn vpsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLatticeSpec>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyIntegerState>()?;
    m.add_function(wrap_pyfunction!(mode_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(continuum_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(maxwell_fields, m)?)?;
    Ok(())
}
