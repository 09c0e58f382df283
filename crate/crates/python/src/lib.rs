// pyo3 0.22 macros trip this lint on every fallible method
#![allow(clippy::useless_conversion)]

use entemp_core::error::ErrorClass;
use entemp_core::lattice::{assemble, LatticeConfig};
use entemp_core::oracle::GridOracleConfig;
use entemp_core::thermo::{default_eps, default_partitions};
use entemp_core::{ChannelSumParams, Error, MetricSpec, SweepParams};
use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(entemp, NumericalError, PyException);

fn to_py(e: Error) -> PyErr {
    match e.class() {
        ErrorClass::Config => PyValueError::new_err(e.to_string()),
        _ => NumericalError::new_err(format!("{}: {e}", e.tag())),
    }
}

// serde -> JSON text -> Python objects keeps the dict layout identical to
// the report files written by the CLI
fn to_object<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(value).map_err(|e| to_py(e.into()))?;
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

type Rows = Vec<Vec<f64>>;

fn rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Black-hole background in units of the horizon radius.
#[pyclass(name = "Metric", module = "entemp", frozen)]
#[derive(Clone)]
struct PyMetric {
    inner: MetricSpec,
}

#[pymethods]
impl PyMetric {
    #[staticmethod]
    #[pyo3(signature = (dim = 2))]
    fn flat(dim: u32) -> Self {
        Self { inner: MetricSpec::flat(dim) }
    }

    #[staticmethod]
    #[pyo3(signature = (dim = 2))]
    fn schwarzschild(dim: u32) -> Self {
        Self { inner: MetricSpec::schwarzschild(dim) }
    }

    #[staticmethod]
    #[pyo3(signature = (q, dim = 2))]
    fn reissner_nordstrom(q: f64, dim: u32) -> PyResult<Self> {
        let inner = MetricSpec::reissner_nordstrom(q, dim);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.charge()
    }

    #[getter]
    fn dim(&self) -> u32 {
        self.inner.dim()
    }

    /// `[f, f', f'', f''']` at radius `r`.
    fn derivatives(&self, r: f64) -> PyResult<[f64; 4]> {
        self.inner.derivatives(r).map_err(to_py)
    }

    /// `f'(1) / 4 pi`; zero without a horizon.
    fn hawking_temperature(&self) -> PyResult<f64> {
        Ok(entemp_core::hawking_temperature(&self.inner).map_err(to_py)?.value)
    }

    fn __repr__(&self) -> String {
        format!("Metric(kind={:?}, q={}, dim={})", self.kind(), self.q(), self.dim())
    }
}

/// `(K0, K1, K2)` of one angular channel as nested lists.
#[pyfunction]
#[pyo3(signature = (metric, sites, partition, l = 0))]
fn coupling_matrices(metric: &PyMetric, sites: usize, partition: usize, l: u32) -> PyResult<(Rows, Rows, Rows)> {
    let cfg = LatticeConfig::new(sites, partition, l, metric.inner.dim()).map_err(to_py)?;
    let cm = assemble(&metric.inner, &cfg).map_err(to_py)?;
    Ok((rows(cm.k0()), rows(cm.k1()), rows(cm.k2())))
}

/// Entropy of the ground state of `K` after tracing out the first `n` sites.
#[pyfunction]
fn partition_entropy(k: Vec<Vec<f64>>, n: usize) -> PyResult<f64> {
    entemp_core::partition_entropy(&matrix(k)?, n).map_err(to_py)
}

/// Grid-sampled reference entropy for at most four oscillators.
#[pyfunction]
#[pyo3(signature = (k, n, grid_points = 64, halfwidth = 6.0))]
fn brute_force_entropy(k: Vec<Vec<f64>>, n: usize, grid_points: usize, halfwidth: f64) -> PyResult<f64> {
    let cfg = GridOracleConfig { grid_points, halfwidth };
    entemp_core::brute_force_entropy(&matrix(k)?, n, &cfg).map_err(to_py)
}

#[pyfunction]
fn degeneracy(l: u32, dim: u32) -> PyResult<u64> {
    if dim == 0 {
        return Err(PyValueError::new_err("dim must be positive"));
    }
    Ok(entemp_core::metric::degeneracy(l, dim))
}

fn sweep_params(eps: Option<Vec<f64>>, l_max: u32, tol: f64) -> SweepParams {
    SweepParams { eps: eps.unwrap_or_else(default_eps), channels: ChannelSumParams { l_max, tol } }
}

/// Entropy and energy against `eps` for the cut after site `n`, as a dict.
#[pyfunction]
#[pyo3(signature = (metric, sites, n, eps = None, l_max = 400, tol = 1e-8))]
fn epsilon_sweep(py: Python<'_>, metric: &PyMetric, sites: usize, n: usize, eps: Option<Vec<f64>>, l_max: u32, tol: f64) -> PyResult<PyObject> {
    let params = sweep_params(eps, l_max, tol);
    let s = py.allow_threads(|| entemp_core::epsilon_sweep(&metric.inner, sites, n, &params)).map_err(to_py)?;
    to_object(py, &s)
}

/// Temperature averaged over cuts, as a dict shaped like `report.json`.
#[pyfunction]
#[pyo3(signature = (metric, sites, partitions = None, eps = None, l_max = 400, tol = 1e-8))]
fn temperature_report(
    py: Python<'_>,
    metric: &PyMetric,
    sites: usize,
    partitions: Option<Vec<usize>>,
    eps: Option<Vec<f64>>,
    l_max: u32,
    tol: f64,
) -> PyResult<PyObject> {
    let partitions = partitions.unwrap_or_else(|| default_partitions(sites));
    let params = sweep_params(eps, l_max, tol);
    let r = py
        .allow_threads(|| entemp_core::temperature_report(&metric.inner, sites, &partitions, &params))
        .map_err(to_py)?;
    to_object(py, &r)
}

/// Power-law fit `S ~ C n^p` at fixed `eps`.
#[pyfunction]
#[pyo3(signature = (metric, sites, partitions, eps = 0.0, l_max = 400, tol = 1e-8))]
fn area_law_fit(py: Python<'_>, metric: &PyMetric, sites: usize, partitions: Vec<usize>, eps: f64, l_max: u32, tol: f64) -> PyResult<PyObject> {
    let params = ChannelSumParams { l_max, tol };
    let fit = py
        .allow_threads(|| entemp_core::area_law_fit(&metric.inner, sites, &partitions, eps, &params))
        .map_err(to_py)?;
    to_object(py, &fit)
}

#[pymodule]
fn entemp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("NumericalError", m.py().get_type_bound::<NumericalError>())?;
    m.add_class::<PyMetric>()?;
    m.add_function(wrap_pyfunction!(coupling_matrices, m)?)?;
    m.add_function(wrap_pyfunction!(partition_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(degeneracy, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(temperature_report, m)?)?;
    m.add_function(wrap_pyfunction!(area_law_fit, m)?)?;
    Ok(())
}
