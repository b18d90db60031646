//! Python bindings. Matrices cross the boundary as lists of rows; reports
//! come back as plain dicts.

use std::path::PathBuf;

use infosub::cli::ExperimentConfig;
use infosub::data::{
    gen_correlated_gaussians, gen_fair_synthetic, simulate_lotka_volterra, FairSynthConfig,
    LvParams,
};
use infosub::mi::{ksg_mi as ksg, plugin_entropy as plugin, OracleConfig};
use infosub::subtraction::{self, SubtractionConfig};
use infosub::{Matrix, Seed};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;

fn err(e: infosub::Error) -> PyErr {
    match e {
        infosub::Error::InvalidArgument(_)
        | infosub::Error::Shape { .. }
        | infosub::Error::Data(_)
        | infosub::Error::Empty(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(err)
}

fn to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n
                .as_f64()
                .unwrap_or(f64::NAN)
                .into_pyobject(py)?
                .into_any()
                .unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let items = a
                .iter()
                .map(|x| to_py(py, x))
                .collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any().unbind()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

/// KSG estimate of I(x; y) in nats.
#[pyfunction]
#[pyo3(signature = (x, y, k = 5))]
fn ksg_mi(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    Ok(ksg(&matrix(x)?, &matrix(y)?, k).map_err(err)?.value_nats)
}

/// Histogram entropy in bits.
#[pyfunction]
#[pyo3(signature = (x, bins = 32))]
fn plugin_entropy(x: Vec<Vec<f64>>, bins: usize) -> PyResult<f64> {
    plugin(&matrix(x)?, bins).map_err(err)
}

#[pyfunction]
fn fairness_metrics(
    py: Python<'_>,
    preds: Vec<usize>,
    truth: Vec<usize>,
    protected: Vec<usize>,
) -> PyResult<Py<PyAny>> {
    let r = infosub::eval::fairness_metrics(&preds, &truth, &protected).map_err(err)?;
    dict(py, &r)
}

/// Entropy and information cells for a representation `z` of target `y`
/// under condition `x`, in bits.
#[pyfunction]
fn information_report(
    py: Python<'_>,
    z: Vec<Vec<f64>>,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
) -> PyResult<Py<PyAny>> {
    let r = infosub::eval::information_report(
        &matrix(z)?,
        &matrix(x)?,
        &matrix(y)?,
        &OracleConfig::default(),
    )
    .map_err(err)?;
    dict(py, &r)
}

fn columns(py: Python<'_>, ds: &infosub::data::Dataset) -> PyResult<Py<PyAny>> {
    let d = PyDict::new(py);
    for info in ds.columns() {
        let m = ds.column(&info.name).map_err(err)?;
        if m.cols() == 1 {
            d.set_item(&info.name, m.into_data())?;
        } else {
            d.set_item(&info.name, m.to_rows())?;
        }
    }
    Ok(d.into_any().unbind())
}

/// Predator-prey trajectory with the default parameters; columns W, S, R, G, t.
#[pyfunction]
#[pyo3(signature = (steps = 1500))]
fn simulate_lotka_volterra_py(py: Python<'_>, steps: usize) -> PyResult<Py<PyAny>> {
    let ds = simulate_lotka_volterra(&LvParams {
        steps,
        ..LvParams::default()
    })
    .map_err(err)?;
    columns(py, &ds)
}

/// Fair-learning synthetic data; columns X (country index) and Y.
#[pyfunction]
#[pyo3(signature = (n = 10000, seed = 0))]
fn fair_synthetic(py: Python<'_>, n: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let ds = gen_fair_synthetic(
        &FairSynthConfig {
            n,
            ..FairSynthConfig::default()
        },
        Seed(seed),
    )
    .map_err(err)?;
    columns(py, &ds)
}

/// Correlated standard Gaussian pair `(x, y)`.
#[pyfunction]
#[pyo3(signature = (n, rho, dim = 1, seed = 0))]
fn correlated_gaussians(
    n: usize,
    rho: f64,
    dim: usize,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let (x, y) = gen_correlated_gaussians(n, rho, dim, Seed(seed)).map_err(err)?;
    Ok((x.to_rows(), y.to_rows()))
}

/// Every problem with a TOML experiment config; empty when runnable.
#[pyfunction]
fn validate_config(text: &str) -> Vec<String> {
    match ExperimentConfig::from_toml(text) {
        Ok(c) => c.validate(),
        Err(e) => vec![e],
    }
}

/// Runs a TOML experiment config and returns `(run_dir, report)`.
#[pyfunction]
#[pyo3(signature = (text, output = None, seed = None))]
fn run_experiment(
    py: Python<'_>,
    text: &str,
    output: Option<PathBuf>,
    seed: Option<u64>,
) -> PyResult<(String, Py<PyAny>)> {
    let cfg = ExperimentConfig::from_toml(text).map_err(PyValueError::new_err)?;
    let summary = py
        .detach(|| infosub::cli::run_config(&cfg, output.as_deref(), seed))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((
        summary.run_dir.display().to_string(),
        to_py(py, &summary.report)?,
    ))
}

/// Generator plus critics for one conditioning/target pair.
#[pyclass]
struct Subtractor {
    inner: subtraction::Subtractor,
    x: Matrix,
    y: Matrix,
}

#[pymethods]
impl Subtractor {
    /// `config` is a TOML fragment with subtraction settings, e.g.
    /// `"n2 = 500\ngenerator_dims = [32]"`.
    #[new]
    #[pyo3(signature = (x, y, config = ""))]
    fn new(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, config: &str) -> PyResult<Self> {
        let cfg: SubtractionConfig =
            toml::from_str(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let problems = cfg.validate();
        if !problems.is_empty() {
            return Err(PyValueError::new_err(problems.join("; ")));
        }
        let (x, y) = (matrix(x)?, matrix(y)?);
        let inner = subtraction::Subtractor::new(cfg, &x, &y).map_err(err)?;
        Ok(Self { inner, x, y })
    }

    /// Runs `epochs` epochs (default: until the configured total) and
    /// returns the last diagnostics record.
    #[pyo3(signature = (epochs = None))]
    fn train(&mut self, py: Python<'_>, epochs: Option<usize>) -> PyResult<Py<PyAny>> {
        let n = epochs.unwrap_or_else(|| self.inner.config().n2.saturating_sub(self.inner.epoch()));
        let Self { inner, x, y } = self;
        py.detach(|| -> infosub::Result<()> {
            for _ in 0..n {
                inner.run_epoch(x, y)?;
            }
            Ok(())
        })
        .map_err(err)?;
        dict(py, &self.inner.trace().last())
    }

    fn generate(&self, y: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(self
            .inner
            .generate_representation(&matrix(y)?)
            .map_err(err)?
            .to_rows())
    }

    fn trace(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        dict(py, &self.inner.trace().records)
    }

    #[getter]
    fn epoch(&self) -> usize {
        self.inner.epoch()
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        self.inner.save(dir).map_err(err)
    }
}

#[pymodule]
fn infosub_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ksg_mi, m)?)?;
    m.add_function(wrap_pyfunction!(plugin_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(fairness_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(information_report, m)?)?;
    m.add(
        "simulate_lotka_volterra",
        wrap_pyfunction!(simulate_lotka_volterra_py, m)?,
    )?;
    m.add_function(wrap_pyfunction!(fair_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(correlated_gaussians, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_class::<Subtractor>()?;
    Ok(())
}
