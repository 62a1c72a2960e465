//! Python bindings: simulate panels, fit chains, summarize draws and
//! compute effects without going through files.

use std::path::PathBuf;

use panelqr::diagnostics::summarize as summarize_draws;
use panelqr::distributions;
use panelqr::effects::{compute_effects, Contrast, EffectOptions, EffectResult};
use panelqr::simgen::{generate, SimSpec};
use panelqr::{run_chain, Algorithm, Error, ModelSpec, PanelData, PosteriorDraws, Prior, RngStream, SamplerConfig};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyOSError::new_err(err.to_string()),
        Error::Numeric(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Returns `(theta, tau_sq)` of the asymmetric Laplace mixture at `p`.
#[pyfunction]
fn quantile_constants(p: f64) -> PyResult<(f64, f64)> {
    let qc = distributions::quantile_constants(p).map_err(to_py)?;
    Ok((qc.theta, qc.tau_sq))
}

#[pyfunction]
#[pyo3(signature = (x, p, location = 0.0, scale = 1.0))]
fn cdf_al(x: f64, p: f64, location: f64, scale: f64) -> PyResult<f64> {
    if !(p > 0.0 && p < 1.0 && scale > 0.0) {
        return Err(PyValueError::new_err("need 0 < p < 1 and scale > 0"));
    }
    Ok(distributions::cdf_al(x, location, scale, p))
}

/// A binary-outcome panel with an intercept column and individual means.
#[pyclass(name = "Panel", module = "panelqr_py", from_py_object)]
#[derive(Clone)]
struct PyPanel {
    inner: PanelData,
}

#[pymethods]
impl PyPanel {
    /// Reads a CSV with header `id,t,y,<covariates>`.
    #[staticmethod]
    #[pyo3(signature = (path, mundlak = None))]
    fn from_csv(path: PathBuf, mundlak: Option<Vec<String>>) -> PyResult<Self> {
        let inner = panelqr_cli::io::ingest_panel_csv(&path, mundlak.as_deref()).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_csv(&self, path: PathBuf) -> PyResult<()> {
        panelqr_cli::io::write_panel_csv(&path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn observations(&self) -> usize {
        self.inner.total()
    }

    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.columns().to_vec()
    }

    #[getter]
    fn mundlak(&self) -> Vec<String> {
        self.inner.mundlak_cols().iter().map(|&c| self.inner.columns()[c].clone()).collect()
    }

    #[getter]
    fn y(&self) -> Vec<u8> {
        self.inner.y().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Panel(n={}, observations={}, columns={:?})", self.inner.n(), self.inner.total(), self.inner.columns())
    }
}

/// Stored draws of one chain.
#[pyclass(name = "Draws", module = "panelqr_py", from_py_object)]
#[derive(Clone)]
struct PyDraws {
    inner: PosteriorDraws,
}

#[pymethods]
impl PyDraws {
    #[getter]
    fn quantile(&self) -> f64 {
        self.inner.meta.quantile
    }

    #[getter]
    fn wall_time_secs(&self) -> f64 {
        self.inner.meta.wall_time_secs
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `{name: [draws...]}` for beta, zeta and sigma_alpha2.
    fn parameters<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (name, series) in self.inner.parameters() {
            d.set_item(name, series)?;
        }
        Ok(d)
    }

    /// Random-effect draws as a list of rows, or None if not stored.
    fn alpha(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.alpha.as_ref().map(|a| (0..a.nrows()).map(|m| a.row(m).to_vec()).collect())
    }
}

/// Simulates the reference design; returns `(panel, truth)`.
#[pyfunction]
#[pyo3(signature = (n = 1000, p = 0.5, seed = 2021))]
fn simulate<'py>(py: Python<'py>, n: usize, p: f64, seed: u64) -> PyResult<(PyPanel, Bound<'py, PyDict>)> {
    let spec = SimSpec { n, ..SimSpec::reference(p, seed) };
    spec.validate().map_err(to_py)?;
    let out = generate(&spec, &mut RngStream::new(seed)).map_err(to_py)?;
    let truth = PyDict::new(py);
    truth.set_item("beta", spec.beta.clone())?;
    truth.set_item("zeta", spec.zeta.clone())?;
    truth.set_item("sigma_alpha_sq", spec.sigma_alpha_sq)?;
    truth.set_item("alpha", out.alpha.clone())?;
    truth.set_item("counts", out.counts)?;
    Ok((PyPanel { inner: out.data }, truth))
}

#[pyfunction]
#[pyo3(signature = (
    panel, p, iterations = 16000, burn_in = 1000, thin = 10, seed = 2021,
    algorithm = "blocked", store_alpha = true, beta_var = 1e3, zeta_var = 1e3, c1 = 10.0, d1 = 9.0
))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    panel: &PyPanel,
    p: f64,
    iterations: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
    algorithm: &str,
    store_alpha: bool,
    beta_var: f64,
    zeta_var: f64,
    c1: f64,
    d1: f64,
) -> PyResult<PyDraws> {
    let algorithm: Algorithm = algorithm.parse().map_err(to_py)?;
    let data = &panel.inner;
    let prior = Prior::isotropic(data.k(), data.q(), beta_var, zeta_var, c1, d1);
    let spec = ModelSpec::new(p, &prior).map_err(to_py)?;
    let config = SamplerConfig { iterations, burn_in, thin, seed, algorithm, store_alpha };
    let draws = py.detach(|| run_chain(data, &spec, &config)).map_err(to_py)?;
    Ok(PyDraws { inner: draws })
}

/// Posterior summary rows as dictionaries.
#[pyfunction]
fn summarize<'py>(py: Python<'py>, draws: &PyDraws) -> PyResult<Vec<Bound<'py, PyDict>>> {
    summarize_draws(&draws.inner)
        .map_err(to_py)?
        .into_iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("name", s.name)?;
            d.set_item("mean", s.mean)?;
            d.set_item("std", s.std)?;
            d.set_item("median", s.median)?;
            d.set_item("hpdi", (s.hpdi_lo, s.hpdi_hi))?;
            d.set_item("if", s.inefficiency)?;
            d.set_item("geweke_z", s.geweke_z)?;
            d.set_item("acf", (s.acf1, s.acf5, s.acf10))?;
            Ok(d)
        })
        .collect()
}

fn effect_dict<'py>(py: Python<'py>, r: &EffectResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mean", r.mean)?;
    d.set_item("std", r.std)?;
    d.set_item("hpdi", r.hpdi)?;
    Ok(d)
}

/// AME, RR and OR of moving `covariate` from `a` to `b`.
#[pyfunction]
#[pyo3(signature = (draws, panel, covariate, a, b))]
fn effects<'py>(py: Python<'py>, draws: &PyDraws, panel: &PyPanel, covariate: &str, a: f64, b: f64) -> PyResult<Bound<'py, PyDict>> {
    let column = panel
        .inner
        .column_index(covariate)
        .filter(|&c| c > 0)
        .ok_or_else(|| PyValueError::new_err(format!("no covariate named `{covariate}`")))?;
    let contrast = Contrast::new(column, a, b).map_err(to_py)?;
    let e = compute_effects(&draws.inner, &panel.inner, &contrast, &EffectOptions::default()).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("ame", effect_dict(py, &e.ame)?)?;
    d.set_item("rr", effect_dict(py, &e.rr)?)?;
    d.set_item("or", effect_dict(py, &e.or)?)?;
    Ok(d)
}

#[pymodule]
fn panelqr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPanel>()?;
    m.add_class::<PyDraws>()?;
    m.add_function(wrap_pyfunction!(quantile_constants, m)?)?;
    m.add_function(wrap_pyfunction!(cdf_al, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(effects, m)?)?;
    Ok(())
}
