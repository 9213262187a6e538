//! Python bindings: parameter types, densities, samplers, state
//! probabilities, estimators and the Monte Carlo study.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use genfpp::dist::{self, GenIIParams as CoreGen2, GenIParams as CoreGen1};
use genfpp::estimate::{self, EstimationResult, GammaSign};
use genfpp::process::{self, Model, Stop};

fn py_err(e: genfpp::Error) -> PyErr {
    match e {
        genfpp::Error::Domain(_) | genfpp::Error::Parse(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for genfpp::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Generalized Mittag-Leffler waiting times (Generalization I).
#[pyclass(name = "GenIParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct GenIParams(CoreGen1);

#[pymethods]
impl GenIParams {
    #[new]
    #[pyo3(signature = (nu, delta = 1.0, lam = 1.0))]
    fn new(nu: f64, delta: f64, lam: f64) -> PyResult<Self> {
        CoreGen1::new(nu, delta, lam).py().map(Self)
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.0.nu
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda
    }

    fn pdf(&self, t: f64) -> PyResult<f64> {
        dist::genml_pdf(&self.0, t).py()
    }

    fn cdf(&self, t: f64) -> PyResult<f64> {
        dist::genml_cdf(&self.0, t).py()
    }

    fn laplace(&self, s: f64) -> PyResult<f64> {
        dist::genml_lt(&self.0, s).py()
    }

    fn fractional_moment(&self, q: f64) -> PyResult<f64> {
        dist::genml_fractional_moment(&self.0, q).py()
    }

    fn sample(&self, n: usize, rng: &mut RngStream) -> PyResult<Vec<f64>> {
        dist::genml_sample_n(&self.0, n, &mut rng.0).py()
    }

    fn __repr__(&self) -> String {
        format!("GenIParams(nu={}, delta={}, lam={})", self.0.nu, self.0.delta, self.0.lambda)
    }
}

/// Stretched-squashed Mittag-Leffler waiting times (Generalization II).
#[pyclass(name = "GenIIParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct GenIIParams(CoreGen2);

#[pymethods]
impl GenIIParams {
    #[new]
    #[pyo3(signature = (nu, gamma, lam = 1.0))]
    fn new(nu: f64, gamma: f64, lam: f64) -> PyResult<Self> {
        CoreGen2::new(nu, gamma, lam).py().map(Self)
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.0.nu
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma_exp
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda
    }

    fn pdf(&self, x: f64) -> PyResult<f64> {
        dist::ssml_pdf(&self.0, x).py()
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        dist::ssml_cdf(&self.0, x).py()
    }

    /// Laplace transform by quadrature (the series form converges only for 0 < gamma <= nu).
    fn laplace(&self, s: f64) -> PyResult<f64> {
        dist::ssml_lt(&self.0, s).py()
    }

    fn fractional_moment(&self, q: f64) -> PyResult<f64> {
        dist::ssml_fractional_moment(&self.0, q).py()
    }

    fn sample(&self, n: usize, rng: &mut RngStream) -> PyResult<Vec<f64>> {
        dist::ssml_sample_n(&self.0, n, &mut rng.0).py()
    }

    fn __repr__(&self) -> String {
        format!("GenIIParams(nu={}, gamma={}, lam={})", self.0.nu, self.0.gamma_exp, self.0.lambda)
    }
}

/// Seeded ChaCha20 stream.
#[pyclass(name = "RngStream")]
pub struct RngStream(genfpp::RngStream);

#[pymethods]
impl RngStream {
    #[new]
    #[pyo3(signature = (seed, stream = 0))]
    fn new(seed: u64, stream: u64) -> Self {
        Self(genfpp::RngStream::new(seed, stream))
    }

    fn substream(&self, index: u64) -> Self {
        Self(self.0.substream(index))
    }

    fn uniform(&mut self) -> f64 {
        self.0.open01()
    }
}

fn model_of(obj: &Bound<'_, PyAny>) -> PyResult<Model> {
    if let Ok(p) = obj.extract::<GenIParams>() {
        Ok(Model::Gen1(p.0))
    } else if let Ok(p) = obj.extract::<GenIIParams>() {
        Ok(Model::Gen2(p.0))
    } else {
        Err(PyValueError::new_err("expected GenIParams or GenIIParams"))
    }
}

/// Prabhakar function E^xi_{beta,gamma}(z).
#[pyfunction]
#[pyo3(signature = (beta, gamma, xi, z))]
fn mittag_leffler(beta: f64, gamma: f64, xi: f64, z: f64) -> PyResult<f64> {
    genfpp::specfun::mittag_leffler(genfpp::specfun::PrabhakarArgs::new(beta, gamma, xi, z)).py()
}

/// State probabilities p_0..p_K of Generalization I at time t.
#[pyfunction]
#[pyo3(signature = (params, t, kmax = None))]
fn state_pmf(params: &GenIParams, t: f64, kmax: Option<usize>) -> PyResult<Vec<f64>> {
    process::state_pmf(&params.0, t, kmax).py().map(|p| p.probs)
}

#[pyfunction]
fn mean_count(params: &GenIParams, t: f64) -> PyResult<f64> {
    process::mean_count(&params.0, t).py()
}

#[pyfunction]
fn fpp_state_pmf(nu: f64, lam: f64, t: f64, k: u32) -> PyResult<f64> {
    process::fpp_state_pmf(nu, lam, t, k).py()
}

#[pyfunction]
fn fpp_count_variance(nu: f64, lam: f64, t: f64) -> PyResult<f64> {
    process::fpp_count_variance(nu, lam, t).py()
}

/// Event times of one path, stopped at `horizon` or after `events` events.
#[pyfunction]
#[pyo3(signature = (params, rng, horizon = None, events = None))]
fn simulate_path(
    params: &Bound<'_, PyAny>,
    rng: &mut RngStream,
    horizon: Option<f64>,
    events: Option<usize>,
) -> PyResult<Vec<f64>> {
    let stop = match (horizon, events) {
        (Some(h), None) => Stop::Horizon(h),
        (None, Some(n)) => Stop::Events(n),
        _ => return Err(PyValueError::new_err("give exactly one of horizon and events")),
    };
    process::simulate_path(&model_of(params)?, stop, &mut rng.0).py().map(|p| p.event_times)
}

/// (mean, variance, third central moment) of log(samples).
#[pyfunction]
fn log_moment_summary(samples: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let s = estimate::log_moment_summary(&samples).py()?;
    Ok((s.mean_log, s.var_log, s.mu3_log))
}

/// Estimate result as (nu, delta-or-gamma, lambda, nu_clamped, unconstrained or None).
type PyEstimate = (f64, f64, f64, bool, Option<(f64, f64, f64)>);

fn unpack(r: EstimationResult) -> PyEstimate {
    let [a, b, c] = r.triple();
    (a, b, c, r.diagnostics.nu_clamped, r.unconstrained.map(|u| (u.nu, u.shape, u.lambda)))
}

#[pyfunction]
fn estimate_gen1(samples: Vec<f64>) -> PyResult<PyEstimate> {
    let s = estimate::log_moment_summary(&samples).py()?;
    estimate::estimate_gen1(&s).py().map(unpack)
}

#[pyfunction]
#[pyo3(signature = (samples, gamma_sign = "sign_rule"))]
fn estimate_gen2(samples: Vec<f64>, gamma_sign: &str) -> PyResult<PyEstimate> {
    let sign = match gamma_sign {
        "sign_rule" => GammaSign::SignRule,
        "positive" => GammaSign::Positive,
        _ => return Err(PyValueError::new_err("gamma_sign must be 'sign_rule' or 'positive'")),
    };
    let s = estimate::log_moment_summary(&samples).py()?;
    estimate::estimate_gen2_with(&s, sign).py().map(unpack)
}

/// Run a study from config text; returns the result CSV.
#[pyfunction]
#[pyo3(signature = (config, threads = None))]
fn run_study(py: Python<'_>, config: &str, threads: Option<usize>) -> PyResult<String> {
    let cfg = genfpp::mcstudy::StudyConfig::parse(config).py()?;
    let n = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    py.detach(|| genfpp::mcstudy::run_study_threads(&cfg, n)).py().map(|r| r.to_csv())
}

#[pymodule]
mod pygenfpp {
    #[pymodule_export]
    use super::{
        estimate_gen1, estimate_gen2, fpp_count_variance, fpp_state_pmf, log_moment_summary, mean_count,
        mittag_leffler, run_study, simulate_path, state_pmf, GenIIParams, GenIParams, RngStream,
    };
}
