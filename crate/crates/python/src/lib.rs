//! Python bindings. Build with the `extension-module` feature (maturin does
//! this from `pyproject.toml`) to produce an importable `gwregion_py` module.

use gwregion::oracle::{brute_force_lower, Mode, OracleConfig};
use gwregion::surface::{self, Evaluation, Quantity, Source};
use gwregion::verify::{run_criterion, VerifyOptions, CRITERIA};
use gwregion::{GwError, Joint2x2};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Row = (f64, f64, Option<f64>, String);
type CheckRow = (u8, String, f64, f64, bool);

fn to_py(e: GwError) -> PyErr {
    match e {
        GwError::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(j: &Joint2x2) -> [[f64; 2]; 2] {
    j.matrix()
}

/// Doubly symmetric binary source with crossover probability `p` (bits).
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct DsbsSource {
    inner: gwregion::DsbsSource,
}

#[pymethods]
impl DsbsSource {
    #[new]
    fn new(p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: gwregion::DsbsSource::new(p).map_err(to_py)?,
        })
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    fn rate_distortion(&self, d1: f64, d2: f64) -> PyResult<f64> {
        self.inner.rate_distortion(d1, d2).map_err(to_py)
    }

    fn upsilon_star(&self, alpha: f64, beta: f64) -> PyResult<f64> {
        self.inner.upsilon_star(alpha, beta).map_err(to_py)
    }

    fn lower_envelope(&self, alpha: f64, beta: f64) -> PyResult<f64> {
        self.inner.lower_envelope(alpha, beta).map_err(to_py)
    }

    fn upper_envelope(&self, alpha: f64, beta: f64) -> PyResult<f64> {
        self.inner.upper_envelope(alpha, beta).map_err(to_py)
    }

    fn lossy_gw_rate(&self, r1: f64, r2: f64, d1: f64, d2: f64) -> PyResult<f64> {
        self.inner.lossy_gw_rate(r1, r2, d1, d2).map_err(to_py)
    }

    fn i0_boundary(&self, alpha: f64) -> f64 {
        self.inner.i0_boundary(alpha)
    }

    #[pyo3(signature = (alpha, beta, fine = false))]
    fn classify(&self, alpha: f64, beta: f64, fine: bool) -> PyResult<&'static str> {
        let level = if fine {
            gwregion::Granularity::Fine
        } else {
            gwregion::Granularity::Coarse
        };
        Ok(self.inner.classify(alpha, beta, level).map_err(to_py)?.as_str())
    }

    /// Multistart channel search; returns `(alpha, beta, gamma)` achieved.
    #[pyo3(signature = (alpha, beta, restarts = 64, seed = 0, mode = "increasing"))]
    fn brute_force_lower(
        &self,
        alpha: f64,
        beta: f64,
        restarts: usize,
        seed: u64,
        mode: &str,
    ) -> PyResult<(f64, f64, f64)> {
        let mode = match mode {
            "increasing" => Mode::Increasing,
            "equality" => Mode::Equality,
            "maximize" => Mode::Maximize,
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        let cfg = OracleConfig {
            restarts,
            ..OracleConfig::with_seed(seed)
        };
        let r = brute_force_lower(&self.inner, alpha, beta, &cfg, mode).map_err(to_py)?;
        Ok((r.achieved.alpha, r.achieved.beta, r.achieved.gamma))
    }

    fn __repr__(&self) -> String {
        format!("DsbsSource(p={})", self.inner.p())
    }
}

/// Bivariate Gaussian source with correlation `rho` (nats).
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct GaussianSource {
    inner: gwregion::GaussianSource,
}

#[pymethods]
impl GaussianSource {
    #[new]
    fn new(rho: f64) -> PyResult<Self> {
        Ok(Self {
            inner: gwregion::GaussianSource::new(rho).map_err(to_py)?,
        })
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho()
    }

    fn upsilon_star(&self, alpha: f64, beta: f64) -> PyResult<f64> {
        self.inner.upsilon_star(alpha, beta).map_err(to_py)
    }

    fn upper_envelope(&self, alpha: f64, beta: f64) -> PyResult<f64> {
        self.inner.upper_envelope(alpha, beta).map_err(to_py)
    }

    fn psi_lower(&self, alpha: f64, beta: f64) -> PyResult<f64> {
        self.inner.psi_lower(alpha, beta).map_err(to_py)
    }

    fn phi_upper(&self, alpha: f64, beta: f64) -> PyResult<f64> {
        self.inner.phi_upper(alpha, beta).map_err(to_py)
    }

    fn phi_q(&self, q: f64, alpha: f64) -> PyResult<f64> {
        self.inner.phi_q(q, alpha).map_err(to_py)
    }

    fn classify(&self, alpha: f64, beta: f64) -> PyResult<&'static str> {
        Ok(self.inner.classify(alpha, beta).map_err(to_py)?.as_str())
    }

    fn __repr__(&self) -> String {
        format!("GaussianSource(rho={})", self.inner.rho())
    }
}

fn source_of(obj: &Bound<'_, PyAny>) -> PyResult<Source> {
    if let Ok(s) = obj.extract::<DsbsSource>() {
        return Ok(Source::Dsbs(s.inner));
    }
    if let Ok(s) = obj.extract::<GaussianSource>() {
        return Ok(Source::Gaussian(s.inner));
    }
    Err(PyValueError::new_err("source must be DsbsSource or GaussianSource"))
}

fn quantity_of(which: &str, q: Option<f64>, d1: Option<f64>, d2: Option<f64>) -> PyResult<Quantity> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| PyValueError::new_err(format!("{which} requires {name}")))
    };
    Ok(match which {
        "increasing" => Quantity::Increasing,
        "lower" => Quantity::Lower,
        "upper" => Quantity::Upper,
        "rd" => Quantity::Rd,
        "psi-lower" => Quantity::PsiLower,
        "phi-upper" => Quantity::PhiUpper,
        "phi-q" => Quantity::PhiQ { q: need(q, "q")? },
        "conv-phi" => Quantity::ConvPhi,
        "lossy" => Quantity::Lossy {
            d1: need(d1, "d1")?,
            d2: need(d2, "d2")?,
        },
        other => return Err(PyValueError::new_err(format!("unknown quantity {other:?}"))),
    })
}

fn evaluation_dict<'py>(py: Python<'py>, e: &Evaluation, units: &str) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", e.value)?;
    d.set_item("region", &e.region)?;
    d.set_item("units", units)?;
    d.set_item("coupling", e.coupling.as_ref().map(matrix))?;
    if let Some(m) = &e.mixture {
        let comps: Vec<[[f64; 2]; 2]> = m.components.iter().map(matrix).collect();
        d.set_item("mixture", (m.weights.clone(), comps))?;
    } else {
        d.set_item("mixture", py.None())?;
    }
    Ok(d)
}

/// Evaluates `which` at one point; returns a dict with `value` (None
/// outside the domain), `region`, `units`, `coupling` and `mixture`.
#[pyfunction]
#[pyo3(signature = (source, which, alpha, beta = 0.0, q = None, d1 = None, d2 = None))]
#[allow(clippy::too_many_arguments)]
fn evaluate<'py>(
    py: Python<'py>,
    source: &Bound<'py, PyAny>,
    which: &str,
    alpha: f64,
    beta: f64,
    q: Option<f64>,
    d1: Option<f64>,
    d2: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let src = source_of(source)?;
    let quantity = quantity_of(which, q, d1, d2)?;
    let e = surface::evaluate(&src, &quantity, alpha, beta).map_err(to_py)?;
    evaluation_dict(py, &e, src.units().unit())
}

/// Sweeps `which` over a `steps × steps` grid; returns a list of
/// `(alpha, beta, value, region)` rows in row-major order.
#[pyfunction]
#[pyo3(signature = (source, which, steps = 101, extent = None, q = None, d1 = None, d2 = None))]
#[allow(clippy::too_many_arguments)]
fn surface_rows(
    source: &Bound<'_, PyAny>,
    which: &str,
    steps: usize,
    extent: Option<f64>,
    q: Option<f64>,
    d1: Option<f64>,
    d2: Option<f64>,
) -> PyResult<Vec<Row>> {
    let src = source_of(source)?;
    let quantity = quantity_of(which, q, d1, d2)?;
    let extent = extent.unwrap_or(match quantity {
        Quantity::Rd => 0.5,
        _ => src.default_extent(),
    });
    let rows = surface::surface(&src, &quantity, steps, extent).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.alpha, r.beta, r.value, r.region))
        .collect())
}

/// Runs the verification suite; returns `(criterion, name, max_deviation,
/// tolerance, passed)` per check.
#[pyfunction]
#[pyo3(signature = (quick = true, seed = 0, criteria = None))]
fn verify(
    py: Python<'_>,
    quick: bool,
    seed: u64,
    criteria: Option<Vec<u8>>,
) -> PyResult<Vec<CheckRow>> {
    let criteria = criteria.unwrap_or_else(|| (1..=CRITERIA).collect());
    if let Some(&c) = criteria.iter().find(|&&c| c == 0 || c > CRITERIA) {
        return Err(PyValueError::new_err(format!("criterion {c} out of range")));
    }
    let opts = VerifyOptions {
        quick,
        seed,
        offset: 0.0,
    };
    let reports = py.detach(|| {
        criteria
            .iter()
            .map(|&c| run_criterion(c, &opts))
            .collect::<Vec<_>>()
    });
    Ok(reports
        .into_iter()
        .flat_map(|r| r.checks)
        .map(|c| (c.criterion, c.name, c.max_deviation, c.tolerance, c.passed))
        .collect())
}

#[pyfunction]
fn binary_entropy(t: f64) -> PyResult<f64> {
    gwregion::binary_entropy(t).map_err(to_py)
}

#[pyfunction]
fn binary_entropy_inv(y: f64) -> f64 {
    gwregion::binary_entropy_inv(y)
}

#[pyfunction]
fn binary_convolve(a: f64, b: f64) -> f64 {
    gwregion::binary_convolve(a, b)
}

#[pymodule]
fn gwregion_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<DsbsSource>()?;
    m.add_class::<GaussianSource>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(surface_rows, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy_inv, m)?)?;
    m.add_function(wrap_pyfunction!(binary_convolve, m)?)?;
    Ok(())
}
