//! Python bindings. Mixing laws, constraints, and certificate
//! specifications cross the boundary as JSON strings matching the Rust
//! serde representations; structured results come back as plain Python
//! dicts and lists.

#![forbid(unsafe_code)]

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use mixapprox::approx::{
    gauss_quadrature as core_gauss_quadrature, local_moment_match as core_local_moment_match,
    truncate_and_match as core_truncate_and_match, upper_bound_envelope, ApproxConfig,
    EnvelopeFamily,
};
use mixapprox::certify::{
    closed_form_lb as core_closed_form_lb, default_delta_grid, inapprox_bound as core_inapprox,
    tv_certificate as core_tv_certificate, weighted_hankel_lb as core_weighted_hankel,
    ClosedFormSpec, EigenRoute, InapproxFamily,
};
use mixapprox::mixture::{divergence as core_divergence, DivergenceKind};
use mixapprox::npmle::{
    epsilon_n as core_epsilon_n, npmle_fit as core_npmle_fit, rate_scan as core_rate_scan,
    Constraint, NpmleProblem, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
use mixapprox::{Error, MixingLaw, PrecisionMode};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Validation(_) | Error::Unsupported(_) | Error::OutOfRegime(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse<T: serde::de::DeserializeOwned>(what: &str, json: &str) -> PyResult<T> {
    serde_json::from_str(json)
        .map_err(|e| PyValueError::new_err(format!("invalid {what} JSON: {e}")))
}

fn value_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<PyObject> {
    Ok(match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_py(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py(py)
            }
        }
        serde_json::Value::String(s) => s.into_py(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty_bound(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_py(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new_bound(py);
            for (k, val) in map {
                dict.set_item(k, value_to_py(py, val)?)?;
            }
            dict.into_py(py)
        }
    })
}

fn serialize_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let v = serde_json::to_value(value)
        .map_err(|e| PyRuntimeError::new_err(format!("serialization failed: {e}")))?;
    value_to_py(py, &v)
}

fn precision_mode(extended: bool) -> PrecisionMode {
    if extended {
        PrecisionMode::Extended
    } else {
        PrecisionMode::Double
    }
}

/// Raw and even moments of a mixing law described by a JSON object.
#[pyfunction]
#[pyo3(signature = (law, k, extended = false))]
fn law_moment(law: &str, k: u32, extended: bool) -> PyResult<f64> {
    let law: MixingLaw = parse("mixing law", law)?;
    law.moment(k, precision_mode(extended))
        .map(|m| m)
        .map_err(to_py_err)
}

/// Gauss quadrature rule of order m: returns (nodes, weights).
#[pyfunction]
#[pyo3(signature = (law, m, extended = false))]
fn gauss_quadrature(law: &str, m: u32, extended: bool) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let law: MixingLaw = parse("mixing law", law)?;
    let rule = core_gauss_quadrature(&law, m, precision_mode(extended)).map_err(to_py_err)?;
    Ok((rule.nodes, rule.weights))
}

/// m-atomic law matching 2m - 1 moments of `law` restricted to
/// [-half, half], built cellwise: returns (atoms, weights).
#[pyfunction]
fn local_moment_match(law: &str, half: f64, m: u32) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let law: MixingLaw = parse("mixing law", law)?;
    let atomic = core_local_moment_match(&law, half, m).map_err(to_py_err)?;
    Ok((atomic.atoms, atomic.weights))
}

/// Truncate a tail family at its regime radius and moment-match:
/// returns {"atoms", "weights", "half_width"}.
#[pyfunction]
fn truncate_and_match(py: Python<'_>, law: &str, m: u32) -> PyResult<PyObject> {
    let law: MixingLaw = parse("mixing law", law)?;
    let (atomic, half) =
        core_truncate_and_match(&law, m, &ApproxConfig::default()).map_err(to_py_err)?;
    let dict = PyDict::new_bound(py);
    dict.set_item("atoms", atomic.atoms)?;
    dict.set_item("weights", atomic.weights)?;
    dict.set_item("half_width", half)?;
    Ok(dict.into_py(py))
}

/// Divergence between the Gaussian mixtures of two mixing laws.
/// `kind` is one of "tv", "h2", "kl", "chi2"; for the last two the
/// second law is the reference. Returns {"value", "abs_err"}.
#[pyfunction]
fn divergence(py: Python<'_>, kind: &str, p: &str, q: &str) -> PyResult<PyObject> {
    let kind: DivergenceKind = parse("divergence kind", &format!("\"{kind}\""))?;
    let p: MixingLaw = parse("mixing law", p)?;
    let q: MixingLaw = parse("mixing law", q)?;
    let d = core_divergence(kind, &p, &q).map_err(to_py_err)?;
    let dict = PyDict::new_bound(py);
    dict.set_item("value", d.value)?;
    dict.set_item("abs_err", d.abs_err)?;
    Ok(dict.into_py(py))
}

/// Certified lower bound on the total variation distance from the
/// mixture of `law` to any mixture with an m-atomic mixing law.
/// `deltas` overrides the spacing grid; `route` is "direct", "wrapped",
/// or "ortho". Returns the certificate as a dict.
#[pyfunction]
#[pyo3(signature = (law, m, deltas = None, route = "direct"))]
fn tv_certificate(
    py: Python<'_>,
    law: &str,
    m: u32,
    deltas: Option<Vec<f64>>,
    route: &str,
) -> PyResult<PyObject> {
    let law: MixingLaw = parse("mixing law", law)?;
    let route: EigenRoute = parse("route", &format!("\"{route}\""))?;
    let grid = deltas.unwrap_or_else(|| default_delta_grid(None));
    let cert = core_tv_certificate(&law, m, &grid, route).map_err(to_py_err)?;
    serialize_to_py(py, &cert)
}

/// Closed-form lower bound; `spec` is a JSON certificate specification
/// object. Returns the certificate as a dict.
#[pyfunction]
fn closed_form_lb(py: Python<'_>, spec: &str) -> PyResult<PyObject> {
    let spec: ClosedFormSpec = parse("closed-form spec", spec)?;
    let cert = core_closed_form_lb(spec).map_err(to_py_err)?;
    serialize_to_py(py, &cert)
}

/// Lower bound showing a single scaled family member is hard to
/// approximate; `family` is a JSON family object.
#[pyfunction]
fn inapprox_bound(family: &str, m: u32) -> PyResult<f64> {
    let family: InapproxFamily = parse("family", family)?;
    core_inapprox(family, m).map_err(to_py_err)
}

/// Weighted Hankel lower bound for the bounded class on [-M, M];
/// returns the certificate as a dict.
#[pyfunction]
#[pyo3(signature = (m_halfwidth, m, extended = false))]
fn weighted_hankel_lb(
    py: Python<'_>,
    m_halfwidth: f64,
    m: u32,
    extended: bool,
) -> PyResult<PyObject> {
    let cert =
        core_weighted_hankel(m_halfwidth, m, precision_mode(extended)).map_err(to_py_err)?;
    serialize_to_py(py, &cert)
}

/// Upper-bound envelope for a class of mixing laws; `family` is a JSON
/// envelope family object. Returns {"value", "log_value"}.
#[pyfunction]
fn envelope(py: Python<'_>, family: &str, m: u32) -> PyResult<PyObject> {
    let family: EnvelopeFamily = parse("envelope family", family)?;
    let env = upper_bound_envelope(family, m, &ApproxConfig::default()).map_err(to_py_err)?;
    serialize_to_py(py, &env)
}

/// Fit the nonparametric MLE of the mixing law from a sample under a
/// support constraint (JSON object). Returns a dict with the grid,
/// weights, pruned atoms, log-likelihood, and diagnostics.
#[pyfunction]
#[pyo3(signature = (sample, constraint, max_iters = DEFAULT_MAX_ITERS, tol = DEFAULT_TOL))]
fn npmle_fit(
    py: Python<'_>,
    sample: Vec<f64>,
    constraint: &str,
    max_iters: u32,
    tol: f64,
) -> PyResult<PyObject> {
    let constraint: Constraint = parse("constraint", constraint)?;
    let problem = NpmleProblem::new(sample, constraint).map_err(to_py_err)?;
    let fit = core_npmle_fit(&problem, max_iters, tol).map_err(to_py_err)?;
    let law = fit.mixing_law(&problem.grid).map_err(to_py_err)?;
    let dict = PyDict::new_bound(py);
    dict.set_item("grid", problem.grid)?;
    dict.set_item("weights", fit.weights.clone())?;
    dict.set_item("mixing_law", serialize_to_py(py, &law)?)?;
    dict.set_item("log_likelihood", fit.log_likelihood)?;
    dict.set_item("iterations", fit.iterations)?;
    dict.set_item("gradient_slack", fit.gradient_slack)?;
    Ok(dict.into_py(py))
}

/// Monte Carlo scan of the NPMLE Hellinger error across sample sizes.
/// Returns {"rows", "summary"} with per-replicate and per-n records.
#[pyfunction]
#[pyo3(signature = (truth, constraint, n_list, replicates, seed = 0))]
fn rate_scan(
    py: Python<'_>,
    truth: &str,
    constraint: &str,
    n_list: Vec<usize>,
    replicates: u32,
    seed: u64,
) -> PyResult<PyObject> {
    let truth: MixingLaw = parse("mixing law", truth)?;
    let constraint: Constraint = parse("constraint", constraint)?;
    let scan =
        core_rate_scan(&truth, constraint, &n_list, replicates, seed).map_err(to_py_err)?;
    serialize_to_py(py, &scan)
}

/// Benchmark accuracy level for the NPMLE under a bounded constraint.
#[pyfunction]
fn epsilon_n(n: usize, m_halfwidth: f64) -> f64 {
    core_epsilon_n(n, m_halfwidth)
}

#[pymodule]
fn mixapprox_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(law_moment, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(local_moment_match, m)?)?;
    m.add_function(wrap_pyfunction!(truncate_and_match, m)?)?;
    m.add_function(wrap_pyfunction!(divergence, m)?)?;
    m.add_function(wrap_pyfunction!(tv_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_lb, m)?)?;
    m.add_function(wrap_pyfunction!(inapprox_bound, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_hankel_lb, m)?)?;
    m.add_function(wrap_pyfunction!(envelope, m)?)?;
    m.add_function(wrap_pyfunction!(npmle_fit, m)?)?;
    m.add_function(wrap_pyfunction!(rate_scan, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_n, m)?)?;
    Ok(())
}
