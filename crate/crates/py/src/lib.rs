//! Python bindings. Results come back as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use serde_json::json;

use petersson::bessel::{bessel_j as bessel_eval, BesselRequest};
use petersson::experiments::{self, DiscreteMeasure, Reference};
use petersson::field::{FieldElement, TotallyRealField};
use petersson::ideals::PrincipalIdeal;
use petersson::kloosterman::{global_kloosterman, DEFAULT_PAIR_BUDGET};
use petersson::lattice::box_set;
use petersson::oracle::{self, parse_pairs, DEFAULT_PAIRS};
use petersson::traceformula::{geometric_side as geom_eval, GeometricSideInput, TailOptions, WeightVector};

fn err(e: petersson::Error) -> PyErr {
    match e {
        petersson::Error::Resource(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, x: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn field(d: i64) -> PyResult<TotallyRealField> {
    if d == 1 {
        Ok(TotallyRealField::rationals())
    } else {
        TotallyRealField::quadratic(d).map_err(err)
    }
}

fn elem(f: &TotallyRealField, s: &str) -> PyResult<FieldElement> {
    f.parse_element(s).map_err(err)
}

fn scaled(f: &TotallyRealField, m: &str, times_dinv: bool) -> PyResult<FieldElement> {
    let m = elem(f, m)?;
    if !times_dinv {
        return Ok(m);
    }
    let dinv = f.inv(f.different_generator()).map_err(err)?;
    Ok(f.mul(&m, &dinv))
}

/// Discriminant, unit and different of `Q(sqrt d)` (`d = 1` for `Q`).
#[pyfunction]
fn field_info(py: Python<'_>, d: i64) -> PyResult<Py<PyAny>> {
    let f = field(d)?;
    let v = json!({
        "r": f.degree(),
        "d": d,
        "discriminant": f.discriminant(),
        "fundamental_unit": f.fundamental_unit().map(|u| u.to_string()),
        "fundamental_unit_norm": f.unit_norm(),
        "different_generator": f.different_generator().to_string(),
    });
    to_py(py, &v)
}

/// Shortest vectors and box set of the principal ideal `(gen)`.
#[pyfunction]
fn shortest_vector(py: Python<'_>, d: i64, gen: &str) -> PyResult<Py<PyAny>> {
    let f = field(d)?;
    let g = elem(&f, gen)?;
    let bs = box_set(&f, &PrincipalIdeal::new(&f, &g).map_err(err)?);
    let names = |v: &[FieldElement]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    to_py(py, &json!({ "delta_sq": bs.delta_sq.to_string(), "box": names(&bs.a), "minimizers": names(&bs.minimizers) }))
}

/// `J_order(x)` with its error estimate.
#[pyfunction]
fn bessel_j(py: Python<'_>, order: u32, x: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &bessel_eval(&BesselRequest::new(order, x)).map_err(err)?)
}

/// Kloosterman sum `S(m1, m2; n; c)`; the integer value when it is rational.
#[pyfunction]
#[pyo3(signature = (d, m1, m2, n, c, times_dinv = false, pair_budget = DEFAULT_PAIR_BUDGET))]
fn kloosterman(
    py: Python<'_>,
    d: i64,
    m1: &str,
    m2: &str,
    n: &str,
    c: &str,
    times_dinv: bool,
    pair_budget: u64,
) -> PyResult<Py<PyAny>> {
    let f = field(d)?;
    let (m1, m2) = (scaled(&f, m1, times_dinv)?, scaled(&f, m2, times_dinv)?);
    let s = global_kloosterman(&f, &m1, &m2, &elem(&f, n)?, &elem(&f, c)?, pair_budget).map_err(err)?;
    to_py(
        py,
        &json!({ "re": s.approx.re, "im": s.approx.im, "err": s.err, "exact_integer": s.as_integer(), "exact_zero": s.is_zero_exact() }),
    )
}

/// Geometric side for the weight vector `k`.
#[pyfunction]
#[pyo3(signature = (d, k, m1 = "1", m2 = "1", level = "1", hecke = "1", times_dinv = false))]
fn geometric_side(
    py: Python<'_>,
    d: i64,
    k: Vec<u32>,
    m1: &str,
    m2: &str,
    level: &str,
    hecke: &str,
    times_dinv: bool,
) -> PyResult<Py<PyAny>> {
    let f = field(d)?;
    let input = GeometricSideInput {
        level: elem(&f, level)?,
        hecke: elem(&f, hecke)?,
        m1: scaled(&f, m1, times_dinv)?,
        m2: scaled(&f, m2, times_dinv)?,
        k: WeightVector::new(k).map_err(err)?,
        field: f,
    };
    to_py(py, &geom_eval(&input, &TailOptions::default()).map_err(err)?)
}

/// Weights whose box-term arguments sit in the transition window.
#[pyfunction]
#[pyo3(signature = (d, p, ls, s = 1))]
fn weight_schedule(py: Python<'_>, d: i64, p: i64, ls: Vec<u32>, s: i64) -> PyResult<Py<PyAny>> {
    let f = field(d)?;
    to_py(py, &experiments::weight_schedule(&f, s, p, &ls).map_err(err)?)
}

/// Geometric side along the weight schedule, one row per accepted `l`.
#[pyfunction]
#[pyo3(signature = (d, p, ls, s = 1))]
fn decay_sweep(py: Python<'_>, d: i64, p: i64, ls: Vec<u32>, s: i64) -> PyResult<Py<PyAny>> {
    let f = field(d)?;
    let sched = experiments::weight_schedule(&f, s, p, &ls).map_err(err)?;
    to_py(py, &experiments::decay_sweep(&f, &sched, &TailOptions::default()).map_err(err)?)
}

/// Level-one ratio test; `pairs` like `"(1,1),(2,3)"`.
#[pyfunction]
#[pyo3(signature = (k = 12, pairs = None))]
fn ratio_test(py: Python<'_>, k: u32, pairs: Option<&str>) -> PyResult<Py<PyAny>> {
    let pairs = match pairs {
        Some(s) => parse_pairs(s).map_err(err)?,
        None => DEFAULT_PAIRS.to_vec(),
    };
    to_py(py, &oracle::petersson_ratio_test(k, &pairs).map_err(err)?)
}

/// Kolmogorov distance of `(x, w)` atoms to Sato-Tate, or to `mu_p` when `p` is given.
#[pyfunction]
#[pyo3(signature = (atoms, p = None, normalize = false))]
fn discrepancy(atoms: Vec<(f64, f64)>, p: Option<f64>, normalize: bool) -> PyResult<f64> {
    let mut nu = DiscreteMeasure::new(atoms).map_err(err)?;
    if normalize {
        nu = nu.normalized().map_err(err)?;
    }
    let reference = match p {
        Some(p) => Reference::MuP(p),
        None => Reference::SatoTate,
    };
    Ok(experiments::discrepancy(&nu, reference))
}

/// Coefficients `a(1..=n)` of the level-one normalized cusp form of weight `k`.
#[pyfunction]
#[pyo3(signature = (n, k = 12))]
fn cusp_coefficients(py: Python<'_>, n: usize, k: u32) -> PyResult<Vec<Py<PyAny>>> {
    let q = oracle::cusp_form_coefficients(k, n).map_err(err)?;
    let int = py.import("builtins")?.getattr("int")?;
    q.coeffs.iter().map(|c| Ok(int.call1((c.to_string(),))?.unbind())).collect()
}

#[pymodule]
#[pyo3(name = "petersson")]
fn petersson_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(field_info, m)?)?;
    m.add_function(wrap_pyfunction!(shortest_vector, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(kloosterman, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_side, m)?)?;
    m.add_function(wrap_pyfunction!(weight_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(decay_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_test, m)?)?;
    m.add_function(wrap_pyfunction!(discrepancy, m)?)?;
    m.add_function(wrap_pyfunction!(cusp_coefficients, m)?)?;
    Ok(())
}
