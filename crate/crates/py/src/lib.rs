//! Python bindings: surfaces, height tables, return-map orbits, exact and
//! Monte-Carlo box counts, and the weak-mixing criterion report.
//!
//! Exact inputs are taken as strings (`"3/4"`, `"1/2+1/2*sqrt(5)"`), or as
//! anything whose `str()` parses that way. Structured results come back as
//! plain dicts.

use std::sync::Arc;

use horobcz_core::counting::{
    exact_expected_count, mc_expected_count, second_moment_mc, BoxRegion, CountingReport, CountingSetup,
};
use horobcz_core::lattice::{enumerate_orbit, estimate_c_omega, weighted_height_sum, HeightTable};
use horobcz_core::section::{bcz_classical, SectionDynamics, SectionPoint};
use horobcz_core::weakmix::{run_criterion_report, HarnessConfig};
use horobcz_core::{Error, QuadVal, Rational, Scalar, SurfaceModel};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

const SECTION_COVER: i64 = 16;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::FieldTag(_)
        | Error::Parse(_)
        | Error::Preset(_)
        | Error::UndersizedWindow(_)
        | Error::NotHorizontallyShort(_)
        | Error::Domain(_)
        | Error::Hypothesis(_) => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn quad(x: &Bound<'_, PyAny>) -> PyResult<QuadVal> {
    let text = x.str()?.to_string();
    text.trim()
        .parse()
        .map_err(|e: Error| PyValueError::new_err(format!("cannot read {text:?} as an exact number: {e}")))
}

/// Any serializable value as a Python object, through `json.loads`.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(frozen, name = "Surface", module = "horobcz")]
struct PySurface {
    inner: Arc<SurfaceModel>,
}

#[pymethods]
impl PySurface {
    /// Built-in preset by name: torus, golden-l, hecke-sqrt2.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(PySurface { inner: SurfaceModel::preset(name).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySurface { inner: SurfaceModel::from_json(text).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_path(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PySurface { inner: SurfaceModel::from_path(&path).map_err(py_err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    /// Width of the parabolic generator, as a float.
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha_f64()
    }

    #[getter]
    fn alpha_exact(&self) -> String {
        self.inner.alpha.to_string()
    }

    fn to_json(&self) -> PyResult<String> {
        let file = self.inner.to_preset().map_err(py_err)?;
        serde_json::to_string_pretty(&file).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Surface({:?}, alpha={})", self.inner.name, self.inner.alpha)
    }
}

#[pyclass(frozen, name = "HeightTable", module = "horobcz")]
struct PyHeightTable {
    inner: HeightTable,
}

#[pymethods]
impl PyHeightTable {
    #[new]
    fn new(py: Python<'_>, surface: &PySurface, cutoff: &Bound<'_, PyAny>) -> PyResult<Self> {
        let cutoff = quad(cutoff)?;
        let s = surface.inner.clone();
        let inner = py.detach(|| HeightTable::compute(&s, &cutoff)).map_err(py_err)?;
        Ok(PyHeightTable { inner })
    }

    #[getter]
    fn heights(&self) -> Vec<f64> {
        self.inner.heights_f64()
    }

    #[getter]
    fn heights_exact(&self) -> Vec<String> {
        self.inner.heights.iter().map(QuadVal::to_string).collect()
    }

    #[getter]
    fn phi(&self) -> Vec<u64> {
        self.inner.phi.clone()
    }

    /// `φ(j)`, or 0 when `j` is not a height.
    fn phi_of(&self, j: &Bound<'_, PyAny>) -> PyResult<u64> {
        Ok(self.inner.phi_of(&quad(j)?))
    }

    fn c_omega(&self) -> f64 {
        estimate_c_omega(&self.inner)
    }

    /// Weighted height sum; approaches `2 c_ω` as the cutoff grows.
    fn weighted_sum(&self) -> f64 {
        weighted_height_sum(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

enum Dynamics {
    Float(SectionDynamics<f64>),
    Exact(SectionDynamics<QuadVal>),
}

/// Return map to the horizontal section, in floating point or exact arithmetic.
#[pyclass(frozen, name = "Section", module = "horobcz")]
struct PySection {
    dynamics: Dynamics,
}

fn orbit_rows<'py, S: Scalar + std::fmt::Display>(
    py: Python<'py>,
    dynamics: &SectionDynamics<S>,
    p: SectionPoint<S>,
    steps: usize,
    exact: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let trace = py.detach(|| dynamics.orbit(&p, steps)).map_err(py_err)?;
    trace
        .records
        .iter()
        .zip(&trace.cumulative_times)
        .enumerate()
        .map(|(i, (r, c))| {
            let row = PyDict::new(py);
            row.set_item("step", i + 1)?;
            row.set_item("s", r.next.s.to_f64())?;
            row.set_item("t", r.next.t.to_f64())?;
            row.set_item("return_time", r.return_time.to_f64())?;
            row.set_item("cum_time", c.to_f64())?;
            if exact {
                row.set_item("s_exact", r.next.s.to_string())?;
                row.set_item("t_exact", r.next.t.to_string())?;
                row.set_item("return_time_exact", r.return_time.to_string())?;
            }
            Ok(row)
        })
        .collect()
}

#[pymethods]
impl PySection {
    #[new]
    #[pyo3(signature = (surface, exact = false))]
    fn new(surface: &PySurface, exact: bool) -> PyResult<Self> {
        let cover = QuadVal::int(SECTION_COVER);
        let dynamics = if exact {
            Dynamics::Exact(SectionDynamics::new(&surface.inner, &cover).map_err(py_err)?)
        } else {
            Dynamics::Float(SectionDynamics::new(&surface.inner, &cover).map_err(py_err)?)
        };
        Ok(PySection { dynamics })
    }

    #[getter]
    fn exact(&self) -> bool {
        matches!(self.dynamics, Dynamics::Exact(_))
    }

    /// One return from `(s, t)` at `level`: a dict with the next point and the
    /// return time.
    #[pyo3(signature = (s, t, level = None))]
    fn return_map<'py>(
        &self,
        py: Python<'py>,
        s: &Bound<'py, PyAny>,
        t: &Bound<'py, PyAny>,
        level: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mut rows = self.orbit(py, s, t, 1, level)?;
        Ok(rows.remove(0))
    }

    #[pyo3(signature = (s, t, steps, level = None))]
    fn orbit<'py>(
        &self,
        py: Python<'py>,
        s: &Bound<'py, PyAny>,
        t: &Bound<'py, PyAny>,
        steps: usize,
        level: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let (s, t) = (quad(s)?, quad(t)?);
        let h = level.map(quad).transpose()?.unwrap_or_else(QuadVal::one);
        match &self.dynamics {
            Dynamics::Exact(d) => {
                let p = d.point(s, t, h).map_err(py_err)?;
                orbit_rows(py, d, p, steps, true)
            }
            Dynamics::Float(d) => {
                let p = d.point(s.to_f64(), t.to_f64(), h.to_f64()).map_err(py_err)?;
                orbit_rows(py, d, p, steps, false)
            }
        }
    }
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    SurfaceModel::builtin_names().collect()
}

/// Window vectors `(x, y)` as exact strings, sorted by `(y, x)`.
#[pyfunction]
#[pyo3(signature = (surface, y_max, x_max = None))]
fn enumerate_window(
    py: Python<'_>,
    surface: &PySurface,
    y_max: &Bound<'_, PyAny>,
    x_max: Option<&Bound<'_, PyAny>>,
) -> PyResult<Vec<(String, String)>> {
    let y_max = quad(y_max)?;
    let x_max = match x_max {
        Some(x) => quad(x)?,
        None => &surface.inner.alpha * &y_max,
    };
    let s = surface.inner.clone();
    let window = py.detach(|| enumerate_orbit(&s, &x_max, &y_max)).map_err(py_err)?;
    Ok(window.vectors().into_iter().map(|v| (v.x.to_string(), v.y.to_string())).collect())
}

/// The closed-form unit-square map on rationals.
#[pyfunction]
fn bcz(x: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>) -> PyResult<(String, String)> {
    let parse = |v: &Bound<'_, PyAny>| -> PyResult<Rational> {
        let text = v.str()?.to_string();
        text.trim()
            .parse()
            .map_err(|e: Error| PyValueError::new_err(format!("cannot read {text:?} as a rational: {e}")))
    };
    let (a, b) = bcz_classical(&parse(x)?, &parse(y)?).map_err(py_err)?;
    Ok((a.to_string(), b.to_string()))
}

/// Exact average box count over `{s ≥ s0}`, with a Monte-Carlo estimate when
/// `samples` and `seed` are given.
#[pyfunction]
#[pyo3(signature = (surface, s0, a, b, c, samples = None, seed = None))]
#[allow(clippy::too_many_arguments)]
fn expected_count<'py>(
    py: Python<'py>,
    surface: &PySurface,
    s0: &Bound<'py, PyAny>,
    a: &Bound<'py, PyAny>,
    b: &Bound<'py, PyAny>,
    c: &Bound<'py, PyAny>,
    samples: Option<u64>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let area = BoxRegion::new(quad(a)?, quad(b)?, quad(c)?).map_err(py_err)?;
    let setup = CountingSetup::new(&surface.inner, quad(s0)?, area).map_err(py_err)?;
    let mc = match (samples, seed) {
        (Some(n), Some(seed)) => Some(py.detach(|| mc_expected_count(&setup, n, seed)).map_err(py_err)?),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("samples and seed go together")),
    };
    let report = CountingReport::new(&setup, exact_expected_count(&setup), mc);
    to_py(py, &report)
}

/// Monte-Carlo second moment of box counts, one row per β.
#[pyfunction]
#[pyo3(signature = (surface, betas, seed, a = 0.99, s0 = 0.5, samples = 200_000))]
fn second_moment<'py>(
    py: Python<'py>,
    surface: &PySurface,
    betas: Vec<f64>,
    seed: u64,
    a: f64,
    s0: f64,
    samples: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let s = surface.inner.clone();
    let m = py.detach(|| second_moment_mc(&s, s0, &betas, a, samples, seed)).map_err(py_err)?;
    to_py(py, &m)
}

/// Full weak-mixing criterion run.
#[pyfunction]
#[pyo3(signature = (surface, seed, a = 0.99, beta = 0.1, s0 = 0.5, samples = 100_000))]
fn criterion_report<'py>(
    py: Python<'py>,
    surface: &PySurface,
    seed: u64,
    a: f64,
    beta: f64,
    s0: f64,
    samples: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let config = HarnessConfig { a, beta, s0, samples, seed, ..HarnessConfig::default() };
    let s = surface.inner.clone();
    let report = py.detach(|| run_criterion_report(&s, &config)).map_err(py_err)?;
    let out = to_py(py, &report)?;
    out.set_item("summary", report.summary())?;
    Ok(out)
}

#[pymodule]
fn horobcz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySurface>()?;
    m.add_class::<PyHeightTable>()?;
    m.add_class::<PySection>()?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_window, m)?)?;
    m.add_function(wrap_pyfunction!(bcz, m)?)?;
    m.add_function(wrap_pyfunction!(expected_count, m)?)?;
    m.add_function(wrap_pyfunction!(second_moment, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_report, m)?)?;
    Ok(())
}
