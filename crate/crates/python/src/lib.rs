//! Python bindings: the main types and operations of the nbubble crate.
//!
//! Report-shaped results come back as JSON strings (parse with `json.loads`);
//! configurations and move outcomes are proper classes.

use nbubble::{flow, json, moves, oracle, render, solver};
use nbubble::{Density, MassVector, RegionId};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: nbubble::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mass_vector(mut masses: Vec<f64>) -> PyResult<MassVector> {
    masses.sort_by(f64::total_cmp);
    MassVector::new(masses).map_err(err)
}

/// A labeled-interval configuration under density |x|.
#[pyclass(name = "Configuration", from_py_object)]
#[derive(Clone)]
struct PyConfiguration {
    inner: nbubble::Configuration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(breakpoints: Vec<f64>, cells: Vec<Option<usize>>, n: usize) -> PyResult<Self> {
        let cells = cells.into_iter().map(|c| c.map(RegionId)).collect();
        let inner = nbubble::Configuration::new(breakpoints, cells, n).map_err(err)?;
        Ok(PyConfiguration { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (_, inner) = json::configuration_from_json(text).map_err(err)?;
        Ok(PyConfiguration { inner })
    }

    fn to_json(&self) -> String {
        json::configuration_to_json(Density::AbsoluteValue, &self.inner)
    }

    #[getter]
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints().to_vec()
    }

    #[getter]
    fn cells(&self) -> Vec<Option<usize>> {
        self.inner.cells().iter().map(|c| c.map(|r| r.0)).collect()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn perimeter(&self) -> f64 {
        self.inner.total_perimeter(Density::AbsoluteValue)
    }

    fn region_mass(&self, r: usize) -> f64 {
        self.inner.region_mass(Density::AbsoluteValue, RegionId(r))
    }

    fn region_masses(&self) -> Vec<f64> {
        self.inner.region_masses(Density::AbsoluteValue)
    }

    fn is_condensed(&self) -> bool {
        self.inner.is_condensed()
    }

    fn canonicalize(&self) -> PyConfiguration {
        PyConfiguration {
            inner: self.inner.canonicalize(Density::AbsoluteValue),
        }
    }

    fn render_svg(&self) -> PyResult<String> {
        let spec = render::RenderSpec::new(self.inner.clone());
        render::render_svg(&spec).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Configuration(n={}, cells={}, perimeter={:.6})",
            self.inner.n(),
            self.inner.cell_count(),
            self.perimeter()
        )
    }
}

/// Outcome of one perimeter-reducing move.
#[pyclass(name = "MoveOutcome")]
struct PyMoveOutcome {
    #[pyo3(get)]
    kind: String,
    #[pyo3(get)]
    before: PyConfiguration,
    #[pyo3(get)]
    after: PyConfiguration,
    #[pyo3(get)]
    perimeter_delta: f64,
    #[pyo3(get)]
    strict: bool,
}

impl From<moves::MoveReport> for PyMoveOutcome {
    fn from(r: moves::MoveReport) -> Self {
        PyMoveOutcome {
            kind: r.kind.tag().to_string(),
            before: PyConfiguration { inner: r.before },
            after: PyConfiguration { inner: r.after },
            perimeter_delta: r.perimeter_delta,
            strict: r.strict,
        }
    }
}

/// Solve the n-bubble problem; returns the Solution JSON string.
#[pyfunction]
fn solve(masses: Vec<f64>) -> PyResult<String> {
    let masses = mass_vector(masses)?;
    let s = solver::solve(Density::AbsoluteValue, &masses).map_err(err)?;
    Ok(json::solution_to_json(Density::AbsoluteValue, &s))
}

/// Solve and return the configuration object directly.
#[pyfunction]
fn solve_configuration(masses: Vec<f64>) -> PyResult<PyConfiguration> {
    let masses = mass_vector(masses)?;
    let s = solver::solve(Density::AbsoluteValue, &masses).map_err(err)?;
    Ok(PyConfiguration { inner: s.config })
}

/// Brute-force oracle minimum; returns the OracleResult JSON string.
#[pyfunction]
#[pyo3(signature = (masses, allow_split = false))]
fn brute_force_min(masses: Vec<f64>, allow_split: bool) -> PyResult<String> {
    let masses = mass_vector(masses)?;
    let res = oracle::brute_force_min(Density::AbsoluteValue, &masses, allow_split).map_err(err)?;
    Ok(json::oracle_result_to_json(&res))
}

#[pyfunction]
fn condense(c: &PyConfiguration) -> PyResult<PyMoveOutcome> {
    moves::condense(Density::AbsoluteValue, &c.inner)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn transpose_adjacent(
    c: &PyConfiguration,
    shared_breakpoint_index: usize,
) -> PyResult<PyMoveOutcome> {
    moves::transpose_adjacent(Density::AbsoluteValue, &c.inner, shared_breakpoint_index)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn mass_steal_outer(c: &PyConfiguration, side: &str) -> PyResult<PyMoveOutcome> {
    let side = match side {
        "left" => moves::Side::Left,
        "right" => moves::Side::Right,
        other => {
            return Err(PyValueError::new_err(format!(
                "side must be left or right, got {other:?}"
            )))
        }
    };
    moves::mass_steal_outer(Density::AbsoluteValue, &c.inner, side)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn detect_pattern(c: &PyConfiguration, a: usize, b: usize) -> PyResult<String> {
    moves::detect_pattern(&c.inner, RegionId(a), RegionId(b))
        .map(|p| {
            match p {
                moves::PatternKind::Alternating => "alternating",
                moves::PatternKind::Nested => "nested",
                moves::PatternKind::Ordered => "ordered",
            }
            .to_string()
        })
        .map_err(err)
}

#[pyfunction]
fn siphon_alternating(c: &PyConfiguration, a: usize, b: usize) -> PyResult<PyMoveOutcome> {
    moves::siphon_alternating(Density::AbsoluteValue, &c.inner, RegionId(a), RegionId(b))
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn slide_nested_origin(c: &PyConfiguration, a: usize, b: usize) -> PyResult<PyMoveOutcome> {
    moves::slide_nested_origin(Density::AbsoluteValue, &c.inner, RegionId(a), RegionId(b))
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn slide_origin_to_endpoint(c: &PyConfiguration) -> PyResult<PyMoveOutcome> {
    moves::slide_origin_to_endpoint(Density::AbsoluteValue, &c.inner)
        .map(Into::into)
        .map_err(err)
}

/// Run the whole reduction strategy; returns (configuration, outcomes).
#[pyfunction]
fn reduce_to_candidate(c: &PyConfiguration) -> PyResult<(PyConfiguration, Vec<PyMoveOutcome>)> {
    let (fixed, reports) =
        moves::reduce_to_candidate(Density::AbsoluteValue, &c.inner).map_err(err)?;
    Ok((
        PyConfiguration { inner: fixed },
        reports.into_iter().map(Into::into).collect(),
    ))
}

/// Perimeter rate `sum 1/x_i` when the given breakpoints drag right.
#[pyfunction]
fn first_variation_rate(c: &PyConfiguration, moving: Vec<usize>) -> PyResult<f64> {
    flow::first_variation_rate(&c.inner, &moving).map_err(err)
}

/// Perimeter acceleration `sum -1/|x_i|^3`.
#[pyfunction]
fn second_variation_rate(c: &PyConfiguration, moving: Vec<usize>) -> PyResult<f64> {
    flow::second_variation_rate(&c.inner, &moving).map_err(err)
}

/// Integrate an endpoint flow; returns the CSV trace as a string.
#[pyfunction]
#[pyo3(signature = (c, moving, directions, dt_max = 1e-3, min_gap = 1e-9, max_time = f64::INFINITY))]
fn integrate_flow(
    c: &PyConfiguration,
    moving: Vec<usize>,
    directions: Vec<f64>,
    dt_max: f64,
    min_gap: f64,
    max_time: f64,
) -> PyResult<String> {
    let spec = flow::FlowSpec::new(
        c.inner.clone(),
        moving,
        directions,
        flow::StopRule { min_gap, max_time },
    )
    .map_err(err)?;
    let trace = flow::integrate_flow(Density::AbsoluteValue, &spec, dt_max).map_err(err)?;
    Ok(trace.to_csv(spec.config.n()))
}

/// Exhaustive framework verification; returns the report JSON string.
#[pyfunction]
fn verify_framework(masses: Vec<f64>, shape: (usize, usize)) -> PyResult<String> {
    let mut masses = masses;
    masses.sort_by(f64::total_cmp);
    let rep = oracle::verify_framework(Density::AbsoluteValue, &masses, shape).map_err(err)?;
    Ok(json::framework_report_to_json(&rep))
}

/// Randomized conjecture scan; returns the report JSON string.
#[pyfunction]
#[pyo3(signature = (n, trials = 100, seed = 0))]
fn conjecture_scan(n: usize, trials: usize, seed: u64) -> PyResult<String> {
    let rep = oracle::conjecture_scan(Density::AbsoluteValue, n, trials, seed).map_err(err)?;
    Ok(json::conjecture_report_to_json(&rep))
}

#[pymodule]
fn nbubble_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyMoveOutcome>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_configuration, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_min, m)?)?;
    m.add_function(wrap_pyfunction!(condense, m)?)?;
    m.add_function(wrap_pyfunction!(transpose_adjacent, m)?)?;
    m.add_function(wrap_pyfunction!(mass_steal_outer, m)?)?;
    m.add_function(wrap_pyfunction!(detect_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(siphon_alternating, m)?)?;
    m.add_function(wrap_pyfunction!(slide_nested_origin, m)?)?;
    m.add_function(wrap_pyfunction!(slide_origin_to_endpoint, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_to_candidate, m)?)?;
    m.add_function(wrap_pyfunction!(first_variation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(second_variation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_flow, m)?)?;
    m.add_function(wrap_pyfunction!(verify_framework, m)?)?;
    m.add_function(wrap_pyfunction!(conjecture_scan, m)?)?;
    Ok(())
}
