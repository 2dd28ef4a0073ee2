//! Python bindings. Structured values (charts, grids, reports, configs) cross the boundary
//! as plain dicts and lists with the same layout as the JSON files the CLI writes.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use cfh_core::flow::{self, IntegratorConfig, LeafChart};
use cfh_core::geometry::{self, FramePose, ImmersionGrid, ImmersionOptions};
use cfh_core::grid::GridSpec;
use cfh_core::oracles::{self, ConeSpec};
use cfh_core::variety::{self, Axis, GroupElement, SampleRegion, SolveFor, State, VarietyPoint};
use cfh_core::verify::{self, Tolerances};
use cfh_core::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidIndex(_)
        | Error::OffVariety { .. }
        | Error::InfeasibleSample { .. }
        | Error::DegenerateBranch { .. }
        | Error::NonPositiveMetric { .. }
        | Error::GridMismatch(_)
        | Error::OutOfRange { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Round trip through Python's json module into a serde type.
fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn from_py_or_default<T: DeserializeOwned + Default>(obj: Option<&Bound<'_, PyAny>>) -> PyResult<T> {
    obj.map_or_else(|| Ok(T::default()), from_py)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn point(q: State) -> PyResult<VarietyPoint> {
    VarietyPoint::new(q).map_err(err)
}

fn axis(k: usize) -> PyResult<Axis> {
    Axis::try_from(k).map_err(err)
}

fn solve_for(name: &str) -> PyResult<SolveFor> {
    serde_json::from_value(serde_json::Value::String(name.to_string())).map_err(|_| PyValueError::new_err(format!("solve_for must be y1, y2, y3 or auto, got {name:?}")))
}

/// G at q = (x1, x2, x3, y1, y2, y3).
#[pyfunction]
fn eval_g(q: State) -> f64 {
    variety::eval_g(&q)
}

#[pyfunction]
fn eval_f(q: State) -> f64 {
    variety::eval_f(&q)
}

/// |F| / x1^12.
#[pyfunction]
fn f_relative(q: State) -> f64 {
    variety::f_relative(&q)
}

#[pyfunction]
fn grad_f(q: State) -> PyResult<State> {
    variety::grad_f(&q).map_err(err)
}

/// X_k at q, k in 1..=3.
#[pyfunction]
fn eval_x(k: usize, q: State) -> PyResult<State> {
    variety::eval_x(axis(k)?, &q).map_err(err)
}

#[pyfunction]
fn distance_to_singular(q: State) -> f64 {
    variety::distance_to_singular(&q)
}

#[pyfunction]
#[pyo3(signature = (x1, x3, y_free, solve_for = "auto", sign = 1.0))]
fn sample_point(x1: f64, x3: f64, y_free: [f64; 2], solve_for: &str, sign: f64) -> PyResult<State> {
    Ok(*variety::sample_point(x1, x3, y_free, self::solve_for(solve_for)?, sign).map_err(err)?.state())
}

/// `n` points drawn with a ChaCha8 generator seeded by `seed`.
#[pyfunction]
#[pyo3(signature = (n, seed, region = None))]
fn sample_points(n: usize, seed: u64, region: Option<&Bound<'_, PyAny>>) -> PyResult<Vec<State>> {
    use rand::SeedableRng;
    let region: SampleRegion = from_py_or_default(region)?;
    region.validate().map_err(err)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (pts, _) = region.draw_many(&mut rng, n, 100 * n.max(1));
    Ok(pts.iter().map(|p| *p.state()).collect())
}

/// All 16 group elements as dicts {"swap": bool, "signs": [s1, s2, s3]}.
#[pyfunction]
fn group_elements(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &GroupElement::all())
}

#[pyfunction]
fn apply_group(element: &Bound<'_, PyAny>, q: State) -> PyResult<State> {
    let g: GroupElement = from_py(element)?;
    g.apply(&q).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (q, k, t, config = None))]
fn flow_point(py: Python<'_>, q: State, k: usize, t: f64, config: Option<&Bound<'_, PyAny>>) -> PyResult<State> {
    let cfg: IntegratorConfig = from_py_or_default(config)?;
    let a = axis(k)?;
    py.detach(|| flow::flow_point(&q, a, t, &cfg)).map_err(err)
}

/// The sampled integral curve of X_k from q, as a dict.
#[pyfunction]
#[pyo3(signature = (q, k, t, config = None))]
fn integrate_flow<'py>(py: Python<'py>, q: State, k: usize, t: f64, config: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let cfg: IntegratorConfig = from_py_or_default(config)?;
    let (seed, a) = (point(q)?, axis(k)?);
    let path = py.detach(|| flow::integrate_flow(&seed, a, t, &cfg)).map_err(err)?;
    to_py(py, &path)
}

#[pyfunction]
#[pyo3(signature = (q, i, j, h, config = None))]
fn commutator_residual(py: Python<'_>, q: State, i: usize, j: usize, h: f64, config: Option<&Bound<'_, PyAny>>) -> PyResult<f64> {
    let cfg: IntegratorConfig = from_py_or_default(config)?;
    let (p, a, b) = (point(q)?, axis(i)?, axis(j)?);
    py.detach(|| flow::commutator_residual(&p, a, b, h, &cfg)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (seed, grid, config = None))]
fn build_chart<'py>(py: Python<'py>, seed: State, grid: &Bound<'py, PyAny>, config: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let grid: GridSpec = from_py(grid)?;
    let cfg: IntegratorConfig = from_py_or_default(config)?;
    let p = point(seed)?;
    let chart = py.detach(|| flow::build_chart(&p, &grid, &cfg)).map_err(err)?;
    to_py(py, &chart)
}

#[pyfunction]
fn transform_chart<'py>(py: Python<'py>, chart: &Bound<'py, PyAny>, element: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let chart: LeafChart = from_py(chart)?;
    let g: GroupElement = from_py(element)?;
    to_py(py, &flow::transform_chart(&chart, g).map_err(err)?)
}

/// Reconstructs the hypersurface over a chart. The integrator defaults to the chart's own.
#[pyfunction]
#[pyo3(signature = (chart, pose = None, config = None, flip_normal = false))]
fn integrate_immersion<'py>(
    py: Python<'py>,
    chart: &Bound<'py, PyAny>,
    pose: Option<&Bound<'py, PyAny>>,
    config: Option<&Bound<'py, PyAny>>,
    flip_normal: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let chart: LeafChart = from_py(chart)?;
    let pose: FramePose = from_py_or_default(pose)?;
    let cfg: IntegratorConfig = match config {
        Some(c) => from_py(c)?,
        None => chart.config,
    };
    let mut grid = py.detach(|| geometry::integrate_immersion(&chart, &pose, &cfg, ImmersionOptions { flip_normal })).map_err(err)?;
    grid.chart_id = Some(verify::content_id(&chart));
    to_py(py, &grid)
}

#[pyfunction]
fn cone_grid<'py>(py: Python<'py>, curvature: f64, grid: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let grid: GridSpec = from_py(grid)?;
    to_py(py, &oracles::cone_grid(&ConeSpec { curvature, grid }).map_err(err)?)
}

#[pyfunction]
fn cone_chart<'py>(py: Python<'py>, grid: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let grid: GridSpec = from_py(grid)?;
    to_py(py, &oracles::cone_chart(&grid).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (chart, grid = None, tolerances = None))]
fn run_suite<'py>(py: Python<'py>, chart: &Bound<'py, PyAny>, grid: Option<&Bound<'py, PyAny>>, tolerances: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let chart: LeafChart = from_py(chart)?;
    let grid: Option<ImmersionGrid> = grid.map(from_py).transpose()?;
    let tol: Tolerances = from_py_or_default(tolerances)?;
    let report = py.detach(|| verify::run_suite(&chart, grid.as_ref(), &tol)).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (grid, tolerances = None))]
fn run_grid_suite<'py>(py: Python<'py>, grid: &Bound<'py, PyAny>, tolerances: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let grid: ImmersionGrid = from_py(grid)?;
    let tol: Tolerances = from_py_or_default(tolerances)?;
    to_py(py, &verify::run_grid_suite(&grid, &tol).map_err(err)?)
}

#[pyfunction]
fn congruence_classifier<'py>(
    py: Python<'py>,
    chart_a: &Bound<'py, PyAny>,
    chart_b: &Bound<'py, PyAny>,
    grid_a: &Bound<'py, PyAny>,
    grid_b: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let (ca, cb): (LeafChart, LeafChart) = (from_py(chart_a)?, from_py(chart_b)?);
    let (ga, gb): (ImmersionGrid, ImmersionGrid) = (from_py(grid_a)?, from_py(grid_b)?);
    let verdict = py.detach(|| verify::congruence_classifier(&ca, &cb, &ga, &gb)).map_err(err)?;
    to_py(py, &verdict)
}

#[pyfunction]
#[pyo3(signature = (n, h_values, c = 0.0, seed = 0, region = None))]
fn theorem1_probe<'py>(py: Python<'py>, n: usize, h_values: Vec<f64>, c: f64, seed: u64, region: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let region: SampleRegion = from_py_or_default(region)?;
    let report = py.detach(|| verify::theorem1_probe(n, &h_values, c, seed, &region)).map_err(err)?;
    to_py(py, &report)
}

/// SHA-256 of the canonical JSON form of a chart, as stored in `chart_id`.
#[pyfunction]
fn chart_id(chart: &Bound<'_, PyAny>) -> PyResult<String> {
    let chart: LeafChart = from_py(chart)?;
    Ok(verify::content_id(&chart))
}

#[pymodule]
fn cfh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(eval_g, m)?)?;
    m.add_function(wrap_pyfunction!(eval_f, m)?)?;
    m.add_function(wrap_pyfunction!(f_relative, m)?)?;
    m.add_function(wrap_pyfunction!(grad_f, m)?)?;
    m.add_function(wrap_pyfunction!(eval_x, m)?)?;
    m.add_function(wrap_pyfunction!(distance_to_singular, m)?)?;
    m.add_function(wrap_pyfunction!(sample_point, m)?)?;
    m.add_function(wrap_pyfunction!(sample_points, m)?)?;
    m.add_function(wrap_pyfunction!(group_elements, m)?)?;
    m.add_function(wrap_pyfunction!(apply_group, m)?)?;
    m.add_function(wrap_pyfunction!(flow_point, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_flow, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_residual, m)?)?;
    m.add_function(wrap_pyfunction!(build_chart, m)?)?;
    m.add_function(wrap_pyfunction!(transform_chart, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_immersion, m)?)?;
    m.add_function(wrap_pyfunction!(cone_grid, m)?)?;
    m.add_function(wrap_pyfunction!(cone_chart, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid_suite, m)?)?;
    m.add_function(wrap_pyfunction!(congruence_classifier, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_probe, m)?)?;
    m.add_function(wrap_pyfunction!(chart_id, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_for_names() {
        assert_eq!(solve_for("y3").unwrap(), SolveFor::Y3);
        assert_eq!(solve_for("auto").unwrap(), SolveFor::Auto);
    }

    #[test]
    fn core_errors_map_to_python_exceptions() {
        Python::initialize();
        Python::attach(|py| {
            assert!(err(Error::InvalidIndex(4)).is_instance_of::<PyValueError>(py));
            assert!(err(Error::NonFinite("x".into())).is_instance_of::<PyRuntimeError>(py));
        });
    }
}
