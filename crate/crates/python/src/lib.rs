//! Python bindings for the pumblock interpolation engine.
//!
//! Point arguments are sequences of equal-length coordinate sequences.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use pumblock_core::blockpart::{BlockMode, BlockStructure as CoreBlocks};
use pumblock_core::geometry::{self, ConvexDomain as CoreDomain, PointSet};
use pumblock_core::kernels::{Kernel, KernelKind};
use pumblock_core::pum::{self, EvalGrid, PumConfig};
use pumblock_core::validation::TestFunction;
use pumblock_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_points(rows: &[Vec<f64>]) -> PyResult<PointSet> {
    let dim = rows.first().map(Vec::len).unwrap_or(0);
    PointSet::from_rows(dim, rows.iter().map(Vec::as_slice)).map_err(py_err)
}

fn to_rows(pts: &PointSet) -> Vec<Vec<f64>> {
    pts.iter().map(<[f64]>::to_vec).collect()
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// `n` Halton points in `[0,1]^dim`, skipping the first `skip` indices.
#[pyfunction]
#[pyo3(signature = (n, dim, skip = 0))]
fn halton(n: usize, dim: usize, skip: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(to_rows(&geometry::halton(n, dim, skip).map_err(py_err)?))
}

#[pyfunction]
fn phi(kind: &str, r: f64, epsilon: f64) -> PyResult<f64> {
    let k = Kernel::new(parse::<KernelKind>(kind)?, epsilon).map_err(py_err)?;
    Ok(k.eval(r))
}

/// Evaluates one of the test functions `f1`..`f4` at a point.
#[pyfunction]
fn test_function(name: &str, point: Vec<f64>) -> PyResult<f64> {
    parse::<TestFunction>(name)?.eval(&point).map_err(py_err)
}

#[pyclass(name = "ConvexDomain", frozen)]
struct PyConvexDomain {
    inner: CoreDomain,
}

#[pymethods]
impl PyConvexDomain {
    #[new]
    fn new(points: Vec<Vec<f64>>) -> PyResult<Self> {
        let pts = to_points(&points)?;
        Ok(Self {
            inner: geometry::convex_hull(&pts).map_err(py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn measure(&self) -> f64 {
        self.inner.measure()
    }

    #[getter]
    fn vertices(&self) -> Vec<Vec<f64>> {
        to_rows(self.inner.vertices())
    }

    fn contains(&self, point: Vec<f64>) -> PyResult<bool> {
        if point.len() != self.inner.dim() {
            return Err(py_err(Error::DimensionMismatch {
                expected: self.inner.dim(),
                got: point.len(),
            }));
        }
        Ok(self.inner.contains(&point))
    }
}

/// Points bucketed into blocks of the unit-normalised bounding cube.
#[pyclass(name = "BlockStructure", frozen)]
struct PyBlockStructure {
    inner: CoreBlocks,
}

#[pymethods]
impl PyBlockStructure {
    #[new]
    #[pyo3(signature = (points, radius, mode = "cover"))]
    fn new(points: Vec<Vec<f64>>, radius: f64, mode: &str) -> PyResult<Self> {
        let pts = to_points(&points)?;
        let bbox = pts
            .bounds()
            .ok_or_else(|| PyValueError::new_err("no points"))?
            .bounding_cube();
        let mode: BlockMode = parse(mode)?;
        Ok(Self {
            inner: CoreBlocks::for_radius(&pts, bbox, radius, mode).map_err(py_err)?,
        })
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn num_blocks(&self) -> usize {
        self.inner.num_blocks()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(index, distance)` pairs of points within `radius` of `center`.
    fn range_search(&self, center: Vec<f64>, radius: f64) -> PyResult<Vec<(usize, f64)>> {
        if center.len() != self.inner.dim() {
            return Err(py_err(Error::DimensionMismatch {
                expected: self.inner.dim(),
                got: center.len(),
            }));
        }
        Ok(self
            .inner
            .range_search(&center, radius)
            .into_iter()
            .map(|n| (n.index, n.distance))
            .collect())
    }
}

#[pyclass(name = "PumModel", frozen)]
struct PyPumModel {
    inner: pum::PumModel,
}

#[pymethods]
impl PyPumModel {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius()
    }

    #[getter]
    fn num_subdomains(&self) -> usize {
        self.inner.centers().len()
    }

    /// Interpolant values; NaN where no subdomain covers a point.
    fn evaluate(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let pts = to_points(&points)?;
        Ok(self.inner.evaluate_partial(&pts).map_err(py_err)?.values)
    }
}

#[pyclass(name = "PumResult", frozen, get_all)]
struct PyPumResult {
    eval_points: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// Run report as a JSON string, timings included.
    report: String,
    model: Py<PyPumModel>,
}

/// Interpolates scattered data on the grid points inside its convex hull.
///
/// `truth` names a test function used to fill in the error fields of the
/// report.
#[pyfunction]
#[pyo3(signature = (points, values, kernel = "wendland-c2", epsilon = 1.0, d_r = None, grid = None, block_mode = "cover", truth = None))]
#[allow(clippy::too_many_arguments)]
fn pum_interpolate(
    py: Python<'_>,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    kernel: &str,
    epsilon: f64,
    d_r: Option<usize>,
    grid: Option<&str>,
    block_mode: &str,
    truth: Option<&str>,
) -> PyResult<PyPumResult> {
    let mut nodes = to_points(&points)?;
    nodes.set_values(values).map_err(py_err)?;
    let cfg = PumConfig {
        d_r,
        eval_grid: grid.map(parse::<EvalGrid>).transpose()?,
        block_mode: parse(block_mode)?,
        ..PumConfig::new(Kernel::new(parse(kernel)?, epsilon).map_err(py_err)?)
    };
    let f = truth.map(parse::<TestFunction>).transpose()?;
    if let Some(f) = f {
        if f.dim() != nodes.dim() {
            return Err(py_err(Error::DimensionMismatch {
                expected: nodes.dim(),
                got: f.dim(),
            }));
        }
    }
    let truth_fn = f.map(|f| move |p: &[f64]| f.eval_unchecked(p));
    let run = py
        .detach(|| pum::pum_interpolate(&nodes, &cfg, truth_fn.as_ref().map(|g| g as pum::TruthFn<'_>)))
        .map_err(py_err)?;
    Ok(PyPumResult {
        eval_points: to_rows(&run.eval_points),
        values: run.evaluation.values.clone(),
        report: run.report.to_json(true),
        model: Py::new(py, PyPumModel { inner: run.model })?,
    })
}

#[pymodule]
pub fn pumblock(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(halton, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(test_function, m)?)?;
    m.add_function(wrap_pyfunction!(pum_interpolate, m)?)?;
    m.add_class::<PyConvexDomain>()?;
    m.add_class::<PyBlockStructure>()?;
    m.add_class::<PyPumModel>()?;
    m.add_class::<PyPumResult>()?;
    Ok(())
}
