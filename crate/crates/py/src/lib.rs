//! Python bindings: grids, kernels, fields, extremal sweeps, the sublinear
//! solver, and the principal eigenpair.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use deadcore::barrier;
use deadcore::exterior::{ExteriorSpec, Shell};
use deadcore::experiment;
use deadcore::grid::{build_grid, DomainGrid, DomainKind};
use deadcore::kernel::{ExtremalSign, KernelSpec};
use deadcore::operator;
use deadcore::solver;

fn err(e: deadcore::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_sign(sign: &str) -> PyResult<ExtremalSign> {
    match sign {
        "plus" | "+" => Ok(ExtremalSign::Plus),
        "minus" | "-" => Ok(ExtremalSign::Minus),
        other => Err(PyValueError::new_err(format!(
            "sign must be \"plus\" or \"minus\", got {other:?}"
        ))),
    }
}

fn parse_kind(kind: &str) -> PyResult<DomainKind> {
    match kind {
        "interval" => Ok(DomainKind::Interval),
        "disk" => Ok(DomainKind::Disk),
        "box" => Ok(DomainKind::Box),
        other => Err(PyValueError::new_err(format!(
            "kind must be interval/disk/box, got {other:?}"
        ))),
    }
}

/// Masked uniform grid over an interval, disk or box.
#[pyclass(name = "Grid", skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Arc<DomainGrid>,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (dim, kind, extent, h, r_trunc, center=None))]
    fn new(
        dim: usize,
        kind: &str,
        extent: Vec<f64>,
        h: f64,
        r_trunc: f64,
        center: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let center = center.unwrap_or_else(|| vec![0.0; dim]);
        let grid = build_grid(dim, parse_kind(kind)?, &extent, &center, h, r_trunc).map_err(err)?;
        Ok(Self { inner: Arc::new(grid) })
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n_nodes()).map(|i| self.inner.node(i).to_vec()).collect()
    }

    fn distances(&self) -> Vec<f64> {
        self.inner.distances().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(dim={}, nodes={}, h={})",
            self.inner.dim,
            self.inner.n_nodes(),
            self.inner.h
        )
    }
}

/// Kernel class parameters (s, lambda, Lambda, normalization, directions).
#[pyclass(name = "Kernel", skip_from_py_object)]
#[derive(Clone)]
struct PyKernel {
    inner: KernelSpec,
}

#[pymethods]
impl PyKernel {
    #[new]
    #[pyo3(signature = (dim, s, lam, big_lambda, c_norm=None, n_dirs=16))]
    fn new(
        dim: usize,
        s: f64,
        lam: f64,
        big_lambda: f64,
        c_norm: Option<Bound<'_, PyAny>>,
        n_dirs: usize,
    ) -> PyResult<Self> {
        let mut k = KernelSpec::with_directions(dim, s, lam, big_lambda, n_dirs).map_err(err)?;
        if let Some(c) = c_norm {
            if let Ok(v) = c.extract::<f64>() {
                k.c_norm = v;
            } else if let Ok(name) = c.extract::<String>() {
                k.c_norm = match name.as_str() {
                    "one" => 1.0,
                    "fractional" => deadcore::kernel::fractional_laplacian_constant(dim, s),
                    other => {
                        return Err(PyValueError::new_err(format!(
                            "c_norm preset must be \"one\" or \"fractional\", got {other:?}"
                        )))
                    }
                };
            } else {
                return Err(PyValueError::new_err("c_norm must be a float or a preset name"));
            }
        }
        k.validate().map_err(err)?;
        Ok(Self { inner: k })
    }

    #[getter]
    fn c_norm(&self) -> f64 {
        self.inner.c_norm
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel(dim={}, s={}, lambda={}, Lambda={}, c_norm={})",
            self.inner.dim, self.inner.s, self.inner.lambda, self.inner.big_lambda, self.inner.c_norm
        )
    }
}

fn exterior_from(
    grid: &DomainGrid,
    shells: Option<Vec<(f64, f64, f64)>>,
    far_value: f64,
) -> PyResult<ExteriorSpec> {
    let ext = match shells {
        None => ExteriorSpec::uniform(grid, far_value),
        Some(rows) => ExteriorSpec::new(
            rows.into_iter()
                .map(|(a, b, v)| Shell { r_inner: a, r_outer: b, value: v })
                .collect(),
            far_value,
        ),
    };
    ext.validate(grid).map_err(err)?;
    Ok(ext)
}

/// Grid function: nodal values inside the domain, shell constants outside.
#[pyclass(name = "Field", skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: deadcore::Field,
}

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (grid, values, shells=None, far_value=0.0))]
    fn new(
        grid: &PyGrid,
        values: Vec<f64>,
        shells: Option<Vec<(f64, f64, f64)>>,
        far_value: f64,
    ) -> PyResult<Self> {
        let ext = exterior_from(&grid.inner, shells, far_value)?;
        let inner = deadcore::Field::new(grid.inner.clone(), values, ext).map_err(err)?;
        Ok(Self { inner })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    /// Evaluates the induced function anywhere in R^n.
    fn eval(&self, x: Vec<f64>) -> f64 {
        self.inner.eval(&x)
    }

    /// f(x+y) + f(x-y) - 2 f(x).
    fn second_difference(&self, x: Vec<f64>, y: Vec<f64>) -> f64 {
        self.inner.second_difference(&x, &y)
    }

    fn __repr__(&self) -> String {
        format!("Field(nodes={})", self.inner.values.len())
    }
}

/// M+ or M- applied at every interior node.
#[pyfunction]
fn extremal_apply(field: &PyField, kernel: &PyKernel, sign: &str) -> PyResult<Vec<f64>> {
    operator::operator_apply(&field.inner, parse_sign(sign)?, &kernel.inner).map_err(err)
}

/// M+ or M- at a single point (an interior node).
#[pyfunction]
fn eval_extremal(field: &PyField, kernel: &PyKernel, sign: &str, x: Vec<f64>) -> PyResult<f64> {
    operator::eval_extremal(&field.inner, &x, parse_sign(sign)?, &kernel.inner).map_err(err)
}

/// Radial second-difference integral along one direction.
#[pyfunction]
fn directional_integral(
    field: &PyField,
    kernel: &PyKernel,
    x: Vec<f64>,
    theta: Vec<f64>,
) -> PyResult<f64> {
    operator::directional_integral(&field.inner, &x, &theta, &kernel.inner).map_err(err)
}

/// Weighted norm int |f| / (1 + |x|^{n+2s}).
#[pyfunction]
fn l1s_norm(field: &PyField, s: f64) -> f64 {
    barrier::l1s_norm(&field.inner, s)
}

/// Steady state of M[u] + a (u+)^q = 0 descending from the supersolution.
#[pyfunction]
#[pyo3(signature = (grid, kernel, sign, a, q, shells=None, far_value=0.0, tol=1e-6, max_iter=400000))]
#[allow(clippy::too_many_arguments)]
fn solve_problem(
    py: Python<'_>,
    grid: &PyGrid,
    kernel: &PyKernel,
    sign: &str,
    a: Bound<'_, PyAny>,
    q: f64,
    shells: Option<Vec<(f64, f64, f64)>>,
    far_value: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<Py<PyDict>> {
    let weight = if let Ok(c) = a.extract::<f64>() {
        vec![c; grid.inner.n_nodes()]
    } else {
        a.extract::<Vec<f64>>()?
    };
    let ext = exterior_from(&grid.inner, shells, far_value)?;
    let problem = solver::Problem::new(
        grid.inner.clone(),
        kernel.inner.clone(),
        parse_sign(sign)?,
        weight,
        q,
        ext,
    )
    .map_err(err)?;
    let cfg = solver::SolverConfig { tol_residual: tol, max_iter, ..Default::default() };
    let asm = problem.assemble().map_err(err)?;
    let run = solver::maximal_solution_solve(&problem, &asm, &cfg).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("values", run.field.values.clone())?;
    out.set_item("residual", run.residual)?;
    out.set_item("steps", run.steps)?;
    out.set_item("min_u", run.field.min_value())?;
    out.set_item("max_u", run.field.max_value())?;
    Ok(out.into())
}

/// Principal eigenpair (lambda_1, phi_1 values, residual) with zero exterior.
#[pyfunction]
#[pyo3(signature = (grid, kernel, sign, tol=1e-6))]
fn principal_eigenpair(
    grid: &PyGrid,
    kernel: &PyKernel,
    sign: &str,
    tol: f64,
) -> PyResult<(f64, Vec<f64>, f64)> {
    let cfg = solver::SolverConfig { tol_residual: tol, ..Default::default() };
    let pair = solver::principal_eigenpair(grid.inner.clone(), &kernel.inner, parse_sign(sign)?, &cfg)
        .map_err(err)?;
    Ok((pair.lambda1, pair.phi1.values.clone(), pair.residual))
}

/// Dead-core detection and the Hopf boundary quotient of a field.
#[pyfunction]
#[pyo3(signature = (field, s, tol_zero=1e-5, probe_depth_cells=8.0))]
fn smp_report(
    py: Python<'_>,
    field: &PyField,
    s: f64,
    tol_zero: f64,
    probe_depth_cells: f64,
) -> PyResult<Py<PyDict>> {
    let rep = experiment::smp_check(
        &field.inner,
        s,
        tol_zero,
        probe_depth_cells * field.inner.grid.h,
    );
    let out = PyDict::new(py);
    out.set_item(
        "verdict",
        match rep.verdict {
            experiment::Verdict::StrictlyPositive => "strictly_positive",
            experiment::Verdict::DeadCore => "dead_core",
            experiment::Verdict::Trivial => "trivial",
        },
    )?;
    out.set_item("dead_core", rep.dead_core.clone())?;
    out.set_item("hopf_min", rep.hopf_min)?;
    Ok(out.into())
}

#[pymodule]
fn deadcore_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(extremal_apply, m)?)?;
    m.add_function(wrap_pyfunction!(eval_extremal, m)?)?;
    m.add_function(wrap_pyfunction!(directional_integral, m)?)?;
    m.add_function(wrap_pyfunction!(l1s_norm, m)?)?;
    m.add_function(wrap_pyfunction!(solve_problem, m)?)?;
    m.add_function(wrap_pyfunction!(principal_eigenpair, m)?)?;
    m.add_function(wrap_pyfunction!(smp_report, m)?)?;
    Ok(())
}
