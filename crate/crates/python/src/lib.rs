//! Python bindings for `prosinfo`.
//!
//! Matrices cross the boundary as lists of rows; indices of subsets and
//! cycles stay 0-based as in the Rust API, while ranks are 1-based.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use prosinfo::cli::tables::{run_table as run_table_rs, to_csv, TableSettings};
use prosinfo::designs::parse_partition;
use prosinfo::{Error, InfoMatrix, McConfig, QuadratureSpec};

create_exception!(prosinfo, ConvergenceError, PyArithmeticError);

fn to_py(e: Error) -> PyErr {
    if e.is_numeric() {
        ConvergenceError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn rows(m: &InfoMatrix) -> Vec<Vec<f64>> {
    let p = m.dim();
    (0..p).map(|i| (0..p).map(|j| m.get(i, j)).collect()).collect()
}

fn mc_config(reps: usize, seed: u64, workers: usize) -> McConfig {
    McConfig { reps, seed, workers }
}

/// Distribution family with its parameters and the active (estimated) ones.
#[pyclass(frozen, module = "prosinfo")]
struct Model {
    inner: prosinfo::Model,
}

#[pymethods]
impl Model {
    /// `Model("normal", "mu=0,sigma=1", "mu,sigma")`; empty strings take defaults.
    #[new]
    #[pyo3(signature = (family, params = "", active = ""))]
    fn new(family: &str, params: &str, active: &str) -> PyResult<Self> {
        Ok(Self {
            inner: prosinfo::Model::parse(family, params, active).map_err(to_py)?,
        })
    }

    #[getter]
    fn family(&self) -> String {
        self.inner.family().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn active(&self) -> Vec<String> {
        self.inner.active().iter().map(|p| p.name().to_string()).collect()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn quantile(&self, u: f64) -> PyResult<f64> {
        self.inner.quantile(u).map_err(to_py)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    /// Single-observation Fisher information.
    fn fisher_unit(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.fisher_srs_unit(&QuadratureSpec::default()).map_err(to_py)?))
    }

    fn __repr__(&self) -> String {
        format!("Model({})", self.inner)
    }
}

/// Partition of ranks `1..=S` into judgment subsets, repeated over cycles.
#[pyclass(frozen, module = "prosinfo")]
struct Design {
    inner: prosinfo::Design,
}

#[pymethods]
impl Design {
    /// Balanced design with `n` consecutive blocks, or an explicit
    /// `partition` such as `"{{1,2,3},{4,5,6}}"` or `"1-3|4-6"`.
    #[new]
    #[pyo3(signature = (set_size, n = None, cycles = 1, partition = None))]
    fn new(set_size: usize, n: Option<usize>, cycles: usize, partition: Option<&str>) -> PyResult<Self> {
        let inner = match (n, partition) {
            (_, Some(p)) => {
                let subsets = parse_partition(p).map_err(to_py)?;
                prosinfo::Design::new(set_size, subsets, cycles)
            }
            (Some(n), None) => prosinfo::make_balanced_design(set_size, n, cycles),
            (None, None) => return Err(PyValueError::new_err("give either n or partition")),
        }
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn set_size(&self) -> usize {
        self.inner.set_size()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn cycles(&self) -> usize {
        self.inner.cycles()
    }

    #[getter]
    fn subsets(&self) -> Vec<Vec<usize>> {
        self.inner.subsets().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Design({})", self.inner)
    }
}

/// Misplacement probabilities `α[r][h]` between judgment and true subsets.
#[pyclass(frozen, module = "prosinfo")]
struct Alpha {
    inner: prosinfo::MisplacementMatrix,
}

#[pymethods]
impl Alpha {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: prosinfo::MisplacementMatrix::new(&rows).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: prosinfo::MisplacementMatrix::identity(n).map_err(to_py)?,
        })
    }

    /// Diagonal `p`, off-diagonal `(1 - p)/(n - 1)`.
    #[staticmethod]
    fn symmetric(n: usize, p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: prosinfo::make_symmetric_alpha(n, p).map_err(to_py)?,
        })
    }

    /// Estimated from ranking by a concomitant with correlation `rho`.
    #[staticmethod]
    #[pyo3(signature = (model, design, rho, reps = 50_000, seed = 20240101))]
    fn dell_clutter(model: &Model, design: &Design, rho: f64, reps: usize, seed: u64) -> PyResult<Self> {
        let cfg = prosinfo::DellClutterConfig::new(rho, reps, seed).map_err(to_py)?;
        Ok(Self {
            inner: prosinfo::estimate_dell_clutter_alpha(&model.inner, &design.inner, &cfg).map_err(to_py)?,
        })
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn __repr__(&self) -> String {
        format!("Alpha({:?})", self.inner.rows())
    }
}

/// Information matrix, with standard errors when simulated.
#[pyclass(frozen, module = "prosinfo")]
struct Information {
    inner: prosinfo::FIResult,
}

#[pymethods]
impl Information {
    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.matrix)
    }

    /// Per-entry standard errors, or `None` for quadrature results.
    #[getter]
    fn std_errors(&self) -> Option<Vec<Vec<f64>>> {
        let p = self.inner.matrix.dim();
        self.inner
            .entry_errors
            .as_ref()
            .map(|e| (0..p).map(|i| (0..p).map(|j| e[i * p + j].std_error).collect()).collect())
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.name()
    }

    fn det(&self) -> f64 {
        self.inner.det()
    }

    fn __repr__(&self) -> String {
        format!("Information({}, {:?})", self.inner.design, rows(&self.inner.matrix))
    }
}

#[pyfunction]
fn fi_srs(model: &Model, size: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(&prosinfo::fi_srs(&model.inner, size, &QuadratureSpec::default()).map_err(to_py)?))
}

/// Complete-data information of PROS(n, S) over `cycles` cycles.
#[pyfunction]
#[pyo3(signature = (model, n, set_size, cycles = 1))]
fn fi_pros_complete(model: &Model, n: usize, set_size: usize, cycles: usize) -> PyResult<Information> {
    let inner = prosinfo::fi_pros_complete(&model.inner, n, set_size, cycles, &QuadratureSpec::default());
    Ok(Information {
        inner: inner.map_err(to_py)?,
    })
}

/// Information of the measured values only, under optional misplacement.
#[pyfunction]
#[pyo3(signature = (model, design, alpha = None, method = "quadrature", reps = 50_000, seed = 20240101, workers = 0))]
fn fi_pros_marginal(
    py: Python<'_>,
    model: &Model,
    design: &Design,
    alpha: Option<&Alpha>,
    method: &str,
    reps: usize,
    seed: u64,
    workers: usize,
) -> PyResult<Information> {
    let method: prosinfo::Method = method.parse().map_err(to_py)?;
    let mc = mc_config(reps, seed, workers);
    let inner = py.detach(|| {
        prosinfo::fi_pros_marginal(
            &model.inner,
            &design.inner,
            alpha.map(|a| &a.inner),
            method,
            &mc,
            &QuadratureSpec::default(),
        )
    });
    Ok(Information {
        inner: inner.map_err(to_py)?,
    })
}

/// `det(a) / det(b)`.
#[pyfunction]
fn relative_efficiency(a: &Information, b: &Information) -> PyResult<f64> {
    prosinfo::relative_efficiency(&a.inner.matrix, &b.inner.matrix).map_err(to_py)
}

fn kind(design: &str, n: usize, set_size: usize) -> PyResult<prosinfo::DesignKind> {
    match design {
        "srs" => Ok(prosinfo::DesignKind::Srs { n }),
        "rss" => Ok(prosinfo::DesignKind::Rss { set_size }),
        "pros" => Ok(prosinfo::DesignKind::Pros { n, set_size }),
        other => Err(PyValueError::new_err(format!("unknown design kind '{other}' (srs, rss, pros)"))),
    }
}

/// Shannon entropy of a perfect sample: `(total, lower_bound, upper_bound)`.
#[pyfunction]
#[pyo3(signature = (model, n, set_size, design = "pros"))]
fn shannon(model: &Model, n: usize, set_size: usize, design: &str) -> PyResult<(f64, f64, f64)> {
    let r = prosinfo::shannon(&model.inner, kind(design, n, set_size)?, &QuadratureSpec::default()).map_err(to_py)?;
    Ok((r.total, r.lower, r.upper))
}

/// Rényi entropy of order `alpha` in (0, 1): `(total, lower_bound, upper_bound)`.
#[pyfunction]
#[pyo3(signature = (model, n, set_size, alpha, design = "pros"))]
fn renyi(model: &Model, n: usize, set_size: usize, alpha: f64, design: &str) -> PyResult<(f64, f64, f64)> {
    let r = prosinfo::renyi(&model.inner, kind(design, n, set_size)?, alpha, &QuadratureSpec::default())
        .map_err(to_py)?;
    Ok((r.total, r.lower, r.upper))
}

/// Kullback–Leibler information between PROS(n, S) and SRS of size n.
#[pyfunction]
fn kl_pros_srs(model: &Model, n: usize, set_size: usize) -> PyResult<f64> {
    prosinfo::kl_pros_srs(&model.inner, n, set_size, &QuadratureSpec::default()).map_err(to_py)
}

/// Complete-data efficiency constants `{c1, c2, d0, d1, d2}`.
#[pyfunction]
fn efficiency_polynomial(model: &Model) -> PyResult<Vec<(&'static str, f64)>> {
    let e = prosinfo::efficiency_polynomial(&model.inner, &QuadratureSpec::default()).map_err(to_py)?;
    Ok(vec![("c1", e.c1), ("c2", e.c2), ("d0", e.d0), ("d1", e.d1), ("d2", e.d2)])
}

/// Measured units as `(cycle, set, subset, true_rank, value)` tuples.
#[pyfunction]
#[pyo3(signature = (model, design, alpha = None, seed = 20240101))]
fn draw_pros(
    model: &Model,
    design: &Design,
    alpha: Option<&Alpha>,
    seed: u64,
) -> PyResult<Vec<(usize, usize, usize, usize, f64)>> {
    let s = prosinfo::draw_pros(&model.inner, &design.inner, alpha.map(|a| &a.inner), seed).map_err(to_py)?;
    Ok(s.units
        .iter()
        .map(|u| (u.cycle, u.set, u.subset, u.true_position, u.value))
        .collect())
}

/// Table cells as `(row_label, col_label, estimate, mc_stderr, method)`;
/// `csv=True` returns the CSV text instead.
#[pyfunction]
#[pyo3(signature = (table_id, row = None, col = None, method = "quadrature", reps = 50_000, seed = 20240101, csv = false))]
fn run_table(
    py: Python<'_>,
    table_id: u32,
    row: Option<String>,
    col: Option<String>,
    method: &str,
    reps: usize,
    seed: u64,
    csv: bool,
) -> PyResult<Py<PyAny>> {
    let settings = TableSettings {
        mc: mc_config(reps, seed, 0),
        method: method.parse().map_err(to_py)?,
        row_filter: row,
        col_filter: col,
        ..TableSettings::default()
    };
    let cells = py.detach(|| run_table_rs(table_id, &settings)).map_err(to_py)?;
    if csv {
        return Ok(to_csv(&cells).into_pyobject(py)?.into_any().unbind());
    }
    let tuples: Vec<(String, String, f64, f64, String)> = cells
        .into_iter()
        .map(|c| (c.row_label, c.col_label, c.estimate, c.mc_stderr, c.method))
        .collect();
    Ok(tuples.into_pyobject(py)?.into_any().unbind())
}

#[pymodule]
#[pyo3(name = "prosinfo")]
fn prosinfo_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_class::<Model>()?;
    m.add_class::<Design>()?;
    m.add_class::<Alpha>()?;
    m.add_class::<Information>()?;
    m.add_function(wrap_pyfunction!(fi_srs, m)?)?;
    m.add_function(wrap_pyfunction!(fi_pros_complete, m)?)?;
    m.add_function(wrap_pyfunction!(fi_pros_marginal, m)?)?;
    m.add_function(wrap_pyfunction!(relative_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(shannon, m)?)?;
    m.add_function(wrap_pyfunction!(renyi, m)?)?;
    m.add_function(wrap_pyfunction!(kl_pros_srs, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(draw_pros, m)?)?;
    m.add_function(wrap_pyfunction!(run_table, m)?)?;
    Ok(())
}
