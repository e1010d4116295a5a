//! Python bindings for the qur bound calculator.
//!
//! Matrices cross the boundary as nested lists of complex numbers.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use qur_core::experiments::{self, SweepTable, VerifyConfig};
use qur_core::{forward, reverse, state};
use qur_core::{Complex, ComplexMatrix, Error, ReverseBoundResult};

fn to_py(err: Error) -> PyErr {
    if err.is_numerical() {
        PyArithmeticError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn matrix(rows: Vec<Vec<Complex>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(rows).map_err(to_py)
}

fn matrices(list: Vec<Vec<Vec<Complex>>>) -> PyResult<Vec<ComplexMatrix>> {
    list.into_iter().map(matrix).collect()
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct DensityMatrix(state::DensityMatrix);

#[pymethods]
impl DensityMatrix {
    #[new]
    fn new(rows: Vec<Vec<Complex>>) -> PyResult<Self> {
        Ok(Self(state::DensityMatrix::new(matrix(rows)?).map_err(to_py)?))
    }

    #[staticmethod]
    fn maximally_mixed(dim: usize) -> PyResult<Self> {
        Ok(Self(state::maximally_mixed(dim).map_err(to_py)?))
    }

    #[staticmethod]
    fn from_bloch(rx: f64, ry: f64, rz: f64) -> PyResult<Self> {
        Ok(Self(state::from_bloch(rx, ry, rz).map_err(to_py)?))
    }

    #[staticmethod]
    fn fig_state(theta: f64, phi: f64) -> PyResult<Self> {
        Ok(Self(state::fig_state(theta, phi).map_err(to_py)?))
    }

    #[staticmethod]
    fn pure(psi: Vec<Complex>) -> PyResult<Self> {
        Ok(Self(state::DensityMatrix::pure(&psi).map_err(to_py)?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn purity(&self) -> f64 {
        state::purity(&self.0)
    }

    fn to_list(&self) -> Vec<Vec<Complex>> {
        self.0.matrix().to_rows()
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={}, purity={:.6})", self.0.dim(), state::purity(&self.0))
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Observable(state::Observable);

#[pymethods]
impl Observable {
    #[new]
    fn new(rows: Vec<Vec<Complex>>) -> PyResult<Self> {
        Ok(Self(state::Observable::new(matrix(rows)?).map_err(to_py)?))
    }

    #[staticmethod]
    fn sigma_x() -> Self {
        Self(state::Observable::sigma_x())
    }

    #[staticmethod]
    fn sigma_y() -> Self {
        Self(state::Observable::sigma_y())
    }

    #[staticmethod]
    fn sigma_z() -> Self {
        Self(state::Observable::sigma_z())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn to_list(&self) -> Vec<Vec<Complex>> {
        self.0.matrix().to_rows()
    }

    fn __repr__(&self) -> String {
        format!("Observable(dim={})", self.0.dim())
    }
}

/// Bound value resolved per sign branch.
#[pyclass(frozen, get_all)]
struct Branches {
    plus: f64,
    minus: f64,
    value: f64,
    branch: String,
}

#[pymethods]
impl Branches {
    fn __repr__(&self) -> String {
        format!(
            "Branches(plus={}, minus={}, value={}, branch={})",
            self.plus, self.minus, self.value, self.branch
        )
    }
}

impl From<ReverseBoundResult> for Branches {
    fn from(r: ReverseBoundResult) -> Self {
        Branches {
            plus: r.per_branch[0],
            minus: r.per_branch[1],
            value: r.value,
            branch: r.branch_chosen.to_string(),
        }
    }
}

/// Mondal's upper bound, `value` is None where it diverges.
#[pyclass(frozen, get_all)]
struct MondalBound {
    value: Option<f64>,
    diverged: bool,
    denominator: Option<f64>,
}

fn obs(list: &[Observable]) -> Vec<state::Observable> {
    list.iter().map(|o| o.0.clone()).collect()
}

#[pyfunction]
fn variance(rho: &DensityMatrix, a: &Observable) -> PyResult<f64> {
    state::variance(&rho.0, &a.0).map_err(to_py)
}

#[pyfunction]
fn covariance(rho: &DensityMatrix, a: &Observable, b: &Observable) -> PyResult<f64> {
    state::covariance(&rho.0, &a.0, &b.0).map_err(to_py)
}

#[pyfunction]
fn robertson_bound(rho: &DensityMatrix, a: &Observable, b: &Observable) -> PyResult<f64> {
    forward::robertson_bound(&rho.0, &a.0, &b.0).map_err(to_py)
}

#[pyfunction]
fn schrodinger_bound(rho: &DensityMatrix, a: &Observable, b: &Observable) -> PyResult<f64> {
    forward::schrodinger_bound(&rho.0, &a.0, &b.0).map_err(to_py)
}

/// Maccone–Pati bound for a pure qubit, using its orthogonal complement.
#[pyfunction]
fn maccone_pati_bound(rho: &DensityMatrix, a: &Observable, b: &Observable) -> PyResult<(f64, f64, f64)> {
    let perp = forward::orthogonal_qubit_state(&rho.0, 1e-10).map_err(to_py)?;
    let r = forward::maccone_pati_bound(&rho.0, &perp, &a.0, &b.0).map_err(to_py)?;
    Ok((r.per_branch[0], r.per_branch[1], r.value))
}

#[pyfunction]
#[pyo3(signature = (rho, a, b, aux = Vec::new()))]
fn sum_variance_lower_bound(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
    aux: Vec<Vec<Vec<Complex>>>,
) -> PyResult<f64> {
    forward::sum_variance_lower_bound(&rho.0, &a.0, &b.0, &matrices(aux)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rho, a, b, eps = reverse::MONDAL_EPS))]
fn mondal_upper_bound(rho: &DensityMatrix, a: &Observable, b: &Observable, eps: f64) -> PyResult<MondalBound> {
    let r = reverse::mondal_upper_bound(&rho.0, &a.0, &b.0, eps).map_err(to_py)?;
    Ok(MondalBound {
        value: (!r.diverged).then_some(r.value),
        diverged: r.diverged,
        denominator: r.denominator,
    })
}

#[pyfunction]
fn reverse_bound_cs(rho: &DensityMatrix, a: &Observable, b: &Observable) -> PyResult<Branches> {
    reverse::reverse_bound_cs(&rho.0, &a.0, &b.0).map(Into::into).map_err(to_py)
}

#[pyfunction]
fn reverse_bound_trace(rho: &DensityMatrix, a: &Observable, b: &Observable) -> PyResult<Branches> {
    reverse::reverse_bound_trace(&rho.0, &a.0, &b.0).map(Into::into).map_err(to_py)
}

#[pyfunction]
fn reverse_bound_stateless(rho: &DensityMatrix, a: &Observable, b: &Observable) -> PyResult<Branches> {
    reverse::reverse_bound_stateless(&rho.0, &a.0, &b.0).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rho, a, b, aux = Vec::new()))]
fn tightened_reverse_bound(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
    aux: Vec<Vec<Vec<Complex>>>,
) -> PyResult<Branches> {
    reverse::tightened_reverse_bound(&rho.0, &a.0, &b.0, &matrices(aux)?)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rho, observables, phases, aux = Vec::new()))]
fn multi_reverse_bound(
    rho: &DensityMatrix,
    observables: Vec<Observable>,
    phases: Vec<f64>,
    aux: Vec<Vec<Vec<Complex>>>,
) -> PyResult<f64> {
    reverse::multi_reverse_bound(&rho.0, &obs(&observables), &phases, &matrices(aux)?).map_err(to_py)
}

/// Returns (phases, value) with the first phase fixed at zero.
#[pyfunction]
#[pyo3(signature = (rho, observables, aux = Vec::new(), grid = reverse::DEFAULT_PHASE_GRID, tol = reverse::DEFAULT_PHASE_TOL))]
fn optimize_phases(
    rho: &DensityMatrix,
    observables: Vec<Observable>,
    aux: Vec<Vec<Vec<Complex>>>,
    grid: usize,
    tol: f64,
) -> PyResult<(Vec<f64>, f64)> {
    let (phases, v) =
        reverse::optimize_phases(&rho.0, &obs(&observables), &matrices(aux)?, grid, tol).map_err(to_py)?;
    Ok((phases.thetas().to_vec(), v))
}

#[pyfunction]
fn purity_lower_bound(rho: &DensityMatrix, a: &Observable, b: &Observable) -> PyResult<f64> {
    reverse::purity_lower_bound(&rho.0, &a.0, &b.0).map_err(to_py)
}

fn table(t: SweepTable) -> (Vec<String>, Vec<Vec<f64>>) {
    let columns = std::iter::once("theta")
        .chain(t.columns.iter().map(|(name, _)| *name))
        .map(String::from)
        .collect();
    let rows = t
        .rows
        .into_iter()
        .map(|r| std::iter::once(r.theta).chain(r.values).collect())
        .collect();
    (columns, rows)
}

/// Returns (column names, rows) including the leading theta column.
#[pyfunction]
#[pyo3(signature = (points = 1000, phi = experiments::FIG_PHI))]
fn run_fig1(points: usize, phi: f64) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
    experiments::run_fig1(points, phi).map(table).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (points = 1000))]
fn run_fig2(points: usize) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
    experiments::run_fig2(points).map(table).map_err(to_py)
}

/// Returns (passed, report text).
#[pyfunction]
#[pyo3(signature = (trials = 10_000, dims = vec![2, 3, 4], seed = 42, tol = 1e-9))]
fn run_verify(trials: usize, dims: Vec<usize>, seed: u64, tol: f64) -> PyResult<(bool, String)> {
    let report = experiments::run_verify(&VerifyConfig { trials, dims, seed, tol }).map_err(to_py)?;
    Ok((report.passed(), report.render(true)))
}

#[pymodule]
fn pyqur(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<DensityMatrix>()?;
    m.add_class::<Observable>()?;
    m.add_class::<Branches>()?;
    m.add_class::<MondalBound>()?;
    m.add_function(wrap_pyfunction!(variance, m)?)?;
    m.add_function(wrap_pyfunction!(covariance, m)?)?;
    m.add_function(wrap_pyfunction!(robertson_bound, m)?)?;
    m.add_function(wrap_pyfunction!(schrodinger_bound, m)?)?;
    m.add_function(wrap_pyfunction!(maccone_pati_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sum_variance_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(mondal_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(reverse_bound_cs, m)?)?;
    m.add_function(wrap_pyfunction!(reverse_bound_trace, m)?)?;
    m.add_function(wrap_pyfunction!(reverse_bound_stateless, m)?)?;
    m.add_function(wrap_pyfunction!(tightened_reverse_bound, m)?)?;
    m.add_function(wrap_pyfunction!(multi_reverse_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_phases, m)?)?;
    m.add_function(wrap_pyfunction!(purity_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_fig1, m)?)?;
    m.add_function(wrap_pyfunction!(run_fig2, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
