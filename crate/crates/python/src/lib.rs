//! Python bindings: model parameters, symbolic operators, theorem checks,
//! spectra, eigenfunctions and classical orbits.

use darboux::algebra::{self, Corruption, Flavor, OperatorExpr, TheoremPart, VerifyOptions};
use darboux::classical::{self, PhaseState};
use darboux::spectra::{self, CartesianEigenfunction, RadialProblem};
use darboux::{Error, ModelParams, Threshold};
use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Integration { .. } | Error::Degenerate(_) | Error::Io(_) | Error::Json(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn flavor(name: &str) -> PyResult<Flavor> {
    name.parse().map_err(py_err)
}

#[pyclass(name = "ModelParams", module = "darboux", from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (dim = 3, lam = 0.02, omega = 1.0, hbar = 1.0))]
    fn new(dim: usize, lam: f64, omega: f64, hbar: f64) -> PyResult<Self> {
        Ok(Self { inner: ModelParams::new(dim, lam, omega, hbar).map_err(py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar
    }

    fn scalar_curvature(&self, r: f64) -> f64 {
        self.inner.scalar_curvature(r)
    }

    fn oscillator_potential(&self, r: f64) -> f64 {
        self.inner.oscillator_potential(r)
    }

    fn flattening_coordinate(&self, r: f64) -> f64 {
        self.inner.flattening_coordinate(r)
    }

    fn inverse_flattening(&self, q: f64) -> PyResult<f64> {
        self.inner.inverse_flattening(q).map_err(py_err)
    }

    fn closed_form_energy(&self, n: u32) -> f64 {
        self.inner.closed_form_energy(n)
    }

    fn omega_eff(&self, energy: f64) -> Option<f64> {
        self.inner.omega_eff(energy)
    }

    /// `omega^2 / (2 lambda)`, or `inf` in the flat case.
    fn continuum_threshold(&self) -> f64 {
        match self.inner.continuum_threshold() {
            Threshold::Finite(v) => v,
            Threshold::Infinite => f64::INFINITY,
        }
    }

    /// `(r_min, u_min)` of the classical effective potential.
    fn classical_effective_minimum(&self, c_n: f64) -> PyResult<(f64, f64)> {
        let m = self.inner.classical_effective_minimum(c_n).map_err(py_err)?;
        Ok((m.r_min, m.u_min))
    }

    fn quantum_effective_minimum(&self, l: u32) -> PyResult<(f64, f64)> {
        let m = self.inner.quantum_effective_minimum(l).map_err(py_err)?;
        Ok((m.r_min, m.u_min))
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("ModelParams(dim={}, lam={}, omega={}, hbar={})", p.dim, p.lambda, p.omega, p.hbar)
    }
}

#[pyclass(name = "Operator", module = "darboux", eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyOperator {
    inner: OperatorExpr,
}

fn wrap(inner: OperatorExpr) -> PyOperator {
    PyOperator { inner }
}

#[pymethods]
impl PyOperator {
    /// Parses an operator such as `"(1/(2*D))*p1^2 + q1"` in `dim` variables.
    #[staticmethod]
    fn parse(text: &str, dim: usize) -> PyResult<Self> {
        algebra::parse(text, dim).map(wrap).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn commutator(&self, other: &PyOperator) -> PyResult<Self> {
        self.check(other)?;
        Ok(wrap(self.inner.commutator(&other.inner)))
    }

    fn formal_adjoint(&self) -> Self {
        wrap(self.inner.formal_adjoint())
    }

    fn flat_limit(&self) -> Self {
        wrap(self.inner.flat_limit())
    }

    /// `D^(num/den) X D^(-num/den)`.
    fn conjugate_by_d_power(&self, num: i64, den: i64) -> PyResult<Self> {
        if den == 0 {
            return Err(PyValueError::new_err("zero denominator"));
        }
        let a = BigRational::new(BigInt::from(num), BigInt::from(den));
        Ok(wrap(self.inner.conjugate_by_d_power(&a)))
    }

    fn __add__(&self, other: &PyOperator) -> PyResult<Self> {
        self.check(other)?;
        Ok(wrap(self.inner.add(&other.inner)))
    }

    fn __sub__(&self, other: &PyOperator) -> PyResult<Self> {
        self.check(other)?;
        Ok(wrap(self.inner.sub(&other.inner)))
    }

    fn __mul__(&self, other: &PyOperator) -> PyResult<Self> {
        self.check(other)?;
        Ok(wrap(self.inner.mul(&other.inner)))
    }

    fn __neg__(&self) -> Self {
        wrap(self.inner.neg())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Operator({:?}, dim={})", self.inner.to_string(), self.inner.dim())
    }
}

impl PyOperator {
    fn check(&self, other: &PyOperator) -> PyResult<()> {
        if self.inner.dim() != other.inner.dim() {
            return Err(PyValueError::new_err("operators act in different dimensions"));
        }
        Ok(())
    }
}

/// Hamiltonian of the given flavor: schrodinger, lb, tlb, pdm or tpdm.
#[pyfunction]
fn build_hamiltonian(name: &str, dim: usize) -> PyResult<PyOperator> {
    algebra::build_hamiltonian(flavor(name)?, dim).map(wrap).map_err(py_err)
}

/// Runs the commutator checks; returns a dict with `all_zero` and one
/// entry per relation.
#[pyfunction]
#[pyo3(signature = (name, dim, parts = None, corrupt = None))]
fn verify_theorem<'py>(
    py: Python<'py>,
    name: &str,
    dim: usize,
    parts: Option<Vec<String>>,
    corrupt: Option<String>,
) -> PyResult<Bound<'py, PyDict>> {
    let parts = match parts {
        Some(v) => v.iter().map(|s| s.parse::<TheoremPart>()).collect::<Result<_, _>>().map_err(py_err)?,
        None => TheoremPart::ALL.to_vec(),
    };
    let corrupt = corrupt.map(|c| c.parse::<Corruption>()).transpose().map_err(py_err)?;
    let flavor = flavor(name)?;
    let report = py
        .detach(|| algebra::verify_theorem(flavor, dim, &VerifyOptions { parts, corrupt }))
        .map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("flavor", report.flavor.as_str())?;
    out.set_item("N", report.dim)?;
    out.set_item("all_zero", report.all_zero())?;
    let checks: Vec<Bound<'py, PyDict>> = report
        .checks
        .iter()
        .map(|c| -> PyResult<_> {
            let d = PyDict::new(py);
            d.set_item("part", c.part.to_string())?;
            d.set_item("lhs", &c.lhs)?;
            d.set_item("rhs", &c.rhs)?;
            d.set_item("zero", c.commutator_zero)?;
            d.set_item("residual_terms", c.residual_terms)?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    out.set_item("checks", checks)?;
    Ok(out)
}

/// Lowest radial levels; one dict per level.
#[pyfunction]
#[pyo3(signature = (params, l, levels, points = spectra::radial::DEFAULT_POINTS))]
fn solve_bound_states<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    l: u32,
    levels: usize,
    points: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let p = params.inner;
    let report = py
        .detach(|| RadialProblem::auto(p, l, Flavor::Tlb, levels, points).and_then(|pr| spectra::solve_bound_states(&pr, levels)))
        .map_err(py_err)?;
    report
        .levels
        .iter()
        .map(|lv| {
            let d = PyDict::new(py);
            d.set_item("n_r", lv.n_r)?;
            d.set_item("n", lv.n)?;
            d.set_item("e_numeric", lv.e_numeric)?;
            d.set_item("e_closed", lv.e_closed)?;
            d.set_item("rel_residual", lv.rel_residual)?;
            d.set_item("convergence_order", lv.convergence_order)?;
            Ok(d)
        })
        .collect()
}

/// Independent discretizations of the three radial operators.
#[pyfunction]
fn isospectrality_check<'py>(py: Python<'py>, params: &PyModelParams, l: u32, levels: usize) -> PyResult<Bound<'py, PyDict>> {
    let p = params.inner;
    let rep = py.detach(|| spectra::isospectrality_check(&p, l, levels)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("agree", rep.agree)?;
    out.set_item("max_rel_diff", rep.pairs.iter().map(|x| x.max_rel_diff).fold(0.0, f64::max))?;
    out.set_item("closed_form", rep.closed_form.clone())?;
    let tables = PyDict::new(py);
    for t in &rep.tables {
        tables.set_item(t.flavor.as_str(), t.eigenvalues.clone())?;
    }
    out.set_item("tables", tables)?;
    Ok(out)
}

/// Unnormalized closed-form eigenfunction for a partition `(n_1, .., n_N)`.
#[pyfunction]
fn eigenfunction_value(params: &PyModelParams, partition: Vec<u32>, name: &str, q: Vec<f64>) -> PyResult<f64> {
    let ef = CartesianEigenfunction::new(partition, flavor(name)?).map_err(py_err)?;
    spectra::eigenfunction_value(&ef, &params.inner, &q).map_err(py_err)
}

/// Max relative residual of the eigenvalue equation at `points`.
#[pyfunction]
#[pyo3(signature = (params, partition, points, energy = None))]
fn eigenfunction_residual(params: &PyModelParams, partition: Vec<u32>, points: Vec<Vec<f64>>, energy: Option<f64>) -> PyResult<f64> {
    let ef = CartesianEigenfunction::new(partition, Flavor::Tlb).map_err(py_err)?;
    spectra::residual_check(&ef, &params.inner, &points, energy).map(|r| r.max_rel_residual).map_err(py_err)
}

/// `(cartesian, radial)` degeneracy counts of level `n`.
#[pyfunction]
fn degeneracy_census(dim: usize, n: u32) -> PyResult<(u128, u128)> {
    let c = spectra::degeneracy_census(dim, n).map_err(py_err)?;
    Ok((c.cartesian, c.radial))
}

fn state(q: Vec<f64>, p: Vec<f64>) -> PyResult<PhaseState> {
    PhaseState::new(q, p).map_err(py_err)
}

/// Constants of motion by name.
#[pyfunction]
fn classical_invariants(params: &PyModelParams, q: Vec<f64>, p: Vec<f64>) -> PyResult<Vec<(String, f64)>> {
    classical::classical_invariants(&params.inner, &state(q, p)?).map(|i| i.named()).map_err(py_err)
}

/// Integrates to `t_end`; returns the largest relative drift of any
/// constant of motion and the final `(q, p)`.
#[pyfunction]
#[pyo3(signature = (params, q, p, t_end, tol = 1e-10, samples = 101))]
fn integrate(
    py: Python<'_>,
    params: &PyModelParams,
    q: Vec<f64>,
    p: Vec<f64>,
    t_end: f64,
    tol: f64,
    samples: usize,
) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let s = state(q, p)?;
    let m = params.inner;
    let rec = py.detach(|| classical::integrate(&m, &s, t_end, tol, samples)).map_err(py_err)?;
    let last = rec.samples.last().cloned().unwrap_or(s);
    Ok((rec.max_drift(), last.q, last.p))
}

/// `(t_star, distance, closed)` of the first return to the initial point.
#[pyfunction]
#[pyo3(signature = (params, q, p, tol = 1e-10))]
fn orbit_closure(py: Python<'_>, params: &PyModelParams, q: Vec<f64>, p: Vec<f64>, tol: f64) -> PyResult<(f64, f64, bool)> {
    let s = state(q, p)?;
    let m = params.inner;
    let rep = py.detach(|| classical::orbit_closure(&m, &s, None, tol)).map_err(py_err)?;
    Ok((rep.t_star, rep.distance, rep.status == classical::ClosureStatus::Closed))
}

#[pymodule(name = "darboux")]
fn darboux_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(build_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bound_states, m)?)?;
    m.add_function(wrap_pyfunction!(isospectrality_check, m)?)?;
    m.add_function(wrap_pyfunction!(eigenfunction_value, m)?)?;
    m.add_function(wrap_pyfunction!(eigenfunction_residual, m)?)?;
    m.add_function(wrap_pyfunction!(degeneracy_census, m)?)?;
    m.add_function(wrap_pyfunction!(classical_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_closure, m)?)?;
    Ok(())
}
