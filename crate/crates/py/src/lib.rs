//! Python bindings: Pauli sums, problem specs, derivative reports, metrics
//! and the optimizer.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use symflow_core::cli::{self, GradKind};
use symflow_core::error::Error;
use symflow_core::liealg;
use symflow_core::natgrad::{self, Method, OptSettings};
use symflow_core::nummat::ComplexVector;
use symflow_core::pauli;
use symflow_core::problem::{self, ProblemSpec};

create_exception!(symflow, SpecError, PyValueError, "Invalid problem specification or arguments.");
create_exception!(symflow, AlgebraError, PyRuntimeError, "Algebra contract violation.");
create_exception!(symflow, NotConvergedError, PyRuntimeError, "Optimizer or closure did not converge.");

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match cli::exit_code(&e) {
        cli::EXIT_ALGEBRA => AlgebraError::new_err(msg),
        cli::EXIT_NOT_CONVERGED => NotConvergedError::new_err(msg),
        _ => SpecError::new_err(msg),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn grad_kind(s: &str) -> PyResult<GradKind> {
    match s {
        "partial" => Ok(GradKind::Partial),
        "equivariant" => Ok(GradKind::Equivariant),
        "covariant" => Ok(GradKind::Covariant),
        other => Err(SpecError::new_err(format!("unknown kind {other:?}"))),
    }
}

fn rows(m: &symflow_core::nummat::RealMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Sum of Pauli words with complex coefficients, e.g. `PauliSum("0.5*XX + ZI")`.
#[pyclass(name = "PauliSum", module = "symflow", skip_from_py_object)]
#[derive(Clone)]
struct PyPauliSum {
    inner: pauli::PauliSum,
}

#[pymethods]
impl PyPauliSum {
    #[new]
    #[pyo3(signature = (text, n_qubits=None))]
    fn new(text: &str, n_qubits: Option<usize>) -> PyResult<Self> {
        let inner = match n_qubits {
            Some(n) => pauli::PauliSum::parse_n(text, n),
            None => pauli::PauliSum::parse(text),
        }
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Pauli expansion of a `2^n x 2^n` matrix given as nested lists.
    #[staticmethod]
    fn from_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(SpecError::new_err("matrix must be square"));
        }
        let m = symflow_core::nummat::ComplexMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Ok(Self { inner: pauli::pauli_decompose(&m).map_err(to_py)?.chop(1e-14) })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn terms(&self) -> Vec<(String, Complex64)> {
        self.inner.terms().map(|(w, c)| (w.to_string(), *c)).collect()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.to_matrix();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn expectation(&self, state: Vec<Complex64>) -> PyResult<Complex64> {
        if state.len() != self.inner.dim() {
            return Err(SpecError::new_err(format!("state has length {}, expected {}", state.len(), self.inner.dim())));
        }
        Ok(self.inner.expectation(&ComplexVector::from_vec(state)))
    }

    fn is_hermitian(&self) -> bool {
        self.inner.is_hermitian(1e-12)
    }

    fn commutator(&self, other: &Self) -> PyResult<Self> {
        self.check_same(other)?;
        Ok(Self { inner: self.inner.commutator(&other.inner).chop(1e-14) })
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.check_same(other)?;
        Ok(Self { inner: self.inner.add(&other.inner) })
    }

    fn __matmul__(&self, other: &Self) -> PyResult<Self> {
        self.check_same(other)?;
        Ok(Self { inner: self.inner.mul(&other.inner) })
    }

    fn __mul__(&self, k: Complex64) -> Self {
        Self { inner: self.inner.scale(k) }
    }

    fn __rmul__(&self, k: Complex64) -> Self {
        self.__mul__(k)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PauliSum({:?})", self.inner.to_string())
    }
}

impl PyPauliSum {
    fn check_same(&self, other: &Self) -> PyResult<()> {
        if self.inner.n_qubits() != other.inner.n_qubits() {
            return Err(SpecError::new_err("Pauli sums act on different qubit counts"));
        }
        Ok(())
    }
}

/// A loaded problem: circuit, initial state, optional symmetry and cost.
#[pyclass(name = "Problem", module = "symflow")]
struct PyProblem {
    inner: ProblemSpec,
}

impl PyProblem {
    fn theta_or_default(&self, theta: Option<Vec<f64>>, seed: Option<u64>) -> PyResult<Vec<f64>> {
        match theta {
            Some(t) if t.len() != self.inner.circuit.n_params() => Err(SpecError::new_err(format!(
                "theta has {} entries, circuit has {} parameters",
                t.len(),
                self.inner.circuit.n_params()
            ))),
            Some(t) => Ok(t),
            None => Ok(self.inner.theta0(seed.unwrap_or(self.inner.optimizer.seed))),
        }
    }
}

#[pymethods]
impl PyProblem {
    /// Loads a JSON file path or `builtin:<name>`.
    #[staticmethod]
    fn load(source: &str) -> PyResult<Self> {
        Ok(Self { inner: ProblemSpec::load(source).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ProblemSpec::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.circuit.n_qubits()
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.circuit.n_params()
    }

    #[pyo3(signature = (seed=None))]
    fn theta0(&self, seed: Option<u64>) -> Vec<f64> {
        self.inner.theta0(seed.unwrap_or(self.inner.optimizer.seed))
    }

    /// Output state as a list of complex amplitudes.
    fn state(&self, theta: Vec<f64>) -> PyResult<Vec<Complex64>> {
        let psi = self.inner.circuit.apply(&theta, &self.inner.psi0).map_err(to_py)?;
        Ok(psi.iter().copied().collect())
    }

    /// Split of u(d) along the symmetry algebra. Returns `dims` as
    /// `[rest, commutant_reduced, center, t_reduced]` and a text report.
    fn decompose<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let sym = self.inner.symmetry.as_ref().ok_or_else(|| SpecError::new_err("spec has no symmetry block"))?;
        let dec = liealg::four_decomposition(sym.generators()).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("dims", dec.dims().to_vec())?;
        out.set_item("report", dec.report())?;
        Ok(out)
    }

    /// Derivative report as a dict. `kind` is partial, equivariant or covariant.
    #[pyo3(signature = (theta=None, kind="partial", seed=None))]
    fn grad<'py>(&self, py: Python<'py>, theta: Option<Vec<f64>>, kind: &str, seed: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
        let theta = self.theta_or_default(theta, seed)?;
        let report = cli::grad_report(&self.inner, &theta, grad_kind(kind)?).map_err(to_py)?;
        json_to_py(py, &report)
    }

    /// Fubini-Study metric, or the covariant metric when `covariant` is set.
    #[pyo3(signature = (theta, covariant=false))]
    fn metric(&self, theta: Vec<f64>, covariant: bool) -> PyResult<Vec<Vec<f64>>> {
        let c = &self.inner.circuit;
        let m = if covariant {
            let sym = self.inner.symmetry.as_ref().ok_or_else(|| SpecError::new_err("spec has no symmetry block"))?;
            natgrad::covariant_metric(sym, c, &theta, &self.inner.psi0)
        } else {
            natgrad::fubini_study(c, &theta, &self.inner.psi0)
        }
        .map_err(to_py)?;
        Ok(rows(&m.entries))
    }

    /// Runs the optimizer block. Returns `columns`, `rows` and `converged`;
    /// the rows match the CSV trace written by the command line tool.
    #[pyo3(signature = (seed=None, max_iter=None, lr=None, method=None))]
    fn optimize<'py>(
        &self,
        py: Python<'py>,
        seed: Option<u64>,
        max_iter: Option<usize>,
        lr: Option<f64>,
        method: Option<&str>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let p = &self.inner;
        let cost = p.cost.as_ref().ok_or_else(|| SpecError::new_err("spec has no observable or cost"))?;
        let o = &p.optimizer;
        let method = match method {
            Some(m) => m.parse::<Method>().map_err(to_py)?,
            None => o.method,
        };
        let settings = OptSettings { method, lr: lr.unwrap_or(o.lr), max_iter: max_iter.unwrap_or(o.max_iter), tol: o.tol };
        let theta0 = p.theta0(seed.unwrap_or(o.seed));
        let monitor = cli::monitor_for(p).map_err(to_py)?;
        let trace = natgrad::optimize(&settings, p.symmetry.as_ref(), &p.circuit, &theta0, &p.psi0, cost, monitor.as_ref())
            .map_err(to_py)?;
        let n = p.circuit.n_params();
        let mut columns = vec!["iter".to_string()];
        columns.extend((0..n).map(|j| format!("theta_{j}")));
        columns.extend(["cost".to_string(), "grad_norm".to_string()]);
        columns.extend(trace.extra_names.iter().cloned());
        let table = PyList::empty(py);
        for r in &trace.records {
            let mut row = vec![r.iter as f64];
            row.extend(&r.theta);
            row.extend([r.cost, r.grad_norm]);
            row.extend(&r.extras);
            table.append(row)?;
        }
        let out = PyDict::new(py);
        out.set_item("columns", columns)?;
        out.set_item("rows", table)?;
        out.set_item("converged", trace.converged)?;
        Ok(out)
    }
}

#[pyfunction]
fn builtin_names() -> Vec<&'static str> {
    problem::BUILTIN_NAMES.to_vec()
}

#[pymodule]
fn symflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPauliSum>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add("SpecError", m.py().get_type::<SpecError>())?;
    m.add("AlgebraError", m.py().get_type::<AlgebraError>())?;
    m.add("NotConvergedError", m.py().get_type::<NotConvergedError>())?;
    Ok(())
}
