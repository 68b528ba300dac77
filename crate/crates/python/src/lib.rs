//! Python bindings: catalog problems, the SQP solver, the direction-finding
//! QP, front filtering, metrics and the benchmark runner.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mosqp_core::bench::{self, RunConfig};
use mosqp_core::front::{self, FrontPoint};
use mosqp_core::metrics;
use mosqp_core::problem::{self as core_problem, ConstraintKind, EvalCounter, SmoothFn};
use mosqp_core::qp::{self, QpInstance};
use mosqp_core::solver::{self, SolverConfig, Status};
use mosqp_core::{catalog, Error};

create_exception!(mosqp, MosqpError, PyException);

fn to_py(e: Error) -> PyErr {
    MosqpError::new_err(e.to_string())
}

/// A multi-objective problem with box bounds and inequality constraints.
#[pyclass(name = "Problem", module = "mosqp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: core_problem::Problem,
}

fn py_value(f: Py<PyAny>) -> impl Fn(&[f64]) -> f64 + Send + Sync {
    move |x: &[f64]| {
        Python::attach(|py| {
            f.call1(py, (x.to_vec(),))
                .and_then(|v| v.extract::<f64>(py).map_err(PyErr::from))
                .unwrap_or(f64::NAN)
        })
    }
}

fn py_gradient(value: Py<PyAny>, grad: Option<Py<PyAny>>) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync {
    let fd = SmoothFn::without_gradient(py_value(Python::attach(|py| value.clone_ref(py))));
    move |x: &[f64]| match &grad {
        Some(g) => Python::attach(|py| {
            g.call1(py, (x.to_vec(),))
                .and_then(|v| v.extract::<Vec<f64>>(py).map_err(PyErr::from))
                .unwrap_or_else(|_| vec![f64::NAN; x.len()])
        }),
        None => fd.forward_difference(x),
    }
}

type Callable = (Py<PyAny>, Option<Py<PyAny>>);

#[pymethods]
impl PyProblem {
    /// Builds a problem from Python callables. `objectives` is a list of
    /// `(value, gradient_or_None)`; `constraints` a list of
    /// `(kind, value, gradient_or_None)` with kind `"linear"` or `"nonlinear"`,
    /// each meaning `value(x) <= 0`. Missing gradients use forward differences.
    #[new]
    #[pyo3(signature = (name, lower, upper, objectives, constraints=Vec::new()))]
    fn new(
        py: Python<'_>,
        name: String,
        lower: Vec<f64>,
        upper: Vec<f64>,
        objectives: Vec<Callable>,
        constraints: Vec<(String, Py<PyAny>, Option<Py<PyAny>>)>,
    ) -> PyResult<Self> {
        let mut b = core_problem::Problem::builder(name, lower, upper);
        for (value, grad) in objectives {
            let v2 = value.clone_ref(py);
            b = b.objective(py_value(value), py_gradient(v2, grad));
        }
        for (kind, value, grad) in constraints {
            let kind = match kind.as_str() {
                "linear" => ConstraintKind::Linear,
                "nonlinear" => ConstraintKind::Nonlinear,
                other => return Err(MosqpError::new_err(format!("unknown constraint kind {other:?}"))),
            };
            let v2 = value.clone_ref(py);
            b = b.constraint(kind, py_value(value), py_gradient(v2, grad));
        }
        Ok(Self {
            inner: b.build().map_err(to_py)?,
        })
    }

    /// Looks up a benchmark problem by name.
    #[staticmethod]
    fn from_catalog(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: catalog::lookup(name).map_err(to_py)?.problem,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    /// Number of constraint rows, bounds included.
    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.inner.lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.inner.upper().to_vec()
    }

    fn objectives(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.objective_values(&x).map_err(to_py)
    }

    fn objective_gradients(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        self.inner.objective_gradients(&x).map_err(to_py)
    }

    /// General constraints, then `l - x`, then `x - u`.
    fn constraints(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.constraint_values(&x).map_err(to_py)
    }

    /// Constraint violation `max(0, g_i(x))`.
    fn phi(&self, x: Vec<f64>) -> PyResult<f64> {
        core_problem::evaluate_phi(&self.inner, &x).map(|p| p.phi).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(name={:?}, n={}, m={}, p={})",
            self.inner.name(),
            self.inner.n(),
            self.inner.m(),
            self.inner.p()
        )
    }
}

#[pyclass(name = "SolverConfig", module = "mosqp", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    r: f64,
    beta: f64,
    sigma0: f64,
    epsilon: f64,
    max_iters: usize,
    sigma_cap: f64,
}

impl From<SolverConfig> for PySolverConfig {
    fn from(c: SolverConfig) -> Self {
        Self {
            r: c.r,
            beta: c.beta,
            sigma0: c.sigma0,
            epsilon: c.epsilon,
            max_iters: c.max_iters,
            sigma_cap: c.sigma_cap,
        }
    }
}

impl From<&PySolverConfig> for SolverConfig {
    fn from(c: &PySolverConfig) -> Self {
        SolverConfig {
            r: c.r,
            beta: c.beta,
            sigma0: c.sigma0,
            epsilon: c.epsilon,
            max_iters: c.max_iters,
            sigma_cap: c.sigma_cap,
        }
    }
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut c = PySolverConfig::from(SolverConfig::default());
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                match key.as_str() {
                    "r" => c.r = v.extract()?,
                    "beta" => c.beta = v.extract()?,
                    "sigma0" => c.sigma0 = v.extract()?,
                    "epsilon" => c.epsilon = v.extract()?,
                    "max_iters" => c.max_iters = v.extract()?,
                    "sigma_cap" => c.sigma_cap = v.extract()?,
                    other => return Err(MosqpError::new_err(format!("unknown option {other:?}"))),
                }
            }
        }
        SolverConfig::from(&c).validate().map_err(to_py)?;
        Ok(c)
    }

    fn __repr__(&self) -> String {
        format!(
            "SolverConfig(r={}, beta={}, sigma0={}, epsilon={}, max_iters={}, sigma_cap={})",
            self.r, self.beta, self.sigma0, self.epsilon, self.max_iters, self.sigma_cap
        )
    }
}

/// Result of one solve.
#[pyclass(name = "SolveOutcome", module = "mosqp", frozen, get_all)]
struct PySolveOutcome {
    status: String,
    x: Vec<f64>,
    f: Vec<f64>,
    phi: f64,
    d_norm: f64,
    lam: Vec<f64>,
    mu: Vec<f64>,
    sigma: f64,
    iterations: usize,
    num_f: u64,
    num_grad_f: u64,
    message: Option<String>,
    /// Per-iteration records as dicts with keys `k, x, t, d_norm, sigma, alpha, phi, theta`.
    trace: Vec<BTreeMap<String, Py<PyAny>>>,
}

#[pymethods]
impl PySolveOutcome {
    fn __repr__(&self) -> String {
        format!(
            "SolveOutcome(status={}, x={:?}, f={:?}, phi={:e}, iterations={})",
            self.status, self.x, self.f, self.phi, self.iterations
        )
    }
}

fn resolve_config(config: Option<PyRef<'_, PySolverConfig>>) -> SolverConfig {
    config.map(|c| SolverConfig::from(&*c)).unwrap_or_default()
}

/// Runs the SQP method from `x0`.
#[pyfunction]
#[pyo3(signature = (problem, x0, config=None))]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    x0: Vec<f64>,
    config: Option<PyRef<'_, PySolverConfig>>,
) -> PyResult<PySolveOutcome> {
    let cfg = resolve_config(config);
    let inner = problem.inner.clone();
    let out = py.detach(move || solver::solve(&inner, &x0, &cfg)).map_err(to_py)?;
    let mut trace = Vec::with_capacity(out.trace.len());
    for rec in &out.trace {
        let mut row: BTreeMap<String, Py<PyAny>> = BTreeMap::new();
        row.insert("k".into(), rec.k.into_pyobject(py)?.into_any().unbind());
        row.insert("x".into(), rec.x.clone().into_pyobject(py)?.into_any().unbind());
        for (key, v) in [("t", rec.t), ("d_norm", rec.d_norm), ("sigma", rec.sigma), ("alpha", rec.alpha), ("phi", rec.phi)] {
            row.insert(key.into(), v.into_pyobject(py)?.into_any().unbind());
        }
        row.insert("theta".into(), rec.thetas.clone().into_pyobject(py)?.into_any().unbind());
        trace.push(row);
    }
    Ok(PySolveOutcome {
        status: out.status.to_string(),
        x: out.final_x,
        f: out.final_f,
        phi: out.final_phi,
        d_norm: out.final_d_norm,
        lam: out.lambda,
        mu: out.mu,
        sigma: out.sigma,
        iterations: out.iterations,
        num_f: out.evals.num_f,
        num_grad_f: out.evals.num_grad_f,
        message: out.message,
        trace,
    })
}

/// Minimizes `sum_j w_j f_j` from `x0` with the same solver in single-objective mode.
#[pyfunction]
#[pyo3(signature = (problem, weights, x0, config=None))]
fn weighted_sum_solve(
    py: Python<'_>,
    problem: &PyProblem,
    weights: Vec<f64>,
    x0: Vec<f64>,
    config: Option<PyRef<'_, PySolverConfig>>,
) -> PyResult<PySolveOutcome> {
    let scalar = PyProblem {
        inner: problem.inner.weighted_sum(&weights).map_err(to_py)?,
    };
    let mut out = solve(py, &scalar, x0, config)?;
    out.f = problem.inner.objective_values(&out.x).map_err(to_py)?;
    Ok(out)
}

/// Solves the direction-finding QP `min t + |d|^2/2` subject to
/// `grad_f[j].d <= t` and `g[i] + grad_g[i].d <= t`.
#[pyfunction]
#[pyo3(signature = (grad_f, grad_g, g))]
fn solve_qp<'py>(py: Python<'py>, grad_f: Vec<Vec<f64>>, grad_g: Vec<Vec<f64>>, g: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let inst = QpInstance::new(grad_f, grad_g, g).map_err(to_py)?;
    let sol = qp::solve_qp(&inst).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t", sol.t)?;
    d.set_item("d", sol.d.clone())?;
    d.set_item("lam", sol.lambda.clone())?;
    d.set_item("mu", sol.mu.clone())?;
    d.set_item("objective", sol.objective())?;
    d.set_item("kkt_residual", sol.kkt_residual)?;
    d.set_item("iterations", sol.iterations)?;
    Ok(d)
}

/// Names of all catalog problems.
#[pyfunction]
fn problem_names() -> Vec<String> {
    catalog::names()
}

/// Names of the problems in the default benchmark.
#[pyfunction]
fn default_problems() -> Vec<String> {
    catalog::DEFAULT_PROBLEMS.iter().map(|s| s.to_string()).collect()
}

#[pyfunction]
fn line_starts(problem: &PyProblem, count: usize) -> PyResult<Vec<Vec<f64>>> {
    front::line_starts(&problem.inner, count).map_err(to_py)
}

#[pyfunction]
fn rand_starts(problem: &PyProblem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    front::rand_starts(&problem.inner, count, seed)
}

fn points_from(values: &[Vec<f64>]) -> Vec<FrontPoint> {
    values
        .iter()
        .enumerate()
        .map(|(i, f)| FrontPoint {
            x: Vec::new(),
            f: f.clone(),
            phi: 0.0,
            feasible: true,
            status: Status::StronglyCritical,
            run_id: 0,
            start_id: i,
        })
        .collect()
}

fn front_from(values: &[Vec<f64>]) -> front::Front {
    front::Front {
        solver: String::new(),
        points: points_from(values),
        evals: EvalCounter::default(),
    }
}

/// Indices of the objective vectors that survive duplicate collapse and
/// dominance filtering, in input order.
#[pyfunction]
fn nondominated(values: Vec<Vec<f64>>) -> Vec<usize> {
    front::nondominated_filter(points_from(&values))
        .into_iter()
        .map(|p| p.start_id)
        .collect()
}

/// Non-dominated union of several fronts.
#[pyfunction]
fn reference_front(fronts: Vec<Vec<Vec<f64>>>) -> Vec<Vec<f64>> {
    let fs: Vec<front::Front> = fronts.iter().map(|f| front_from(f)).collect();
    front::build_reference_front(&fs).objective_vectors()
}

#[pyfunction]
fn purity(front: Vec<Vec<f64>>, reference: Vec<Vec<f64>>) -> PyResult<f64> {
    metrics::purity(&front_from(&front), &front_from(&reference)).map_err(to_py)
}

#[pyfunction]
fn gamma_spread(front: Vec<Vec<f64>>, extremes: Vec<(f64, f64)>) -> PyResult<f64> {
    metrics::gamma_spread(&front, &extremes).map_err(to_py)
}

#[pyfunction]
fn delta_spread(front: Vec<Vec<f64>>, extremes: Vec<(f64, f64)>) -> PyResult<f64> {
    metrics::delta_spread(&front, &extremes).map_err(to_py)
}

/// Returns `{solver: [(tau, rho), ...]}` and the excluded problem indices.
#[pyfunction]
fn performance_profile(
    solvers: Vec<String>,
    scores: Vec<Vec<f64>>,
) -> PyResult<(BTreeMap<String, Vec<(f64, f64)>>, Vec<usize>)> {
    let p = metrics::performance_profile(&solvers, &scores).map_err(to_py)?;
    Ok((p.curves.into_iter().map(|c| (c.solver, c.samples)).collect(), p.excluded))
}

#[pyfunction]
fn fe1(num_f: u64, num_grad_f: u64, n: usize, n1: usize) -> PyResult<f64> {
    metrics::fe1(&EvalCounter { num_f, num_grad_f }, n, n1).map_err(to_py)
}

/// Runs a benchmark grid. `config` is TOML text (empty for defaults); the
/// keyword arguments override it. Returns the list of written files.
#[pyfunction]
#[pyo3(signature = (output_dir, config="", seed=None))]
fn run_benchmark(py: Python<'_>, output_dir: PathBuf, config: &str, seed: Option<u64>) -> PyResult<Vec<String>> {
    let mut cfg = RunConfig::from_toml_str(config).map_err(to_py)?;
    cfg.output_dir = output_dir;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let summary = py.detach(|| bench::run_benchmark(&cfg)).map_err(to_py)?;
    let mut files: Vec<String> = summary.files.into_keys().collect();
    files.push(bench::MANIFEST_FILE.to_string());
    Ok(files)
}

/// Summary table for a benchmark output directory.
#[pyfunction]
fn report(dir: PathBuf) -> PyResult<String> {
    bench::report(&dir).map_err(to_py)
}

#[pymodule]
fn mosqp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MosqpError", m.py().get_type::<MosqpError>())?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PySolveOutcome>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_sum_solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_qp, m)?)?;
    m.add_function(wrap_pyfunction!(problem_names, m)?)?;
    m.add_function(wrap_pyfunction!(default_problems, m)?)?;
    m.add_function(wrap_pyfunction!(line_starts, m)?)?;
    m.add_function(wrap_pyfunction!(rand_starts, m)?)?;
    m.add_function(wrap_pyfunction!(nondominated, m)?)?;
    m.add_function(wrap_pyfunction!(reference_front, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_spread, m)?)?;
    m.add_function(wrap_pyfunction!(delta_spread, m)?)?;
    m.add_function(wrap_pyfunction!(performance_profile, m)?)?;
    m.add_function(wrap_pyfunction!(fe1, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
