//! Problem abstraction, evaluation counting and the L-infinity penalty machinery.
//!
//! A [`Problem`] carries `m` smooth objectives, a list of general inequality
//! constraints `g_i(x) <= 0` and a box `l <= x <= u`. The box is always
//! expanded into `2n` explicit constraints so the solver sees one uniform
//! constraint list, ordered as: general constraints, then `l_i - x_i`, then
//! `x_i - u_i`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tie tolerance used when collecting the most violated constraints `I(x)`.
pub const ACTIVE_TIE_TOL: f64 = 1e-10;

/// `Phi(x)` at or below this value is reported as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Relative forward-difference step.
pub const FD_STEP: f64 = 1e-7;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A smooth scalar function with an optional analytic gradient.
///
/// Without an analytic gradient, [`SmoothFn::gradient`] falls back to forward
/// differences with step `1e-7 * max(1, |x_i|)`.
#[derive(Clone)]
pub struct SmoothFn {
    value: ValueFn,
    gradient: Option<GradientFn>,
}

impl SmoothFn {
    pub fn new<F, G>(value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
        }
    }

    pub fn without_gradient<F>(value: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.gradient {
            Some(g) => g(x),
            None => self.forward_difference(x),
        }
    }

    /// Forward-difference gradient, regardless of whether an analytic one exists.
    pub fn forward_difference(&self, x: &[f64]) -> Vec<f64> {
        let f0 = self.value(x);
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = FD_STEP * x[i].abs().max(1.0);
                probe[i] = x[i] + h;
                let fi = self.value(&probe);
                probe[i] = x[i];
                (fi - f0) / h
            })
            .collect()
    }

    /// Central-difference gradient with step `h * max(1, |x_i|)`.
    pub fn central_difference(&self, x: &[f64], h: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|i| {
                let step = h * x[i].abs().max(1.0);
                probe[i] = x[i] + step;
                let fp = self.value(&probe);
                probe[i] = x[i] - step;
                let fm = self.value(&probe);
                probe[i] = x[i];
                (fp - fm) / (2.0 * step)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    Linear,
    Nonlinear,
}

#[derive(Clone)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub func: SmoothFn,
}

/// Inequality-constrained multi-objective problem. Immutable once built.
#[derive(Clone)]
pub struct Problem {
    name: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objectives: Vec<SmoothFn>,
    constraints: Vec<Constraint>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("m", &self.m())
            .field("p", &self.p())
            .finish()
    }
}

impl Problem {
    pub fn builder(name: impl Into<String>, lower: Vec<f64>, upper: Vec<f64>) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            lower,
            upper,
            objectives: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.lower.len()
    }

    pub fn m(&self) -> usize {
        self.objectives.len()
    }

    /// Number of inequality constraints after bound expansion.
    pub fn p(&self) -> usize {
        self.constraints.len() + 2 * self.n()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn objectives(&self) -> &[SmoothFn] {
        &self.objectives
    }

    /// General (non-bound) constraints.
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn count_constraints(&self, kind: ConstraintKind) -> usize {
        self.constraints.iter().filter(|c| c.kind == kind).count()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64], j: usize) -> Result<f64> {
        self.check_dim(x)?;
        let v = self.objectives[j].value(x);
        if !v.is_finite() {
            return Err(Error::Evaluation {
                what: "objective",
                index: j,
            });
        }
        Ok(v)
    }

    pub fn objective_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.m()).map(|j| self.objective_value(x, j)).collect()
    }

    pub fn objective_gradients(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        self.objectives
            .iter()
            .enumerate()
            .map(|(j, f)| finite_row(f.gradient(x), "objective gradient", j))
            .collect()
    }

    /// All `p` constraint values, bounds included.
    pub fn constraint_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = Vec::with_capacity(self.p());
        for (i, c) in self.constraints.iter().enumerate() {
            let v = c.func.value(x);
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    what: "constraint",
                    index: i,
                });
            }
            out.push(v);
        }
        out.extend(self.lower.iter().zip(x).map(|(l, xi)| l - xi));
        out.extend(x.iter().zip(&self.upper).map(|(xi, u)| xi - u));
        Ok(out)
    }

    /// All `p` constraint gradients, bounds included.
    pub fn constraint_gradients(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        let n = self.n();
        let mut out = Vec::with_capacity(self.p());
        for (i, c) in self.constraints.iter().enumerate() {
            out.push(finite_row(c.func.gradient(x), "constraint gradient", i)?);
        }
        for sign in [-1.0, 1.0] {
            for i in 0..n {
                let mut row = vec![0.0; n];
                row[i] = sign;
                out.push(row);
            }
        }
        Ok(out)
    }

    /// Componentwise uniform box midpoint `(l + u) / 2`.
    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Single-objective problem `sum_j w_j f_j` over the same constraints.
    pub fn weighted_sum(&self, weights: &[f64]) -> Result<Problem> {
        if weights.len() != self.m() {
            return Err(Error::Dimension {
                expected: self.m(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidProblem(
                "weights must be non-negative and not all zero".into(),
            ));
        }
        let w: Arc<[f64]> = weights.into();
        let objs: Arc<[SmoothFn]> = self.objectives.clone().into();
        let (wv, ov) = (w.clone(), objs.clone());
        let value = move |x: &[f64]| wv.iter().zip(ov.iter()).map(|(w, f)| w * f.value(x)).sum();
        let gradient = move |x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            for (w, f) in w.iter().zip(objs.iter()) {
                if *w == 0.0 {
                    continue;
                }
                for (gi, fi) in g.iter_mut().zip(f.gradient(x)) {
                    *gi += w * fi;
                }
            }
            g
        };
        Ok(Problem {
            name: format!("{}[weighted]", self.name),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            objectives: vec![SmoothFn::new(value, gradient)],
            constraints: self.constraints.clone(),
        })
    }
}

fn finite_row(row: Vec<f64>, what: &'static str, index: usize) -> Result<Vec<f64>> {
    if row.iter().all(|v| v.is_finite()) {
        Ok(row)
    } else {
        Err(Error::Evaluation { what, index })
    }
}

pub struct ProblemBuilder {
    name: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objectives: Vec<SmoothFn>,
    constraints: Vec<Constraint>,
}

impl ProblemBuilder {
    pub fn objective<F, G>(mut self, value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.objectives.push(SmoothFn::new(value, gradient));
        self
    }

    /// Objective whose gradient is synthesized by forward differences.
    pub fn objective_fd<F>(mut self, value: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.objectives.push(SmoothFn::without_gradient(value));
        self
    }

    pub fn smooth_objective(mut self, f: SmoothFn) -> Self {
        self.objectives.push(f);
        self
    }

    pub fn constraint<F, G>(mut self, kind: ConstraintKind, value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.constraints.push(Constraint {
            kind,
            func: SmoothFn::new(value, gradient),
        });
        self
    }

    pub fn build(self) -> Result<Problem> {
        let n = self.lower.len();
        if n == 0 {
            return Err(Error::InvalidProblem("dimension must be at least 1".into()));
        }
        if self.upper.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.upper.len(),
            });
        }
        for (i, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidProblem(format!(
                    "bounds must be finite with l < u (coordinate {i}: [{l}, {u}])"
                )));
            }
        }
        if self.objectives.is_empty() {
            return Err(Error::InvalidProblem("at least one objective is required".into()));
        }
        Ok(Problem {
            name: self.name,
            lower: self.lower,
            upper: self.upper,
            objectives: self.objectives,
            constraints: self.constraints,
        })
    }
}

/// Per-run evaluation counts: `#f` vector-objective evaluations and `#grad f`
/// vector-gradient evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounter {
    pub num_f: u64,
    pub num_grad_f: u64,
}

impl EvalCounter {
    pub fn merge(&mut self, other: &EvalCounter) {
        self.num_f += other.num_f;
        self.num_grad_f += other.num_grad_f;
    }
}

/// Counts objective evaluations against a problem for the duration of one run.
pub struct Evaluator<'a> {
    problem: &'a Problem,
    counter: EvalCounter,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        Self {
            problem,
            counter: EvalCounter::default(),
        }
    }

    pub fn problem(&self) -> &'a Problem {
        self.problem
    }

    pub fn counter(&self) -> EvalCounter {
        self.counter
    }

    pub fn objectives(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.counter.num_f += 1;
        self.problem.objective_values(x)
    }

    pub fn objective_gradients(&mut self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.counter.num_grad_f += 1;
        self.problem.objective_gradients(x)
    }
}

/// `Phi(x) = max(0, g_1(x), ..., g_p(x))` together with `I(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyValue {
    pub phi: f64,
    pub active_set: Vec<usize>,
}

impl PenaltyValue {
    pub fn from_constraint_values(g: &[f64]) -> Result<Self> {
        if let Some(index) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                what: "constraint",
                index,
            });
        }
        let phi = g.iter().copied().fold(0.0_f64, f64::max);
        let active_set = g
            .iter()
            .enumerate()
            .filter(|(_, v)| **v >= phi - ACTIVE_TIE_TOL)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { phi, active_set })
    }

    pub fn is_feasible(&self) -> bool {
        self.phi <= FEASIBILITY_TOL
    }
}

pub fn evaluate_phi(problem: &Problem, x: &[f64]) -> Result<PenaltyValue> {
    PenaltyValue::from_constraint_values(&problem.constraint_values(x)?)
}

/// Merit function `Psi_{j,sigma}(x) = f_j(x) + sigma * Phi(x)`.
pub fn merit(problem: &Problem, x: &[f64], j: usize, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!("penalty weight must be positive, got {sigma}")));
    }
    let fj = problem.objective_value(x, j)?;
    Ok(fj + sigma * evaluate_phi(problem, x)?.phi)
}

/// Continuous approximation of the directional derivative of `Phi`, from
/// precomputed constraint data at `x`.
pub fn phi_star_from_parts(g: &[f64], grad_g: &[Vec<f64>], active: &PenaltyValue, d: &[f64]) -> f64 {
    let linearized = active
        .active_set
        .iter()
        .map(|&i| g[i] + dot(&grad_g[i], d))
        .fold(0.0_f64, f64::max);
    linearized - active.phi
}

pub fn phi_star(problem: &Problem, x: &[f64], d: &[f64], active: &PenaltyValue) -> Result<f64> {
    if d.len() != problem.n() {
        return Err(Error::Dimension {
            expected: problem.n(),
            got: d.len(),
        });
    }
    let g = problem.constraint_values(x)?;
    let grad_g = problem.constraint_gradients(x)?;
    Ok(phi_star_from_parts(&g, &grad_g, active, d))
}

/// `theta_{j,sigma}(x; d) = grad f_j(x)^T d + sigma * Phi*(x; d)`.
pub fn theta(problem: &Problem, x: &[f64], d: &[f64], j: usize, sigma: f64) -> Result<f64> {
    let active = evaluate_phi(problem, x)?;
    let ps = phi_star(problem, x, d, &active)?;
    let grad = finite_row(problem.objectives[j].gradient(x), "objective gradient", j)?;
    Ok(dot(&grad, d) + sigma * ps)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
