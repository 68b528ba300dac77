//! Penalty-based SQP iteration for inequality-constrained multi-objective problems.
//!
//! Each iteration solves the direction-finding QP at `x^k`, stops when the
//! direction is shorter than `epsilon` at a feasible point, raises the penalty weight when the
//! direction is not a slope-`1/2 |d|^2` descent direction of every merit
//! function `f_j + sigma * Phi`, and backtracks along `{1, r, r^2, ...}` until
//! all merit functions decrease by the Armijo fraction simultaneously.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{dot, norm2, phi_star_from_parts, EvalCounter, Evaluator, PenaltyValue, Problem, FEASIBILITY_TOL};
use crate::qp::{solve_qp, QpInstance, QpSolution};

/// Penalty values at or below this are treated as exactly feasible when
/// deciding whether the penalty weight may stay unchanged.
pub const PHI_ZERO_TOL: f64 = 1e-12;

/// `Phi*` must be below `-PHI_STAR_GUARD` before the penalty update divides by it.
pub const PHI_STAR_GUARD: f64 = 1e-12;

/// Smallest admissible step length.
pub const MIN_ALPHA: f64 = 1e-16;

/// `lambda_j` above this counts as positive in strong-criticality classification.
pub const LAMBDA_POSITIVE_TOL: f64 = 1e-8;

/// Number of trailing iterations inspected by the stall heuristic.
const STALL_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Backtracking factor in (0, 1).
    pub r: f64,
    /// Armijo slope fraction in (0, 1).
    pub beta: f64,
    pub sigma0: f64,
    /// Stop once `|d| < epsilon` and `Phi <= FEASIBILITY_TOL`.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Penalty growth beyond this aborts the run as weakly critical.
    pub sigma_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            r: 0.5,
            beta: 0.1,
            sigma0: 1.0,
            epsilon: 1e-5,
            max_iters: 500,
            sigma_cap: 1e8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.r > 0.0 && self.r < 1.0) {
            return bad("r must lie in (0, 1)");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return bad("sigma0 must be positive");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.sigma_cap >= self.sigma0) {
            return bad("sigma_cap must be at least sigma0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Status {
    StronglyCritical,
    WeaklyCriticalSuspected,
    MaxIterations,
    QpFailure,
    LineSearchFailure,
}

impl Status {
    pub const ALL: [Status; 5] = [
        Status::StronglyCritical,
        Status::WeaklyCriticalSuspected,
        Status::MaxIterations,
        Status::QpFailure,
        Status::LineSearchFailure,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::StronglyCritical => "StronglyCritical",
            Status::WeaklyCriticalSuspected => "WeaklyCriticalSuspected",
            Status::MaxIterations => "MaxIterations",
            Status::QpFailure => "QpFailure",
            Status::LineSearchFailure => "LineSearchFailure",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        Status::ALL.into_iter().find(|st| st.as_str() == s)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State carried between iterations.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub sigma: f64,
    pub phi: PenaltyValue,
    pub qp: Option<QpSolution>,
    pub alpha: Option<f64>,
}

/// One accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub phi: f64,
    pub t: f64,
    pub d: Vec<f64>,
    pub d_norm: f64,
    pub kkt_residual: f64,
    /// `grad f_j(x^k)' d^k`
    pub slopes: Vec<f64>,
    pub phi_star: f64,
    /// `sigma_k`
    pub sigma_prev: f64,
    /// `sigma_{k+1}`, the weight used by the line search
    pub sigma: f64,
    /// `theta_{j, sigma_{k+1}}(x^k; d^k)`
    pub thetas: Vec<f64>,
    pub alpha: f64,
    pub f_next: Vec<f64>,
    pub phi_next: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: Status,
    pub final_x: Vec<f64>,
    pub final_f: Vec<f64>,
    pub final_phi: f64,
    /// `|d|` of the last QP solved (NaN if none was solved).
    pub final_d_norm: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub evals: EvalCounter,
    pub config: SolverConfig,
    /// Diagnostic for the failure statuses.
    pub message: Option<String>,
}

impl SolveOutcome {
    pub fn is_feasible(&self) -> bool {
        self.final_phi <= FEASIBILITY_TOL
    }

    /// Terminated on the direction-norm test.
    pub fn converged(&self) -> bool {
        self.final_d_norm < self.config.epsilon
    }
}

/// Result of the penalty update step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaUpdate {
    pub sigma: f64,
    pub updated: bool,
}

/// Keeps `sigma` when `x` is feasible or every `theta_j <= -1/2 d'd`;
/// otherwise returns `max(2 sigma, max_j (slope_j + 1/2 d'd) / -Phi*)`.
///
/// `slopes[j]` is `grad f_j(x)' d` and `half_dd` is `1/2 d'd`.
pub fn update_sigma(sigma: f64, phi: f64, slopes: &[f64], half_dd: f64, phi_star: f64) -> Result<SigmaUpdate> {
    let keep = SigmaUpdate { sigma, updated: false };
    if phi <= PHI_ZERO_TOL {
        return Ok(keep);
    }
    if slopes.iter().all(|s| s + sigma * phi_star <= -half_dd) {
        return Ok(keep);
    }
    if phi_star >= -PHI_STAR_GUARD {
        return Err(Error::PenaltyUpdateDegenerate { phi_star });
    }
    let needed = slopes
        .iter()
        .map(|s| (s + half_dd) / -phi_star)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SigmaUpdate {
        sigma: (2.0 * sigma).max(needed),
        updated: true,
    })
}

/// Armijo test on every merit function at once.
pub fn armijo_holds(f: &[f64], phi: f64, f_trial: &[f64], phi_trial: f64, thetas: &[f64], sigma: f64, alpha: f64, beta: f64) -> bool {
    f.iter()
        .zip(f_trial)
        .zip(thetas)
        .all(|((fj, ftj), th)| (ftj + sigma * phi_trial) - (fj + sigma * phi) <= alpha * beta * th)
}

struct Accepted {
    alpha: f64,
    x: Vec<f64>,
    f: Vec<f64>,
    penalty: PenaltyValue,
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    ev: &mut Evaluator<'_>,
    x: &[f64],
    d: &[f64],
    f: &[f64],
    phi: f64,
    thetas: &[f64],
    sigma: f64,
    config: &SolverConfig,
) -> Result<Accepted> {
    let mut alpha = 1.0;
    while alpha >= MIN_ALPHA {
        let trial: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        // a trial point where the problem cannot be evaluated is simply rejected
        let evaluated = ev.objectives(&trial).and_then(|ft| {
            let g = ev.problem().constraint_values(&trial)?;
            Ok((ft, PenaltyValue::from_constraint_values(&g)?))
        });
        if let Ok((f_trial, penalty)) = evaluated {
            if armijo_holds(f, phi, &f_trial, penalty.phi, thetas, sigma, alpha, config.beta) {
                return Ok(Accepted {
                    alpha,
                    x: trial,
                    f: f_trial,
                    penalty,
                });
            }
        }
        alpha *= config.r;
    }
    Err(Error::LineSearchFailure { min_alpha: MIN_ALPHA })
}

/// Step length along `d` at `x` for penalty weight `sigma`: the first element
/// of `{1, r, r^2, ...}` satisfying the Armijo condition for all objectives.
pub fn line_search(problem: &Problem, x: &[f64], d: &[f64], sigma: f64, config: &SolverConfig) -> Result<f64> {
    config.validate()?;
    let mut ev = Evaluator::new(problem);
    let f = ev.objectives(x)?;
    let g = problem.constraint_values(x)?;
    let grad_g = problem.constraint_gradients(x)?;
    let penalty = PenaltyValue::from_constraint_values(&g)?;
    let ps = phi_star_from_parts(&g, &grad_g, &penalty, d);
    let thetas: Vec<f64> = ev
        .objective_gradients(x)?
        .iter()
        .map(|row| dot(row, d) + sigma * ps)
        .collect();
    backtrack(&mut ev, x, d, &f, penalty.phi, &thetas, sigma, config).map(|a| a.alpha)
}

/// Final quantities used to classify a terminated run.
#[derive(Debug, Clone, Copy)]
pub struct FinalState<'a> {
    pub d_norm: f64,
    pub phi: f64,
    pub lambda: &'a [f64],
    pub sigma: f64,
}

/// Strongly critical when the direction vanished at a feasible point with a
/// non-zero objective multiplier; weakly critical (suspected) on penalty
/// blow-up, on a vanishing direction that is not strongly critical, or when
/// the tail of the trace shows a stalled direction with a growing penalty and
/// shrinking infeasibility; `MaxIterations` otherwise.
pub fn classify_outcome(trace: &[TraceRecord], last: &FinalState<'_>, config: &SolverConfig) -> Status {
    let converged = last.d_norm < config.epsilon;
    let has_lambda = last.lambda.iter().any(|l| *l > LAMBDA_POSITIVE_TOL);
    if converged && last.phi <= FEASIBILITY_TOL && has_lambda {
        return Status::StronglyCritical;
    }
    if last.sigma > config.sigma_cap || converged {
        return Status::WeaklyCriticalSuspected;
    }
    if stalled_with_growing_penalty(trace) {
        return Status::WeaklyCriticalSuspected;
    }
    Status::MaxIterations
}

fn stalled_with_growing_penalty(trace: &[TraceRecord]) -> bool {
    if trace.len() < STALL_WINDOW {
        return false;
    }
    let window = &trace[trace.len() - STALL_WINDOW..];
    let (first, last) = (&window[0], &window[window.len() - 1]);
    last.sigma > first.sigma_prev && first.phi > 0.0 && last.phi_next < first.phi && last.d_norm >= 0.5 * first.d_norm
}

/// `max(|sum lambda_j grad f_j + sum mu_i grad g_i|_inf, max_i |mu_i g_i|)` at `x`.
pub fn fritz_john_residual(problem: &Problem, x: &[f64], lambda: &[f64], mu: &[f64]) -> Result<f64> {
    let grad_f = problem.objective_gradients(x)?;
    let grad_g = problem.constraint_gradients(x)?;
    let g = problem.constraint_values(x)?;
    let mut v = vec![0.0; problem.n()];
    for (w, row) in lambda.iter().zip(&grad_f).chain(mu.iter().zip(&grad_g)) {
        for (vi, ri) in v.iter_mut().zip(row) {
            *vi += w * ri;
        }
    }
    let stationarity = v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let complementarity = mu.iter().zip(&g).fold(0.0_f64, |a, (u, gi)| a.max((u * gi).abs()));
    Ok(stationarity.max(complementarity))
}

pub fn solve(problem: &Problem, x0: &[f64], config: &SolverConfig) -> Result<SolveOutcome> {
    config.validate()?;
    if x0.len() != problem.n() {
        return Err(Error::Dimension {
            expected: problem.n(),
            got: x0.len(),
        });
    }
    let mut ev = Evaluator::new(problem);
    let f0 = ev.objectives(x0)?;
    let phi0 = PenaltyValue::from_constraint_values(&problem.constraint_values(x0)?)?;
    let mut state = IterateState {
        k: 0,
        x: x0.to_vec(),
        f: f0,
        sigma: config.sigma0,
        phi: phi0,
        qp: None,
        alpha: None,
    };
    let mut trace = Vec::new();

    let finish = |state: IterateState, trace: Vec<TraceRecord>, ev: &Evaluator<'_>, status: Option<Status>, message: Option<String>| {
        let (d_norm, lambda, mu) = match &state.qp {
            Some(qp) => (qp.d_norm(), qp.lambda.clone(), qp.mu.clone()),
            None => (f64::NAN, Vec::new(), Vec::new()),
        };
        let status = status.unwrap_or_else(|| {
            classify_outcome(
                &trace,
                &FinalState {
                    d_norm,
                    phi: state.phi.phi,
                    lambda: &lambda,
                    sigma: state.sigma,
                },
                config,
            )
        });
        SolveOutcome {
            status,
            final_x: state.x,
            final_f: state.f,
            final_phi: state.phi.phi,
            final_d_norm: d_norm,
            lambda,
            mu,
            sigma: state.sigma,
            iterations: state.k,
            trace,
            evals: ev.counter(),
            config: *config,
            message,
        }
    };

    loop {
        let grads = ev.objective_gradients(&state.x);
        let data = grads.and_then(|grad_f| {
            let g = problem.constraint_values(&state.x)?;
            let grad_g = problem.constraint_gradients(&state.x)?;
            let instance = QpInstance::new(grad_f, grad_g.clone(), g.clone())?;
            let qp = solve_qp(&instance)?;
            Ok((instance, g, grad_g, qp))
        });
        let (instance, g, grad_g, qp) = match data {
            Ok(v) => v,
            Err(e) => return Ok(finish(state, trace, &ev, Some(Status::QpFailure), Some(e.to_string()))),
        };
        let d = qp.d.clone();
        let d_norm = norm2(&d);
        let t = qp.t;
        let kkt_residual = qp.kkt_residual;
        state.qp = Some(qp);

        // an infeasible point keeps iterating on a short direction unless it vanished
        let stop = d_norm < config.epsilon && (state.phi.phi <= FEASIBILITY_TOL || d_norm == 0.0);
        if stop || state.k >= config.max_iters {
            return Ok(finish(state, trace, &ev, None, None));
        }

        let slopes: Vec<f64> = instance.grad_f.iter().map(|row| dot(row, &d)).collect();
        let half_dd = 0.5 * d_norm * d_norm;
        let ps = phi_star_from_parts(&g, &grad_g, &state.phi, &d);
        let update = match update_sigma(state.sigma, state.phi.phi, &slopes, half_dd, ps) {
            Ok(u) => u,
            Err(e) => return Ok(finish(state, trace, &ev, Some(Status::QpFailure), Some(e.to_string()))),
        };
        if update.sigma > config.sigma_cap {
            state.sigma = update.sigma;
            return Ok(finish(
                state,
                trace,
                &ev,
                Some(Status::WeaklyCriticalSuspected),
                Some(format!("penalty weight exceeded {:e}", config.sigma_cap)),
            ));
        }
        let sigma_prev = state.sigma;
        let sigma = update.sigma;
        let thetas: Vec<f64> = slopes.iter().map(|s| s + sigma * ps).collect();

        let accepted = match backtrack(&mut ev, &state.x, &d, &state.f, state.phi.phi, &thetas, sigma, config) {
            Ok(a) => a,
            Err(e) => {
                state.sigma = sigma;
                return Ok(finish(state, trace, &ev, Some(Status::LineSearchFailure), Some(e.to_string())));
            }
        };

        trace.push(TraceRecord {
            k: state.k,
            x: state.x.clone(),
            f: state.f.clone(),
            phi: state.phi.phi,
            t,
            d,
            d_norm,
            kkt_residual,
            slopes,
            phi_star: ps,
            sigma_prev,
            sigma,
            thetas,
            alpha: accepted.alpha,
            f_next: accepted.f.clone(),
            phi_next: accepted.penalty.phi,
        });

        state.x = accepted.x;
        state.f = accepted.f;
        state.phi = accepted.penalty;
        state.sigma = sigma;
        state.alpha = Some(accepted.alpha);
        state.k += 1;
    }
}

/// Writes per-iteration records as comma-separated text:
/// `k, x_1..x_n, t, d_norm, sigma, alpha, phi, theta_1..theta_m`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    if let Some(first) = trace.first() {
        let mut header = vec!["k".to_string()];
        header.extend((1..=first.x.len()).map(|i| format!("x_{i}")));
        header.extend(["t", "d_norm", "sigma", "alpha", "phi"].map(String::from));
        header.extend((1..=first.thetas.len()).map(|j| format!("theta_{j}")));
        wtr.write_record(&header)?;
    }
    for rec in trace {
        let mut row = vec![rec.k.to_string()];
        row.extend(rec.x.iter().map(f64::to_string));
        row.extend([rec.t, rec.d_norm, rec.sigma, rec.alpha, rec.phi].map(|v| v.to_string()));
        row.extend(rec.thetas.iter().map(f64::to_string));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
