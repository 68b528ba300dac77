//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use mosqp_core::problem::{evaluate_phi, theta, Problem};
use mosqp_core::qp::QpInstance;
use mosqp_core::solver::SolveOutcome;
use rand::Rng;

/// Instance with every entry uniform in `[-5, 5]`.
pub fn random_qp<R: Rng>(rng: &mut R, n: usize, m: usize, p: usize) -> QpInstance {
    let row = |rng: &mut R| (0..n).map(|_| rng.random_range(-5.0..=5.0)).collect::<Vec<f64>>();
    let grad_f = (0..m).map(|_| row(rng)).collect();
    let grad_g = (0..p).map(|_| row(rng)).collect();
    let g = (0..p).map(|_| rng.random_range(-5.0..=5.0)).collect();
    QpInstance::new(grad_f, grad_g, g).unwrap()
}

/// QP objective with `t` eliminated: `max(rows) + |d|^2 / 2`.
pub fn reduced_objective(inst: &QpInstance, d: &[f64]) -> f64 {
    let dot = |a: &[f64]| a.iter().zip(d).map(|(x, y)| x * y).sum::<f64>();
    let obj = inst.grad_f.iter().map(|a| dot(a));
    let con = inst.grad_g.iter().zip(&inst.g_vals).map(|(b, g)| g + dot(b));
    let t = obj.chain(con).fold(f64::NEG_INFINITY, f64::max);
    t + 0.5 * d.iter().map(|v| v * v).sum::<f64>()
}

fn grid_min(inst: &QpInstance, center: &[f64], half_width: f64, step: f64) -> (f64, Vec<f64>) {
    let k = (half_width / step).round() as i64;
    let n = center.len();
    let mut best = (f64::INFINITY, center.to_vec());
    let mut idx = vec![-k; n];
    loop {
        let d: Vec<f64> = center.iter().zip(&idx).map(|(c, i)| c + *i as f64 * step).collect();
        let v = reduced_objective(inst, &d);
        if v < best.0 {
            best = (v, d);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] <= k {
                break;
            }
            idx[pos] = -k;
            pos += 1;
        }
    }
}

/// Brute-force minimum of the QP for `n <= 2` with entries in `[-5, 5]`.
///
/// The minimizer is `-A'w` for a convex combination `w` of the rows, so
/// `|d*| <= 5 sqrt(2) < 8`. The reduced objective is 1-strongly convex and
/// `L`-Lipschitz with `L < 16` on that box, so each grid level pins `d*`
/// to within `sqrt(L h sqrt(n))` of its best point, which sizes the next
/// window. The final level bounds the gap by about `16 * 1e-3 * 0.71 < 1.2e-2`
/// from above in the worst case and by zero from below.
pub fn grid_qp_value(inst: &QpInstance) -> f64 {
    let n = inst.n();
    let (_, c) = grid_min(inst, &vec![0.0; n], 8.0, 0.05);
    let (_, c) = grid_min(inst, &c, 1.1, 0.01);
    grid_min(inst, &c, 0.5, 1e-3).0
}

/// Violation counts from replaying a solve trace against the problem.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct TraceAudit {
    pub iterations: usize,
    /// `t > Phi - |d|^2 / 2 + 1e-8`
    pub qp_bound: usize,
    /// Armijo inequality failing for some objective.
    pub armijo: usize,
    /// `sigma` decreasing anywhere, or growing by less than a factor two.
    pub sigma: usize,
}

impl TraceAudit {
    pub fn merge(&mut self, o: &TraceAudit) {
        self.iterations += o.iterations;
        self.qp_bound += o.qp_bound;
        self.armijo += o.armijo;
        self.sigma += o.sigma;
    }

    pub fn clean(&self) -> bool {
        self.qp_bound == 0 && self.armijo == 0 && self.sigma == 0
    }
}

pub const QP_BOUND_SLACK: f64 = 1e-8;

/// Replays every accepted step: recomputes `f`, `Phi` and `theta` from the
/// problem and checks the QP value bound, the Armijo inequality for all
/// objectives at once, and penalty monotonicity.
pub fn audit(problem: &Problem, beta: f64, out: &SolveOutcome) -> TraceAudit {
    let mut a = TraceAudit::default();
    let mut last_sigma = out.config.sigma0;
    for rec in &out.trace {
        a.iterations += 1;
        let phi = evaluate_phi(problem, &rec.x).unwrap().phi;
        if rec.t > phi - 0.5 * rec.d_norm * rec.d_norm + QP_BOUND_SLACK {
            a.qp_bound += 1;
        }
        let x_next: Vec<f64> = rec.x.iter().zip(&rec.d).map(|(x, d)| x + rec.alpha * d).collect();
        let f0 = problem.objective_values(&rec.x).unwrap();
        let f1 = problem.objective_values(&x_next).unwrap();
        let phi1 = evaluate_phi(problem, &x_next).unwrap().phi;
        let ok = (0..problem.m()).all(|j| {
            let th = theta(problem, &rec.x, &rec.d, j, rec.sigma).unwrap();
            let lhs = (f1[j] + rec.sigma * phi1) - (f0[j] + rec.sigma * phi);
            lhs <= rec.alpha * beta * th && th < 0.0
        });
        if !ok {
            a.armijo += 1;
        }
        let grew = rec.sigma > rec.sigma_prev;
        if rec.sigma_prev != last_sigma || rec.sigma < rec.sigma_prev || (grew && rec.sigma < 2.0 * rec.sigma_prev) {
            a.sigma += 1;
        }
        last_sigma = rec.sigma;
    }
    if out.sigma < last_sigma {
        a.sigma += 1;
    }
    a
}

/// True when no vector dominates another (O(N^2) pairwise check).
pub fn mutually_nondominated(values: &[Vec<f64>]) -> bool {
    values.iter().enumerate().all(|(i, a)| {
        values.iter().enumerate().all(|(j, b)| {
            i == j || !(b.iter().zip(a).all(|(x, y)| x <= y) && b.iter().zip(a).any(|(x, y)| x < y))
        })
    })
}
