//! Direction-finding sub-problem
//!
//! ```text
//! min_{t,d}  t + 1/2 d'd
//! s.t.       grad f_j(x)' d            <= t   (j = 1..m)
//!            g_i(x) + grad g_i(x)' d   <= t   (i = 1..p)
//! ```
//!
//! The pair `(t, d) = (Phi(x), 0)` is always feasible, so the problem never
//! needs a phase-one step. It is solved with a primal active-set method on
//! `z = (t, d)`. Writing every row as `a_k' d + b_k - t <= 0`, the equality
//! sub-problem on a working set `W` has the bordered system
//!
//! ```text
//! [ A_W A_W'  1 ] [ w ]   [ b_W ]
//! [ 1'        0 ] [ t ] = [ 1   ],      d = -A_W' w
//! ```
//!
//! which is non-singular as long as the rows in `W` are affinely independent.
//! A blocking row is only added when `(a_k, -1)` is numerically independent
//! of the working rows, so that holds throughout.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::dot;

/// Multipliers above `-MULT_TOL` are treated as non-negative.
const MULT_TOL: f64 = 1e-12;

/// Target KKT residual for a returned solution.
pub const KKT_TOL: f64 = 1e-8;

/// Data of the sub-problem at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct QpInstance {
    pub grad_f: Vec<Vec<f64>>,
    pub grad_g: Vec<Vec<f64>>,
    pub g_vals: Vec<f64>,
    pub phi: f64,
}

impl QpInstance {
    pub fn new(grad_f: Vec<Vec<f64>>, grad_g: Vec<Vec<f64>>, g_vals: Vec<f64>) -> Result<Self> {
        let Some(first) = grad_f.first() else {
            return Err(Error::InvalidProblem("QP instance needs at least one objective row".into()));
        };
        let n = first.len();
        if grad_g.len() != g_vals.len() {
            return Err(Error::Dimension {
                expected: g_vals.len(),
                got: grad_g.len(),
            });
        }
        for row in grad_f.iter().chain(&grad_g) {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidProblem("non-finite QP data".into()));
            }
        }
        if g_vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite QP data".into()));
        }
        let phi = g_vals.iter().copied().fold(0.0_f64, f64::max);
        Ok(Self {
            grad_f,
            grad_g,
            g_vals,
            phi,
        })
    }

    pub fn n(&self) -> usize {
        self.grad_f[0].len()
    }

    pub fn m(&self) -> usize {
        self.grad_f.len()
    }

    pub fn p(&self) -> usize {
        self.grad_g.len()
    }

    fn rows(&self) -> usize {
        self.m() + self.p()
    }

    fn row(&self, k: usize) -> &[f64] {
        if k < self.m() {
            &self.grad_f[k]
        } else {
            &self.grad_g[k - self.m()]
        }
    }

    fn offset(&self, k: usize) -> f64 {
        if k < self.m() {
            0.0
        } else {
            self.g_vals[k - self.m()]
        }
    }

    /// `max_k (a_k' d + b_k)`, the smallest feasible `t` for a given `d`.
    pub fn min_feasible_t(&self, d: &[f64]) -> f64 {
        (0..self.rows())
            .map(|k| dot(self.row(k), d) + self.offset(k))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sub-problem objective at `(t, d)`.
    pub fn objective(&self, t: f64, d: &[f64]) -> f64 {
        t + 0.5 * dot(d, d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub t: f64,
    pub d: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl QpSolution {
    pub fn objective(&self) -> f64 {
        self.t + 0.5 * dot(&self.d, &self.d)
    }

    pub fn d_norm(&self) -> f64 {
        dot(&self.d, &self.d).sqrt()
    }
}

/// Maximum residual of each condition group of the sub-problem's KKT system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktCertificate {
    /// `|| d + sum lambda_j grad f_j + sum mu_i grad g_i ||_inf`
    pub stationarity: f64,
    /// `|1 - sum lambda - sum mu|`
    pub normalization: f64,
    /// sign and complementary slackness of `lambda`
    pub objective_complementarity: f64,
    /// sign and complementary slackness of `mu`
    pub constraint_complementarity: f64,
    /// `max(0, grad f_j' d - t)`
    pub objective_feasibility: f64,
    /// `max(0, g_i + grad g_i' d - t)`
    pub constraint_feasibility: f64,
    pub tol: f64,
}

impl KktCertificate {
    pub fn max_residual(&self) -> f64 {
        [
            self.stationarity,
            self.normalization,
            self.objective_complementarity,
            self.constraint_complementarity,
            self.objective_feasibility,
            self.constraint_feasibility,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= self.tol
    }
}

pub fn certify_kkt(instance: &QpInstance, sol: &QpSolution, tol: f64) -> KktCertificate {
    let n = instance.n();
    let mut grad_l = sol.d.clone();
    grad_l.resize(n, 0.0);
    for (l, row) in sol.lambda.iter().zip(&instance.grad_f) {
        for (g, a) in grad_l.iter_mut().zip(row) {
            *g += l * a;
        }
    }
    for (u, row) in sol.mu.iter().zip(&instance.grad_g) {
        for (g, a) in grad_l.iter_mut().zip(row) {
            *g += u * a;
        }
    }
    let stationarity = grad_l.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let normalization = (1.0 - sol.lambda.iter().sum::<f64>() - sol.mu.iter().sum::<f64>()).abs();

    let mut objective_complementarity = 0.0_f64;
    let mut objective_feasibility = 0.0_f64;
    for (l, row) in sol.lambda.iter().zip(&instance.grad_f) {
        let slack = dot(row, &sol.d) - sol.t;
        objective_complementarity = objective_complementarity.max(-l).max((l * slack).abs());
        objective_feasibility = objective_feasibility.max(slack);
    }
    let mut constraint_complementarity = 0.0_f64;
    let mut constraint_feasibility = 0.0_f64;
    for ((u, row), g) in sol.mu.iter().zip(&instance.grad_g).zip(&instance.g_vals) {
        let slack = g + dot(row, &sol.d) - sol.t;
        constraint_complementarity = constraint_complementarity.max(-u).max((u * slack).abs());
        constraint_feasibility = constraint_feasibility.max(slack);
    }
    // mismatched multiplier lengths can never certify
    let shape_ok = sol.lambda.len() == instance.m() && sol.mu.len() == instance.p() && sol.d.len() == n;
    let penalty = if shape_ok { 0.0 } else { f64::INFINITY };

    KktCertificate {
        stationarity: stationarity + penalty,
        normalization,
        objective_complementarity,
        constraint_complementarity,
        objective_feasibility,
        constraint_feasibility,
        tol,
    }
}

/// Iteration cap of the active-set loop.
pub fn iteration_cap(instance: &QpInstance) -> usize {
    500 * instance.rows()
}

pub fn solve_qp(instance: &QpInstance) -> Result<QpSolution> {
    let n = instance.n();
    let m = instance.m();
    let p = instance.p();

    let all_zero = instance
        .grad_f
        .iter()
        .chain(&instance.grad_g)
        .all(|row| row.iter().all(|v| *v == 0.0));
    if all_zero && instance.phi == 0.0 {
        return Ok(QpSolution {
            t: 0.0,
            d: vec![0.0; n],
            lambda: vec![1.0 / m as f64; m],
            mu: vec![0.0; p],
            kkt_residual: 0.0,
            iterations: 0,
        });
    }

    // (Phi(x), 0) is feasible by construction.
    let mut t = instance.phi;
    let mut d = vec![0.0; n];
    debug_assert!(instance.min_feasible_t(&d) <= t);

    let start = (0..instance.rows())
        .max_by(|a, b| instance.offset(*a).total_cmp(&instance.offset(*b)).then(b.cmp(a)))
        .expect("at least one row");
    let mut working = vec![start];
    // rounding in the bordered solve grows with |a|^2 and |b|
    let data_scale = (0..instance.rows())
        .map(|k| {
            let a = instance.row(k).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            a * a + instance.offset(k).abs()
        })
        .fold(0.0_f64, f64::max);
    let cap = iteration_cap(instance);

    for iter in 1..=cap {
        let (w, t_eq, d_eq) = solve_equality(instance, &working)?;
        let dt = t_eq - t;
        let dd: Vec<f64> = d_eq.iter().zip(&d).map(|(a, b)| a - b).collect();
        let step = dd.iter().fold(dt.abs(), |acc, v| acc.max(v.abs()));
        let scale = 1.0 + data_scale + t.abs() + d.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));

        if step <= 1e-12 * scale {
            let (pos, w_min) = w
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
            if w_min >= -MULT_TOL {
                return Ok(finish(instance, &working, &w, d_eq, iter));
            }
            working.remove(pos);
            continue;
        }

        let mut candidates: Vec<(f64, usize)> = Vec::new();
        for k in 0..instance.rows() {
            if working.contains(&k) {
                continue;
            }
            let a = instance.row(k);
            let rate = dot(a, &dd) - dt;
            let a_norm = a.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
            if rate <= 1e-10 * a_norm * step {
                continue;
            }
            let slack = (t - dot(a, &d) - instance.offset(k)).max(0.0);
            let ratio = slack / rate;
            if ratio < 1.0 {
                candidates.push((ratio, k));
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut alpha = 1.0;
        let mut blocking = None;
        if let Some(&(ratio, k)) = candidates.iter().find(|(_, k)| independent(instance, &working, *k)) {
            alpha = ratio;
            blocking = Some(k);
        }
        match blocking {
            Some(k) => {
                t += alpha * dt;
                for (di, ddi) in d.iter_mut().zip(&dd) {
                    *di += alpha * ddi;
                }
                working.push(k);
            }
            None => {
                t = t_eq;
                d = d_eq;
            }
        }
    }
    Err(Error::MaxQpIterations(cap))
}

/// Whether `(a_k, -1)` is outside the span of the working rows `(a_j, -1)`.
fn independent(instance: &QpInstance, working: &[usize], k: usize) -> bool {
    let n = instance.n();
    if working.len() > n {
        return false;
    }
    let cols = working.len() + 1;
    let mat = DMatrix::<f64>::from_fn(n + 1, cols, |i, j| {
        let r = if j < working.len() { working[j] } else { k };
        if i < n {
            instance.row(r)[i]
        } else {
            -1.0
        }
    });
    let sv = mat.singular_values();
    let max = sv.max();
    sv.min() > 1e-9 * max
}

fn solve_equality(instance: &QpInstance, working: &[usize]) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let k = working.len();
    let mut mat = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for (a, &ra) in working.iter().enumerate() {
        for (b, &rb) in working.iter().enumerate().skip(a) {
            let v = dot(instance.row(ra), instance.row(rb));
            mat[(a, b)] = v;
            mat[(b, a)] = v;
        }
        mat[(a, k)] = 1.0;
        mat[(k, a)] = 1.0;
        rhs[a] = instance.offset(ra);
    }
    rhs[k] = 1.0;
    let sol = mat
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::MaxQpIterations(iteration_cap(instance)))?;

    let w: Vec<f64> = sol.iter().take(k).copied().collect();
    let mut d = vec![0.0; instance.n()];
    for (wa, &ra) in w.iter().zip(working) {
        for (di, ai) in d.iter_mut().zip(instance.row(ra)) {
            *di -= wa * ai;
        }
    }
    Ok((w, sol[k], d))
}

fn finish(instance: &QpInstance, working: &[usize], w: &[f64], d: Vec<f64>, iterations: usize) -> QpSolution {
    let m = instance.m();
    let mut lambda = vec![0.0; m];
    let mut mu = vec![0.0; instance.p()];
    for (&k, &wk) in working.iter().zip(w) {
        let wk = wk.max(0.0);
        if k < m {
            lambda[k] = wk;
        } else {
            mu[k - m] = wk;
        }
    }
    let t = instance.min_feasible_t(&d);
    let mut sol = QpSolution {
        t,
        d,
        lambda,
        mu,
        kkt_residual: 0.0,
        iterations,
    };
    sol.kkt_residual = certify_kkt(instance, &sol, KKT_TOL).max_residual();
    sol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(grad_f: &[&[f64]], grad_g: &[&[f64]], g: &[f64]) -> QpInstance {
        QpInstance::new(
            grad_f.iter().map(|r| r.to_vec()).collect(),
            grad_g.iter().map(|r| r.to_vec()).collect(),
            g.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn two_parabolas_at_three() {
        // f1 = x^2, f2 = (x-2)^2 at x = 3
        let q = inst(&[&[6.0], &[2.0]], &[], &[]);
        let s = solve_qp(&q).unwrap();
        assert!((s.t + 4.0).abs() < 1e-12);
        assert!((s.d[0] + 2.0).abs() < 1e-12);
        assert!(s.lambda[0].abs() < 1e-12 && (s.lambda[1] - 1.0).abs() < 1e-12);
        assert!(s.kkt_residual <= KKT_TOL);
    }

    #[test]
    fn infeasible_line_point() {
        // f = x, g = x - 1 at x = 2
        let q = inst(&[&[1.0]], &[&[1.0]], &[1.0]);
        assert_eq!(q.phi, 1.0);
        let s = solve_qp(&q).unwrap();
        assert!(s.t.abs() < 1e-12);
        assert!((s.d[0] + 1.0).abs() < 1e-12);
        assert!(certify_kkt(&q, &s, KKT_TOL).passed());
    }

    #[test]
    fn symmetric_point_is_stationary() {
        let q = inst(&[&[2.0], &[-2.0]], &[], &[]);
        let s = solve_qp(&q).unwrap();
        assert!(s.t.abs() < 1e-12 && s.d[0].abs() < 1e-12);
        assert!((s.lambda[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_instance_returns_uniform_lambda() {
        let q = inst(&[&[0.0, 0.0], &[0.0, 0.0]], &[&[0.0, 0.0]], &[-1.0]);
        let s = solve_qp(&q).unwrap();
        assert_eq!(s.t, 0.0);
        assert_eq!(s.d, vec![0.0, 0.0]);
        assert_eq!(s.lambda, vec![0.5, 0.5]);
        assert_eq!(s.mu, vec![0.0]);
    }

    #[test]
    fn certificate_accepts_exact_solution() {
        let q = inst(&[&[6.0], &[2.0]], &[], &[]);
        let sol = QpSolution {
            t: -4.0,
            d: vec![-2.0],
            lambda: vec![0.0, 1.0],
            mu: vec![],
            kkt_residual: 0.0,
            iterations: 0,
        };
        assert!(certify_kkt(&q, &sol, 1e-8).passed());
    }

    #[test]
    fn certificate_flags_perturbed_direction() {
        let q = inst(&[&[6.0], &[2.0]], &[], &[]);
        let sol = QpSolution {
            t: -4.0,
            d: vec![-1.9],
            lambda: vec![0.0, 1.0],
            mu: vec![],
            kkt_residual: 0.0,
            iterations: 0,
        };
        let c = certify_kkt(&q, &sol, 1e-8);
        assert!(!c.passed());
        assert!((c.stationarity - 0.1).abs() < 1e-12);
    }

    #[test]
    fn certificate_rejects_trivial_feasible_pair() {
        let q = inst(&[&[6.0], &[2.0]], &[], &[]);
        for lambda in [vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]] {
            let sol = QpSolution {
                t: q.phi,
                d: vec![0.0],
                lambda,
                mu: vec![],
                kkt_residual: 0.0,
                iterations: 0,
            };
            let c = certify_kkt(&q, &sol, 1e-8);
            assert!(!c.passed());
            assert!(c.stationarity >= 2.0);
        }
    }

    #[test]
    fn bound_rows_and_ties() {
        // several tied constraint offsets; the result must still certify
        let q = inst(
            &[&[1.0, 0.0], &[0.0, 1.0]],
            &[&[-1.0, -1.0], &[-1.0, 0.0], &[0.0, -1.0], &[1.0, 0.0], &[0.0, 1.0]],
            &[-1.0, 0.0, 0.0, -10.0, -10.0],
        );
        let s = solve_qp(&q).unwrap();
        assert!(s.kkt_residual <= KKT_TOL, "{s:?}");
        assert!(s.objective() <= q.phi + 1e-12);
    }

    #[test]
    fn nearly_parallel_rows_do_not_cycle() {
        let q = inst(&[&[-4.106382127096566], &[-3.770988422874668], &[-4.877103528922326]], &[], &[]);
        let s = solve_qp(&q).unwrap();
        assert!((s.d[0] - 3.770988422874668).abs() < 1e-12);
        assert!((s.lambda[1] - 1.0).abs() < 1e-12);
        assert!(s.kkt_residual <= KKT_TOL);
        let q = inst(&[&[3.5434024668875495], &[4.102983429234609], &[3.519057117454526]], &[], &[]);
        let s = solve_qp(&q).unwrap();
        assert!((s.d[0] + 3.519057117454526).abs() < 1e-12);
        assert!(s.kkt_residual <= KKT_TOL);
    }

    #[test]
    fn rejects_ragged_rows() {
        let r = QpInstance::new(vec![vec![1.0, 2.0], vec![1.0]], vec![], vec![]);
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }
}
