//! Approximate Pareto fronts from multi-start runs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{EvalCounter, Problem, FEASIBILITY_TOL};
use crate::solver::{solve, SolveOutcome, SolverConfig, Status};

/// Objective vectors closer than this in every component are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "MOSQP")]
    Mosqp,
    #[serde(rename = "MOS")]
    Mos,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Mosqp => "MOSQP",
            SolverKind::Mos => "MOS",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MOSQP" => Ok(SolverKind::Mosqp),
            "MOS" => Ok(SolverKind::Mos),
            _ => Err(Error::InvalidConfig(format!("unknown solver {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "LINE")]
    Line,
    #[serde(rename = "RAND")]
    Rand,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Line => "LINE",
            Strategy::Rand => "RAND",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub phi: f64,
    pub feasible: bool,
    pub status: Status,
    pub run_id: usize,
    pub start_id: usize,
}

impl FrontPoint {
    pub fn from_outcome(problem: &Problem, outcome: &SolveOutcome, run_id: usize, start_id: usize) -> Result<Self> {
        // weighted-sum runs report the scalarized objective, so always recompute f
        let f = problem.objective_values(&outcome.final_x)?;
        Ok(Self {
            x: outcome.final_x.clone(),
            f,
            phi: outcome.final_phi,
            feasible: outcome.final_phi <= FEASIBILITY_TOL,
            status: outcome.status,
            run_id,
            start_id,
        })
    }
}

/// Mutually non-dominated, feasible points produced by one solver (or the
/// union of several, for a reference front).
#[derive(Debug, Clone, PartialEq)]
pub struct Front {
    pub solver: String,
    pub points: Vec<FrontPoint>,
    pub evals: EvalCounter,
}

impl Front {
    /// Filters `candidates` down to a front.
    pub fn from_candidates(solver: impl Into<String>, candidates: Vec<FrontPoint>, evals: EvalCounter) -> Self {
        Self {
            solver: solver.into(),
            points: nondominated_filter(candidates),
            evals,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn objective_vectors(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.f.clone()).collect()
    }
}

/// `a` dominates `b`: `a <= b` componentwise and `a != b`.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

pub fn near_duplicate(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= DUPLICATE_TOL)
}

/// Drops infeasible points, collapses objective-space duplicates to the first
/// occurrence, then removes every dominated point. Input order is preserved.
pub fn nondominated_filter(points: Vec<FrontPoint>) -> Vec<FrontPoint> {
    let mut reps: Vec<FrontPoint> = Vec::new();
    for p in points.into_iter().filter(|p| p.feasible) {
        if !reps.iter().any(|r| near_duplicate(&r.f, &p.f)) {
            reps.push(p);
        }
    }
    let keep: Vec<bool> = reps
        .iter()
        .map(|p| !reps.iter().any(|q| dominates(&q.f, &p.f)))
        .collect();
    reps.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect()
}

/// Union of all fronts, filtered.
pub fn build_reference_front(fronts: &[Front]) -> Front {
    let mut evals = EvalCounter::default();
    let mut all = Vec::new();
    for fr in fronts {
        evals.merge(&fr.evals);
        all.extend(fr.points.iter().cloned());
    }
    Front::from_candidates("REFERENCE", all, evals)
}

/// `count` evenly spaced points on the segment from `l` to `u`, endpoints included.
pub fn line_starts(problem: &Problem, count: usize) -> Result<Vec<Vec<f64>>> {
    if count < 2 {
        return Err(Error::InvalidConfig("LINE needs at least two starts".into()));
    }
    let (l, u) = (problem.lower(), problem.upper());
    let denom = (count - 1) as f64;
    Ok((0..count)
        .map(|k| {
            let s = k as f64 / denom;
            l.iter().zip(u).map(|(li, ui)| li + s * (ui - li)).collect()
        })
        .collect())
}

/// `count` points uniform on the box, deterministic in `seed`.
pub fn rand_starts(problem: &Problem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| uniform_box_point(problem, &mut rng)).collect()
}

/// One point uniform on the box.
pub fn uniform_box_point<R: Rng>(problem: &Problem, rng: &mut R) -> Vec<f64> {
    problem
        .lower()
        .iter()
        .zip(problem.upper())
        .map(|(l, u)| l + (u - l) * rng.random::<f64>())
        .collect()
}

/// Non-negative weights summing to one, drawn uniformly then normalized.
pub fn random_weights<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.into_iter().map(|v| v / s).collect();
        }
    }
}

/// LINE weight schedule `(k/(count-1), 1 - k/(count-1))` for bi-objective problems.
pub fn line_weights(count: usize) -> Vec<Vec<f64>> {
    let denom = (count.max(2) - 1) as f64;
    (0..count)
        .map(|k| {
            let w = k as f64 / denom;
            vec![w, 1.0 - w]
        })
        .collect()
}

/// Minimizes `sum_j w_j f_j` under the same constraints with the SQP solver
/// in single-objective mode.
pub fn weighted_sum_solve(problem: &Problem, weights: &[f64], x0: &[f64], config: &SolverConfig) -> Result<SolveOutcome> {
    let scalar = problem.weighted_sum(weights)?;
    solve(&scalar, x0, config)
}

/// Front CSV: `run_id, start_id, solver, x_1..x_n, f_1..f_m, phi, status`.
pub fn write_front_csv(front: &Front, n: usize, m: usize, path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    let mut header = vec!["run_id".to_string(), "start_id".into(), "solver".into()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend((1..=m).map(|j| format!("f_{j}")));
    header.extend(["phi".to_string(), "status".into()]);
    wtr.write_record(&header)?;
    for p in &front.points {
        let mut row = vec![p.run_id.to_string(), p.start_id.to_string(), front.solver.clone()];
        row.extend(p.x.iter().map(f64::to_string));
        row.extend(p.f.iter().map(f64::to_string));
        row.push(p.phi.to_string());
        row.push(p.status.to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a front written by [`write_front_csv`]. Returns `(solver, points)`;
/// the solver is `None` for an empty front.
pub fn read_front_csv(path: &Path) -> Result<(Option<String>, Vec<FrontPoint>)> {
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    let n = header.iter().filter(|h| h.starts_with("x_")).count();
    let m = header.iter().filter(|h| h.starts_with("f_")).count();
    if header.len() != 5 + n + m {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
    let mut solver = None;
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let x = (0..n).map(|i| num(&rec[3 + i])).collect::<Result<Vec<_>>>()?;
        let f = (0..m).map(|j| num(&rec[3 + n + j])).collect::<Result<Vec<_>>>()?;
        let phi = num(&rec[3 + n + m])?;
        let status = Status::parse(&rec[4 + n + m]).ok_or_else(|| bad(format!("bad status {:?}", &rec[4 + n + m])))?;
        solver.get_or_insert_with(|| rec[2].to_string());
        points.push(FrontPoint {
            x,
            f,
            phi,
            feasible: phi <= FEASIBILITY_TOL,
            status,
            run_id: rec[0].parse().map_err(|_| bad("bad run_id".into()))?,
            start_id: rec[1].parse().map_err(|_| bad("bad start_id".into()))?,
        });
    }
    Ok((solver, points))
}
