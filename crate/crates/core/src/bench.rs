//! Benchmark grids: problems x solvers x strategies x runs.
//!
//! Output directory layout:
//!
//! ```text
//! fronts/{problem}__{solver}__{strategy}__run{r}.csv   filtered fronts
//! runs.csv                                            status counts and evaluations per run
//! metrics/{line,rand_best,rand_worst}.csv             purity, gamma, delta, FE1 per solver
//! profiles/{case}_{metric}.csv                        performance profile samples
//! manifest.txt                                        config and SHA-256 of every file above
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{self, DEFAULT_PROBLEMS};
use crate::error::{Error, Result};
use crate::front::{
    build_reference_front, line_starts, line_weights, near_duplicate, rand_starts, random_weights, write_front_csv,
    Front, FrontPoint, SolverKind, Strategy,
};
use crate::metrics::{self, fmt_num, MetricReport};
use crate::problem::{EvalCounter, Problem};
use crate::solver::{solve, SolveOutcome, SolverConfig, Status};

pub const MANIFEST_FORMAT: &str = "mosqp-bench/1";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problems: Vec<String>,
    pub solvers: Vec<SolverKind>,
    pub strategies: Vec<Strategy>,
    pub starts: usize,
    pub runs: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every core. Does not affect results.
    pub workers: usize,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub solver: SolverConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problems: DEFAULT_PROBLEMS.iter().map(|s| s.to_string()).collect(),
            solvers: vec![SolverKind::Mosqp, SolverKind::Mos],
            strategies: vec![Strategy::Line, Strategy::Rand],
            starts: 100,
            runs: 10,
            seed: 0,
            workers: 0,
            output_dir: PathBuf::from("bench-out"),
            solver: SolverConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Resolves the problem list against the catalog and checks the grid.
    pub fn resolve(&self) -> Result<Vec<Problem>> {
        self.solver.validate()?;
        let bad = |s: &str| Err(Error::InvalidConfig(s.into()));
        if self.problems.is_empty() || self.solvers.is_empty() || self.strategies.is_empty() {
            return bad("problems, solvers and strategies must be non-empty");
        }
        if has_duplicates(&self.problems) || has_duplicates(&self.solvers) || has_duplicates(&self.strategies) {
            return bad("problems, solvers and strategies must not repeat");
        }
        if self.starts == 0 {
            return bad("starts must be positive");
        }
        if self.strategies.contains(&Strategy::Rand) && self.runs == 0 {
            return bad("runs must be positive");
        }
        let problems = self
            .problems
            .iter()
            .map(|name| catalog::lookup(name).map(|e| e.problem))
            .collect::<Result<Vec<_>>>()?;
        if self.strategies.contains(&Strategy::Line) {
            if self.starts < 2 {
                return bad("LINE needs at least two starts");
            }
            if let Some(p) = problems.iter().find(|p| p.m() != 2) {
                return Err(Error::InvalidConfig(format!(
                    "LINE requires bi-objective problems, {} has m = {}",
                    p.name(),
                    p.m()
                )));
            }
        }
        Ok(problems)
    }

    fn runs_for(&self, strategy: Strategy) -> usize {
        match strategy {
            Strategy::Line => 1,
            Strategy::Rand => self.runs,
        }
    }
}

fn has_duplicates<T: PartialEq>(v: &[T]) -> bool {
    v.iter().enumerate().any(|(i, a)| v[..i].contains(a))
}

/// Seed for one `(problem, run)` stream, independent of grid order.
pub fn sub_seed(seed: u64, problem: &str, run: usize, stream: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}/{problem}/{run}/{stream}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// One single-start solve in the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub problem: usize,
    pub solver: SolverKind,
    pub strategy: Strategy,
    pub run: usize,
    pub start_id: usize,
    pub x0: Vec<f64>,
    /// Scalarization weights for the weighted-sum baseline.
    pub weights: Option<Vec<f64>>,
}

/// Every job of the grid, in output order.
pub fn plan_jobs(config: &RunConfig, problems: &[Problem]) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for (pi, problem) in problems.iter().enumerate() {
        for &solver in &config.solvers {
            for &strategy in &config.strategies {
                for run in 0..config.runs_for(strategy) {
                    let (starts, weights) = match strategy {
                        Strategy::Line => (line_starts(problem, config.starts)?, line_weights(config.starts)),
                        Strategy::Rand => {
                            let xs = rand_starts(problem, config.starts, sub_seed(config.seed, problem.name(), run, "starts"));
                            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(
                                config.seed,
                                problem.name(),
                                run,
                                "weights",
                            ));
                            let ws = (0..config.starts).map(|_| random_weights(problem.m(), &mut rng)).collect();
                            (xs, ws)
                        }
                    };
                    for (start_id, (x, w)) in starts.into_iter().zip(weights).enumerate() {
                        let (x0, weights) = match solver {
                            SolverKind::Mosqp => (x, None),
                            SolverKind::Mos => (problem.midpoint(), Some(w)),
                        };
                        jobs.push(Job {
                            problem: pi,
                            solver,
                            strategy,
                            run,
                            start_id,
                            x0,
                            weights,
                        });
                    }
                }
            }
        }
    }
    Ok(jobs)
}

/// Result of one job. `status` is `None` when the solver rejected its input.
#[derive(Debug, Clone)]
pub struct JobResult {
    pub status: Option<Status>,
    pub point: Option<FrontPoint>,
    pub evals: EvalCounter,
}

/// Runs one job; also returns the outcome and the problem actually solved
/// (the scalarized one for the weighted-sum baseline).
pub fn run_job(problem: &Problem, job: &Job, config: &SolverConfig) -> (JobResult, Option<(Problem, SolveOutcome)>) {
    let solved = match &job.weights {
        Some(w) => problem.weighted_sum(w),
        None => Ok(problem.clone()),
    };
    let attempt = solved.and_then(|p| solve(&p, &job.x0, config).map(|o| (p, o)));
    match attempt {
        Ok((p, outcome)) => match FrontPoint::from_outcome(problem, &outcome, job.run, job.start_id) {
            Ok(point) => (
                JobResult {
                    status: Some(outcome.status),
                    point: Some(point),
                    evals: outcome.evals,
                },
                Some((p, outcome)),
            ),
            Err(e) => {
                warn!("{} start {}: {e}", problem.name(), job.start_id);
                let evals = outcome.evals;
                (
                    JobResult {
                        status: Some(outcome.status),
                        point: None,
                        evals,
                    },
                    Some((p, outcome)),
                )
            }
        },
        Err(e) => {
            warn!("{} {} start {}: {e}", problem.name(), job.solver, job.start_id);
            (
                JobResult {
                    status: None,
                    point: None,
                    evals: EvalCounter::default(),
                },
                None,
            )
        }
    }
}

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub problem: String,
    pub solver: SolverKind,
    pub strategy: Strategy,
    pub run: usize,
    pub starts: usize,
    pub strongly_critical: usize,
    pub weakly_critical_suspected: usize,
    pub max_iterations: usize,
    pub qp_failure: usize,
    pub line_search_failure: usize,
    pub errors: usize,
    pub front_points: usize,
    pub num_f: u64,
    pub num_grad_f: u64,
}

impl RunRow {
    fn count(&mut self, status: Option<Status>) {
        match status {
            Some(Status::StronglyCritical) => self.strongly_critical += 1,
            Some(Status::WeaklyCriticalSuspected) => self.weakly_critical_suspected += 1,
            Some(Status::MaxIterations) => self.max_iterations += 1,
            Some(Status::QpFailure) => self.qp_failure += 1,
            Some(Status::LineSearchFailure) => self.line_search_failure += 1,
            None => self.errors += 1,
        }
    }
}

/// Grid cell key: `(problem index, solver, strategy, run)`.
pub type CellKey = (usize, SolverKind, Strategy, usize);

#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub output_dir: PathBuf,
    pub fronts: BTreeMap<CellKey, Front>,
    pub runs: Vec<RunRow>,
    /// Keyed by case name: `line`, `rand_best`, `rand_worst`.
    pub metrics: BTreeMap<String, Vec<MetricReport>>,
    pub files: BTreeMap<String, String>,
}

pub fn front_file_name(problem: &str, solver: SolverKind, strategy: Strategy, run: usize) -> String {
    format!("fronts/{problem}__{solver}__{strategy}__run{run}.csv")
}

pub fn run_benchmark(config: &RunConfig) -> Result<BenchSummary> {
    run_benchmark_with(config, |_, _, _| {})
}

/// Like [`run_benchmark`], calling `inspect(job, solved_problem, outcome)` on
/// every completed solve (from worker threads, in no particular order).
pub fn run_benchmark_with<F>(config: &RunConfig, inspect: F) -> Result<BenchSummary>
where
    F: Fn(&Job, &Problem, &SolveOutcome) + Sync,
{
    let problems = config.resolve()?;
    let jobs = plan_jobs(config, &problems)?;
    info!("{} solves over {} problems", jobs.len(), problems.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let results: Vec<JobResult> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let (res, solved) = run_job(&problems[job.problem], job, &config.solver);
                if let Some((p, outcome)) = solved {
                    inspect(job, &p, &outcome);
                }
                res
            })
            .collect()
    });

    // group per cell, preserving job order within each cell
    let mut cells: BTreeMap<CellKey, (RunRow, Vec<FrontPoint>)> = BTreeMap::new();
    for (job, res) in jobs.iter().zip(results) {
        let key = (job.problem, job.solver, job.strategy, job.run);
        let (row, pts) = cells.entry(key).or_insert_with(|| {
            (
                RunRow {
                    problem: problems[job.problem].name().to_string(),
                    solver: job.solver,
                    strategy: job.strategy,
                    run: job.run,
                    starts: 0,
                    strongly_critical: 0,
                    weakly_critical_suspected: 0,
                    max_iterations: 0,
                    qp_failure: 0,
                    line_search_failure: 0,
                    errors: 0,
                    front_points: 0,
                    num_f: 0,
                    num_grad_f: 0,
                },
                Vec::new(),
            )
        });
        row.starts += 1;
        row.count(res.status);
        row.num_f += res.evals.num_f;
        row.num_grad_f += res.evals.num_grad_f;
        pts.extend(res.point);
    }

    let out = &config.output_dir;
    for sub in ["fronts", "metrics", "profiles"] {
        fs::create_dir_all(out.join(sub)).map_err(|e| Error::Report {
            path: out.join(sub),
            reason: e.to_string(),
        })?;
    }

    let mut fronts = BTreeMap::new();
    let mut runs = Vec::new();
    for (key, (mut row, pts)) in cells {
        let evals = EvalCounter {
            num_f: row.num_f,
            num_grad_f: row.num_grad_f,
        };
        let front = Front::from_candidates(key.1.as_str(), pts, evals);
        row.front_points = front.len();
        let p = &problems[key.0];
        write_front_csv(&front, p.n(), p.m(), &out.join(front_file_name(p.name(), key.1, key.2, key.3)))?;
        runs.push(row);
        fronts.insert(key, front);
    }
    {
        let mut wtr = csv::Writer::from_path(out.join("runs.csv"))?;
        for row in &runs {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
    }

    let mut cases: Vec<(&str, Vec<Vec<&Front>>)> = Vec::new();
    if config.strategies.contains(&Strategy::Line) {
        let per_problem = (0..problems.len())
            .map(|pi| config.solvers.iter().map(|s| &fronts[&(pi, *s, Strategy::Line, 0)]).collect())
            .collect();
        cases.push(("line", per_problem));
    }
    if config.strategies.contains(&Strategy::Rand) {
        let (best, worst) = select_rand_runs(config, problems.len(), &fronts);
        cases.push(("rand_best", best));
        cases.push(("rand_worst", worst));
    }

    let solver_names: Vec<String> = config.solvers.iter().map(|s| s.as_str().to_string()).collect();
    let mut metric_tables = BTreeMap::new();
    for (case, per_problem) in cases {
        let mut reports = Vec::new();
        for (pi, fs_) in per_problem.iter().enumerate() {
            let owned: Vec<Front> = fs_.iter().map(|f| (*f).clone()).collect();
            reports.extend(metrics::evaluate_fronts(problems[pi].name(), problems[pi].n(), &owned));
        }
        metrics::write_reports_csv(&reports, fs::File::create(out.join(format!("metrics/{case}.csv")))?)?;
        for (metric, pick) in PROFILED {
            let scores: Vec<Vec<f64>> = reports
                .chunks(config.solvers.len())
                .map(|chunk| chunk.iter().map(|r| pick(r).unwrap_or(f64::INFINITY)).collect())
                .collect();
            let profile = metrics::performance_profile(&solver_names, &scores)?;
            metrics::write_profile_csv(&profile, fs::File::create(out.join(format!("profiles/{case}_{metric}.csv")))?)?;
        }
        metric_tables.insert(case.to_string(), reports);
    }

    let files = checksum_tree(out)?;
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        config: config.clone(),
        files: files.clone(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    fs::write(out.join(MANIFEST_FILE), text)?;

    Ok(BenchSummary {
        output_dir: out.clone(),
        fronts,
        runs,
        metrics: metric_tables,
        files,
    })
}

type MetricPick = fn(&MetricReport) -> Option<f64>;

/// Metrics that get a performance profile.
pub const PROFILED: [(&str, MetricPick); 3] = [
    ("purity", |r| Some(r.purity)),
    ("gamma", |r| r.gamma),
    ("delta", |r| r.delta),
];

/// For every problem and solver, the RAND runs with the most and fewest
/// points surviving in the reference front built from all RAND runs of all
/// solvers. Ties go to the lowest run index.
pub fn select_rand_runs<'a>(
    config: &RunConfig,
    n_problems: usize,
    fronts: &'a BTreeMap<CellKey, Front>,
) -> (Vec<Vec<&'a Front>>, Vec<Vec<&'a Front>>) {
    let mut best = Vec::new();
    let mut worst = Vec::new();
    for pi in 0..n_problems {
        let all: Vec<Front> = fronts
            .iter()
            .filter(|((p, _, st, _), _)| *p == pi && *st == Strategy::Rand)
            .map(|(_, f)| f.clone())
            .collect();
        let reference = build_reference_front(&all);
        let (mut b, mut w) = (Vec::new(), Vec::new());
        for &solver in &config.solvers {
            let runs: Vec<(usize, &Front)> = (0..config.runs)
                .map(|r| {
                    let f = &fronts[&(pi, solver, Strategy::Rand, r)];
                    (surviving_points(f, &reference), f)
                })
                .collect();
            let max = runs.iter().map(|(c, _)| *c).max().unwrap_or(0);
            let min = runs.iter().map(|(c, _)| *c).min().unwrap_or(0);
            b.push(runs.iter().find(|(c, _)| *c == max).expect("at least one run").1);
            w.push(runs.iter().find(|(c, _)| *c == min).expect("at least one run").1);
        }
        best.push(b);
        worst.push(w);
    }
    (best, worst)
}

/// Reference points matched by some point of `front`.
pub fn surviving_points(front: &Front, reference: &Front) -> usize {
    reference
        .points
        .iter()
        .filter(|r| front.points.iter().any(|p| near_duplicate(&p.f, &r.f)))
        .count()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config: RunConfig,
    /// Relative path to SHA-256 hex digest.
    pub files: BTreeMap<String, String>,
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn checksum_tree(root: &Path) -> Result<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    for sub in ["fronts", "metrics", "profiles"] {
        let mut entries: Vec<PathBuf> = fs::read_dir(root.join(sub))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        for path in entries {
            let name = path.file_name().expect("dir entry").to_string_lossy().into_owned();
            files.insert(format!("{sub}/{name}"), sha256_file(&path)?);
        }
    }
    files.insert("runs.csv".into(), sha256_file(&root.join("runs.csv"))?);
    Ok(files)
}

/// Loads the manifest and checks every listed checksum.
pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let err = |reason: String| Error::Report {
        path: path.clone(),
        reason,
    };
    let text = fs::read_to_string(&path).map_err(|e| err(format!("cannot read manifest: {e}")))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| err(format!("corrupt manifest: {e}")))?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(err(format!("unsupported format {:?}", manifest.format)));
    }
    for (rel, digest) in &manifest.files {
        let actual = sha256_file(&dir.join(rel)).map_err(|e| err(format!("{rel}: {e}")))?;
        if &actual != digest {
            return Err(err(format!("checksum mismatch for {rel}")));
        }
    }
    Ok(manifest)
}

const CASE_TITLES: [(&str, &str); 3] = [("line", "LINE"), ("rand_best", "RAND best run"), ("rand_worst", "RAND worst run")];

/// Human-readable summary of a benchmark output directory.
pub fn report(dir: &Path) -> Result<String> {
    let manifest = load_manifest(dir)?;
    let single = manifest.config.solvers.len() < 2;
    let mut rdr = csv::Reader::from_path(dir.join("runs.csv"))?;
    let runs: Vec<RunRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;

    let mut out = String::new();
    writeln!(out, "seed {}", manifest.config.seed).ok();
    writeln!(
        out,
        "purity = |reference front| / |reference points found| (1 is best, inf = none found)"
    )
    .ok();
    if single {
        writeln!(out, "single solver: purity is degenerate and reported as undefined").ok();
    }
    for (case, title) in CASE_TITLES {
        let path = dir.join(format!("metrics/{case}.csv"));
        if !manifest.files.contains_key(&format!("metrics/{case}.csv")) {
            continue;
        }
        let reports = metrics::read_reports_csv(fs::File::open(&path)?)?;
        let strategy = if case == "line" { Strategy::Line } else { Strategy::Rand };
        writeln!(out, "\n{title}").ok();
        writeln!(
            out,
            "{:<10} {:<6} {:>6} {:>10} {:>12} {:>8} {:>12} {:>8}",
            "problem", "solver", "points", "purity", "gamma", "delta", "fe1", "strong"
        )
        .ok();
        for r in reports {
            let (hit, total) = runs
                .iter()
                .filter(|row| row.problem == r.problem && row.solver.as_str() == r.solver && row.strategy == strategy)
                .fold((0, 0), |(h, t), row| (h + row.strongly_critical, t + row.starts));
            let purity = if single { "undef".to_string() } else { fmt_fixed(Some(r.purity), 4) };
            writeln!(
                out,
                "{:<10} {:<6} {:>6} {:>10} {:>12} {:>8} {:>12} {:>8}",
                r.problem,
                r.solver,
                r.points,
                purity,
                fmt_fixed(r.gamma, 4),
                fmt_fixed(r.delta, 4),
                fmt_fixed(r.fe1, 1),
                format!("{:.3}", if total > 0 { hit as f64 / total as f64 } else { 0.0 }),
            )
            .ok();
        }
    }
    Ok(out)
}

fn fmt_fixed(v: Option<f64>, digits: usize) -> String {
    match v {
        None => "NA".into(),
        Some(x) if x.is_infinite() => fmt_num(x),
        Some(x) => format!("{x:.digits$}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dir: &Path) -> RunConfig {
        RunConfig {
            problems: vec!["BK1".into()],
            strategies: vec![Strategy::Line],
            starts: 10,
            output_dir: dir.to_path_buf(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn config_defaults_and_parse() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.problems.len(), 12);
        let c = RunConfig::from_toml_str(
            "problems = [\"SRN\"]\nsolvers = [\"MOS\"]\nstrategies = [\"RAND\"]\nseed = 7\n[solver]\nmax_iters = 50\n",
        )
        .unwrap();
        assert_eq!(c.solvers, vec![SolverKind::Mos]);
        assert_eq!(c.solver.max_iters, 50);
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn config_rejects_bad_grids() {
        let mut c = RunConfig {
            problems: vec!["NOPE".into()],
            ..RunConfig::default()
        };
        assert!(matches!(c.resolve(), Err(Error::UnknownProblem(_))));
        c.problems = vec!["DTLZ2".into()];
        assert!(matches!(c.resolve(), Err(Error::InvalidConfig(_))));
        c.strategies = vec![Strategy::Rand];
        assert!(c.resolve().is_ok());
        c.problems = vec!["BK1".into(), "BK1".into()];
        assert!(c.resolve().is_err());
    }

    #[test]
    fn sub_seeds_differ_by_stream() {
        assert_ne!(sub_seed(1, "BK1", 0, "starts"), sub_seed(1, "BK1", 0, "weights"));
        assert_ne!(sub_seed(1, "BK1", 0, "starts"), sub_seed(1, "BK1", 1, "starts"));
        assert_eq!(sub_seed(1, "BK1", 0, "starts"), sub_seed(1, "BK1", 0, "starts"));
    }

    #[test]
    fn plan_uses_midpoint_for_weighted_sum() {
        let c = small(Path::new("unused"));
        let problems = c.resolve().unwrap();
        let jobs = plan_jobs(&c, &problems).unwrap();
        assert_eq!(jobs.len(), 20);
        let mos: Vec<&Job> = jobs.iter().filter(|j| j.solver == SolverKind::Mos).collect();
        assert!(mos.iter().all(|j| j.x0 == vec![2.5, 2.5]));
        assert_eq!(mos[9].weights.as_deref(), Some(&[1.0, 0.0][..]));
    }

    #[test]
    fn small_grid_inventory_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_benchmark(&small(dir.path())).unwrap();
        assert_eq!(summary.fronts.len(), 2);
        assert!(dir.path().join("fronts/BK1__MOSQP__LINE__run0.csv").exists());
        assert!(dir.path().join("fronts/BK1__MOS__LINE__run0.csv").exists());
        assert_eq!(summary.metrics["line"].len(), 2);
        assert!(dir.path().join("profiles/line_purity.csv").exists());
        let text = report(dir.path()).unwrap();
        assert!(text.contains("BK1") && text.contains("MOSQP") && text.contains("MOS "));
    }

    #[test]
    fn report_rejects_missing_or_tampered_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(report(dir.path()), Err(Error::Report { .. })));
        run_benchmark(&small(dir.path())).unwrap();
        fs::write(dir.path().join("runs.csv"), "tampered").unwrap();
        assert!(matches!(report(dir.path()), Err(Error::Report { .. })));
        fs::write(dir.path().join(MANIFEST_FILE), "not = [toml").unwrap();
        assert!(matches!(report(dir.path()), Err(Error::Report { .. })));
    }

    #[test]
    fn single_solver_marks_purity_undefined() {
        let dir = tempfile::tempdir().unwrap();
        let c = RunConfig {
            solvers: vec![SolverKind::Mosqp],
            ..small(dir.path())
        };
        let summary = run_benchmark(&c).unwrap();
        assert_eq!(summary.metrics["line"][0].purity, 1.0);
        assert!(report(dir.path()).unwrap().contains("undef"));
    }
}
