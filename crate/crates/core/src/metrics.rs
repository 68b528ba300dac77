//! Front quality metrics and performance profiles.

use std::io::Write;

use log::warn;

use crate::error::{Error, Result};
use crate::front::{build_reference_front, near_duplicate, Front};
use crate::problem::EvalCounter;

/// Per-objective `(min, max)` over a set of fronts.
pub type Extremes = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub problem: String,
    pub solver: String,
    pub points: usize,
    /// `>= 1`, or infinite when the solver contributes nothing to the reference.
    pub purity: f64,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub fe1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver: String,
    /// `(tau, rho(tau))`, ascending in tau, starting at tau = 1.
    pub samples: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// Step-function value at `tau`.
    pub fn rho(&self, tau: f64) -> f64 {
        self.samples
            .iter()
            .take_while(|(t, _)| *t <= tau)
            .last()
            .map_or(0.0, |(_, r)| *r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub curves: Vec<ProfileCurve>,
    /// Problem indices dropped because no solver had a finite score.
    pub excluded: Vec<usize>,
}

/// `|reference| / |reference points matched by front|`.
pub fn purity(front: &Front, reference: &Front) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::MetricUndefined("purity of an empty reference front"));
    }
    let hits = reference
        .points
        .iter()
        .filter(|r| front.points.iter().any(|p| near_duplicate(&p.f, &r.f)))
        .count();
    if hits == 0 {
        Ok(f64::INFINITY)
    } else {
        Ok(reference.len() as f64 / hits as f64)
    }
}

/// Per-objective range over every point of every front; `None` if all are empty.
pub fn extremes(fronts: &[Front]) -> Option<Extremes> {
    let mut pts = fronts.iter().flat_map(|f| f.points.iter());
    let first = pts.next()?;
    let mut ext: Extremes = first.f.iter().map(|v| (*v, *v)).collect();
    for p in pts {
        for (e, v) in ext.iter_mut().zip(&p.f) {
            e.0 = e.0.min(*v);
            e.1 = e.1.max(*v);
        }
    }
    Some(ext)
}

/// Consecutive gaps of one objective: extreme min, sorted values, extreme max.
fn gaps(values: &[Vec<f64>], j: usize, ext: (f64, f64)) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|f| f[j]).collect();
    v.sort_by(f64::total_cmp);
    let mut chain = Vec::with_capacity(v.len() + 2);
    chain.push(ext.0);
    chain.extend(v);
    chain.push(ext.1);
    chain.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Largest gap over all objectives.
pub fn gamma_spread(values: &[Vec<f64>], extremes: &[(f64, f64)]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::MetricUndefined("gamma spread of an empty front"));
    }
    Ok(extremes
        .iter()
        .enumerate()
        .map(|(j, e)| gaps(values, j, *e).into_iter().fold(0.0, f64::max))
        .fold(0.0, f64::max))
}

/// Gap uniformity, maximized over objectives. A zero denominator (all values
/// at a single extreme) scores 0.
pub fn delta_spread(values: &[Vec<f64>], extremes: &[(f64, f64)]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::MetricUndefined("delta spread needs at least two points"));
    }
    let mut best = 0.0f64;
    for (j, e) in extremes.iter().enumerate() {
        let g = gaps(values, j, *e);
        let (first, last) = (g[0], g[g.len() - 1]);
        let inner = &g[1..g.len() - 1];
        let mean = inner.iter().sum::<f64>() / inner.len() as f64;
        let dev: f64 = inner.iter().map(|d| (d - mean).abs()).sum();
        let den = first + last + inner.len() as f64 * mean;
        let val = if den > 0.0 { (first + last + dev) / den } else { 0.0 };
        best = best.max(val);
    }
    Ok(best)
}

/// Performance profiles from a problems-by-solvers score matrix (smaller is
/// better, infinity means failure).
pub fn performance_profile(solvers: &[String], scores: &[Vec<f64>]) -> Result<Profile> {
    if scores.iter().any(|row| row.len() != solvers.len()) {
        return Err(Error::Dimension {
            expected: solvers.len(),
            got: scores.iter().map(Vec::len).find(|l| *l != solvers.len()).unwrap_or(0),
        });
    }
    if scores.iter().flatten().any(|s| s.is_nan() || *s < 0.0) {
        return Err(Error::InvalidConfig("profile scores must be non-negative".into()));
    }
    let mut excluded = Vec::new();
    let mut ratios: Vec<Vec<f64>> = Vec::new();
    for (p, row) in scores.iter().enumerate() {
        let finite: Vec<f64> = row.iter().copied().filter(|s| s.is_finite()).collect();
        if finite.is_empty() {
            warn!("problem {p}: no solver has a finite score, excluded from profile");
            excluded.push(p);
            continue;
        }
        let best = finite.iter().copied().fold(f64::INFINITY, f64::min);
        // a zero best score is replaced by the smallest positive one
        let base = if best > 0.0 {
            best
        } else {
            finite.iter().copied().filter(|s| *s > 0.0).fold(f64::INFINITY, f64::min)
        };
        ratios.push(
            row.iter()
                .map(|s| {
                    if !s.is_finite() {
                        f64::INFINITY
                    } else if base.is_infinite() {
                        1.0
                    } else {
                        (s / base).max(1.0)
                    }
                })
                .collect(),
        );
    }
    let count = ratios.len() as f64;
    let mut taus: Vec<f64> = ratios.iter().flatten().copied().filter(|r| r.is_finite()).collect();
    taus.push(1.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let curves = solvers
        .iter()
        .enumerate()
        .map(|(s, name)| ProfileCurve {
            solver: name.clone(),
            samples: taus
                .iter()
                .map(|&tau| {
                    let hit = ratios.iter().filter(|r| r[s] <= tau).count() as f64;
                    (tau, if count > 0.0 { hit / count } else { 0.0 })
                })
                .collect(),
        })
        .collect();
    Ok(Profile { curves, excluded })
}

/// Objective-plus-gradient evaluation cost per non-dominated point.
pub fn fe1(evals: &EvalCounter, n: usize, n1: usize) -> Result<f64> {
    if n1 == 0 {
        return Err(Error::MetricUndefined("FE1 with no non-dominated points"));
    }
    Ok((evals.num_f as f64 + n as f64 * evals.num_grad_f as f64) / n1 as f64)
}

/// All metrics for each solver's front on one problem, against the reference
/// and extremes built from the same fronts.
pub fn evaluate_fronts(problem: &str, n: usize, fronts: &[Front]) -> Vec<MetricReport> {
    let reference = build_reference_front(fronts);
    let ext = extremes(fronts);
    fronts
        .iter()
        .map(|front| {
            let values = front.objective_vectors();
            let spread = |f: fn(&[Vec<f64>], &[(f64, f64)]) -> Result<f64>| ext.as_ref().and_then(|e| f(&values, e).ok());
            MetricReport {
                problem: problem.to_string(),
                solver: front.solver.clone(),
                points: front.len(),
                purity: purity(front, &reference).unwrap_or(f64::INFINITY),
                gamma: spread(gamma_spread),
                delta: spread(delta_spread),
                fe1: fe1(&front.evals, n, front.len()).ok(),
            }
        })
        .collect()
}

pub(crate) fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        v.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), fmt_num)
}

pub fn parse_num(s: &str) -> Option<f64> {
    match s {
        "NA" => None,
        "inf" => Some(f64::INFINITY),
        _ => s.parse().ok(),
    }
}

pub const REPORT_HEADER: [&str; 7] = ["problem", "solver", "points", "purity", "gamma", "delta", "fe1"];

pub fn write_reports_csv<W: Write>(reports: &[MetricReport], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(REPORT_HEADER)?;
    for r in reports {
        wtr.write_record([
            r.problem.clone(),
            r.solver.clone(),
            r.points.to_string(),
            fmt_num(r.purity),
            fmt_opt(r.gamma),
            fmt_opt(r.delta),
            fmt_opt(r.fe1),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_reports_csv<R: std::io::Read>(input: R) -> Result<Vec<MetricReport>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != REPORT_HEADER.len() {
            return Err(Error::InvalidConfig(format!("metric row has {} fields", rec.len())));
        }
        let bad = || Error::InvalidConfig(format!("malformed metric row {rec:?}"));
        out.push(MetricReport {
            problem: rec[0].to_string(),
            solver: rec[1].to_string(),
            points: rec[2].parse().map_err(|_| bad())?,
            purity: parse_num(&rec[3]).ok_or_else(bad)?,
            gamma: parse_num(&rec[4]),
            delta: parse_num(&rec[5]),
            fe1: parse_num(&rec[6]),
        });
    }
    Ok(out)
}

/// Long format: `solver, tau, rho`.
pub fn write_profile_csv<W: Write>(profile: &Profile, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["solver", "tau", "rho"])?;
    for c in &profile.curves {
        for (tau, rho) in &c.samples {
            wtr.write_record([c.solver.clone(), fmt_num(*tau), fmt_num(*rho)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front::FrontPoint;
    use crate::solver::Status;

    fn front(solver: &str, fs: &[&[f64]]) -> Front {
        Front {
            solver: solver.into(),
            points: fs
                .iter()
                .enumerate()
                .map(|(i, f)| FrontPoint {
                    x: vec![],
                    f: f.to_vec(),
                    phi: 0.0,
                    feasible: true,
                    status: Status::StronglyCritical,
                    run_id: 0,
                    start_id: i,
                })
                .collect(),
            evals: EvalCounter::default(),
        }
    }

    #[test]
    fn purity_examples() {
        let a = front("A", &[&[1.0, 2.0], &[2.0, 1.0]]);
        let b = front("B", &[&[1.5, 1.5]]);
        let reference = build_reference_front(&[a.clone(), b.clone()]);
        assert_eq!(purity(&a, &reference).unwrap(), 1.5);
        assert_eq!(purity(&b, &reference).unwrap(), 3.0);
        assert_eq!(purity(&reference, &reference).unwrap(), 1.0);
        let c = front("C", &[&[9.0, 9.0]]);
        assert_eq!(purity(&c, &reference).unwrap(), f64::INFINITY);
        assert!(matches!(purity(&a, &front("E", &[])), Err(Error::MetricUndefined(_))));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_spread(&[vec![1.0]], &[(0.0, 3.0)]).unwrap(), 2.0);
        let uniform: Vec<Vec<f64>> = (0..=4).map(|k| vec![0.5 * k as f64]).collect();
        assert_eq!(gamma_spread(&uniform, &[(0.0, 2.0)]).unwrap(), 0.5);
        let two = vec![vec![1.0, 0.5], vec![2.0, 3.0]];
        let g0 = gamma_spread(&[vec![1.0], vec![2.0]], &[(0.0, 2.0)]).unwrap();
        let g1 = gamma_spread(&[vec![0.5], vec![3.0]], &[(0.0, 4.0)]).unwrap();
        assert_eq!(gamma_spread(&two, &[(0.0, 2.0), (0.0, 4.0)]).unwrap(), g0.max(g1));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_spread(&[vec![1.0], vec![2.0]], &[(0.0, 4.0)]).unwrap(), 0.75);
        for n in 2..8usize {
            let vals: Vec<Vec<f64>> = (1..=n).map(|k| vec![k as f64]).collect();
            let d = delta_spread(&vals, &[(0.0, (n + 1) as f64)]).unwrap();
            assert!((d - 2.0 / (n as f64 + 1.0)).abs() < 1e-15, "n={n}: {d}");
        }
        assert!(matches!(delta_spread(&[vec![1.0]], &[(0.0, 1.0)]), Err(Error::MetricUndefined(_))));
        assert_eq!(delta_spread(&[vec![1.0], vec![1.0]], &[(1.0, 1.0)]).unwrap(), 0.0);
    }

    #[test]
    fn spread_is_permutation_invariant() {
        let a = vec![vec![3.0, 0.1], vec![1.0, 0.7], vec![2.0, 0.2]];
        let mut b = a.clone();
        b.reverse();
        let e = [(0.0, 4.0), (0.0, 1.0)];
        assert_eq!(gamma_spread(&a, &e).unwrap(), gamma_spread(&b, &e).unwrap());
        assert_eq!(delta_spread(&a, &e).unwrap(), delta_spread(&b, &e).unwrap());
    }

    #[test]
    fn profile_examples() {
        let names = vec!["s1".to_string(), "s2".to_string()];
        let p = performance_profile(&names, &[vec![1.0, 2.0], vec![4.0, 2.0]]).unwrap();
        let s1 = &p.curves[0];
        assert_eq!(s1.samples, vec![(1.0, 0.5), (2.0, 1.0)]);
        assert_eq!(s1.rho(1.5), 0.5);

        let p = performance_profile(&names, &[vec![1.0, 3.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(p.curves[0].rho(1.0), 1.0);

        let p = performance_profile(&names, &[vec![1.0, f64::INFINITY], vec![2.0, f64::INFINITY]]).unwrap();
        assert!(p.curves[1].samples.iter().all(|(_, r)| *r == 0.0));

        let p = performance_profile(&names, &[vec![f64::INFINITY; 2], vec![1.0, 2.0]]).unwrap();
        assert_eq!(p.excluded, vec![0]);
        assert_eq!(p.curves[0].rho(1.0), 1.0);
    }

    #[test]
    fn profile_with_zero_best() {
        let names = vec!["a".to_string(), "b".to_string()];
        let p = performance_profile(&names, &[vec![0.0, 0.5], vec![0.0, 0.0]]).unwrap();
        assert_eq!(p.curves[0].rho(1.0), 1.0);
        assert_eq!(p.curves[1].rho(1.0), 1.0);
    }

    #[test]
    fn fe1_examples() {
        let ev = EvalCounter { num_f: 300, num_grad_f: 100 };
        assert_eq!(fe1(&ev, 2, 50).unwrap(), 10.0);
        let ev = EvalCounter { num_f: 300, num_grad_f: 0 };
        assert_eq!(fe1(&ev, 2, 50).unwrap(), 6.0);
        assert!(matches!(fe1(&ev, 2, 0), Err(Error::MetricUndefined(_))));
    }

    #[test]
    fn report_csv_roundtrip() {
        let a = front("A", &[&[1.0, 2.0], &[2.0, 1.0]]);
        let b = front("B", &[&[1.5, 1.5]]);
        let reports = evaluate_fronts("toy", 2, &[a, b]);
        assert_eq!(reports[1].delta, None);
        let mut buf = Vec::new();
        write_reports_csv(&reports, &mut buf).unwrap();
        assert_eq!(read_reports_csv(buf.as_slice()).unwrap(), reports);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn profile_is_monotone_and_bounded(
                scores in proptest::collection::vec(
                    proptest::collection::vec(prop_oneof![Just(f64::INFINITY), 0.0f64..10.0], 3),
                    1..12,
                )
            ) {
                let names: Vec<String> = (0..3).map(|i| format!("s{i}")).collect();
                let p = performance_profile(&names, &scores).unwrap();
                let kept: Vec<&Vec<f64>> = scores
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !p.excluded.contains(i))
                    .map(|(_, r)| r)
                    .collect();
                for (s, c) in p.curves.iter().enumerate() {
                    prop_assert_eq!(c.samples[0].0, 1.0);
                    for w in c.samples.windows(2) {
                        prop_assert!(w[0].0 < w[1].0 && w[0].1 <= w[1].1);
                    }
                    for (_, r) in &c.samples {
                        prop_assert!((0.0..=1.0).contains(r));
                    }
                    if !kept.is_empty() {
                        let finite = kept.iter().filter(|r| r[s].is_finite()).count() as f64;
                        prop_assert_eq!(c.samples.last().unwrap().1, finite / kept.len() as f64);
                    }
                }
            }

            #[test]
            fn purity_ignores_order(fs in proptest::collection::vec((0u8..10, 0u8..10), 1..20)) {
                let pts: Vec<Vec<f64>> = fs.iter().map(|(a, b)| vec![*a as f64, *b as f64]).collect();
                let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
                let a = front("A", &refs);
                let mut rev = refs.clone();
                rev.reverse();
                let b = front("A", &rev);
                let other = front("B", &[&[4.5, 4.5]]);
                let r1 = build_reference_front(&[Front::from_candidates("A", a.points, EvalCounter::default()), other.clone()]);
                let fa = Front::from_candidates("A", front("A", &refs).points, EvalCounter::default());
                let fb = Front::from_candidates("A", b.points, EvalCounter::default());
                prop_assert_eq!(purity(&fa, &r1).unwrap(), purity(&fb, &r1).unwrap());
            }
        }
    }
}
