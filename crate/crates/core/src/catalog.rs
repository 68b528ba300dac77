//! Benchmark problems with analytic objectives, gradients and constraints.
//!
//! Formulas follow the original sources named in each entry's `source_note`.
//! Every transcription is checked against central differences and, where the
//! Pareto set is known in closed form, against feasibility and mutual
//! non-dominance of sampled front points.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::front::dominates;
use crate::problem::{evaluate_phi, ConstraintKind, Problem, FEASIBILITY_TOL};

/// Maps `s` in `[0, 1]` to a point of the efficient set.
pub type ParetoSetCurve = fn(f64) -> Vec<f64>;

#[derive(Clone)]
pub struct CatalogEntry {
    pub problem: Problem,
    pub known_pareto_set: Option<ParetoSetCurve>,
    pub source_note: &'static str,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("problem", &self.problem)
            .field("known_front", &self.known_pareto_set.is_some())
            .field("source_note", &self.source_note)
            .finish()
    }
}

/// Problems run by the default benchmark.
pub const DEFAULT_PROBLEMS: [&str; 12] = [
    "BK1", "Fonseca", "MOP2", "MOP3", "SP1", "SSFYY1", "LRS1", "DTLZ2n2", "BNH", "SRN", "TNK", "OSY",
];

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        bk1(),
        fonseca(),
        mop2(),
        mop3(),
        sp1(),
        ssfyy1(),
        lrs1(),
        dtlz2n2(),
        bnh(),
        srn(),
        tnk(),
        osy(),
        dtlz2(),
    ]
}

pub fn lookup(name: &str) -> Result<CatalogEntry> {
    catalog()
        .into_iter()
        .find(|e| e.problem.name() == name)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))
}

pub fn names() -> Vec<String> {
    catalog().into_iter().map(|e| e.problem.name().to_string()).collect()
}

fn sq(v: f64) -> f64 {
    v * v
}

fn bk1() -> CatalogEntry {
    let problem = Problem::builder("BK1", vec![-5.0; 2], vec![10.0; 2])
        .objective(|x| sq(x[0]) + sq(x[1]), |x| vec![2.0 * x[0], 2.0 * x[1]])
        .objective(
            |x| sq(x[0] - 5.0) + sq(x[1] - 5.0),
            |x| vec![2.0 * (x[0] - 5.0), 2.0 * (x[1] - 5.0)],
        )
        .build()
        .expect("BK1");
    CatalogEntry {
        problem,
        known_pareto_set: Some(|s| vec![5.0 * s, 5.0 * s]),
        source_note: "Binh & Korn (1997), via Huband et al. (2006)",
    }
}

/// `1 - exp(-|x - c|^2)` and its gradient.
fn gaussian_dip(center: Vec<f64>) -> (impl Fn(&[f64]) -> f64, impl Fn(&[f64]) -> Vec<f64>) {
    let c2 = center.clone();
    let value = move |x: &[f64]| {
        let s: f64 = x.iter().zip(&center).map(|(xi, ci)| sq(xi - ci)).sum();
        1.0 - (-s).exp()
    };
    let gradient = move |x: &[f64]| {
        let s: f64 = x.iter().zip(&c2).map(|(xi, ci)| sq(xi - ci)).sum();
        let e = (-s).exp();
        x.iter().zip(&c2).map(|(xi, ci)| 2.0 * (xi - ci) * e).collect()
    };
    (value, gradient)
}

fn fonseca() -> CatalogEntry {
    let (f1, g1) = gaussian_dip(vec![1.0, -1.0]);
    let (f2, g2) = gaussian_dip(vec![-1.0, 1.0]);
    let problem = Problem::builder("Fonseca", vec![-4.0; 2], vec![4.0; 2])
        .objective(f1, g1)
        .objective(f2, g2)
        .build()
        .expect("Fonseca");
    CatalogEntry {
        problem,
        known_pareto_set: Some(|s| vec![1.0 - 2.0 * s, -1.0 + 2.0 * s]),
        source_note: "Fonseca & Fleming (1995)",
    }
}

fn mop2() -> CatalogEntry {
    let c = FRAC_1_SQRT_2;
    let (f1, g1) = gaussian_dip(vec![c, c]);
    let (f2, g2) = gaussian_dip(vec![-c, -c]);
    let problem = Problem::builder("MOP2", vec![-4.0; 2], vec![4.0; 2])
        .objective(f1, g1)
        .objective(f2, g2)
        .build()
        .expect("MOP2");
    CatalogEntry {
        problem,
        known_pareto_set: Some(|s| {
            let v = FRAC_1_SQRT_2 * (1.0 - 2.0 * s);
            vec![v, v]
        }),
        source_note: "Fonseca & Fleming (1995), MOP2 in Huband et al. (2006)",
    }
}

fn mop3() -> CatalogEntry {
    // Poloni's problem, minimization form.
    let (s1, c1, s2, c2) = (1f64.sin(), 1f64.cos(), 2f64.sin(), 2f64.cos());
    let a1 = 0.5 * s1 - 2.0 * c1 + s2 - 1.5 * c2;
    let a2 = 1.5 * s1 - c1 + 2.0 * s2 - 0.5 * c2;
    let b = |x: &[f64]| {
        let (s1, c1, s2, c2) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
        (
            0.5 * s1 - 2.0 * c1 + s2 - 1.5 * c2,
            1.5 * s1 - c1 + 2.0 * s2 - 0.5 * c2,
        )
    };
    let problem = Problem::builder("MOP3", vec![-PI; 2], vec![PI; 2])
        .objective(
            move |x| {
                let (b1, b2) = b(x);
                1.0 + sq(a1 - b1) + sq(a2 - b2)
            },
            move |x| {
                let (b1, b2) = b(x);
                let (s1, c1, s2, c2) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
                let db1 = [0.5 * c1 + 2.0 * s1, c2 + 1.5 * s2];
                let db2 = [1.5 * c1 + s1, 2.0 * c2 + 0.5 * s2];
                (0..2)
                    .map(|k| -2.0 * (a1 - b1) * db1[k] - 2.0 * (a2 - b2) * db2[k])
                    .collect()
            },
        )
        .objective(
            |x| sq(x[0] + 3.0) + sq(x[1] + 1.0),
            |x| vec![2.0 * (x[0] + 3.0), 2.0 * (x[1] + 1.0)],
        )
        .build()
        .expect("MOP3");
    CatalogEntry {
        problem,
        known_pareto_set: None,
        source_note: "Poloni (1997), MOP3 in Huband et al. (2006)",
    }
}

fn sp1() -> CatalogEntry {
    let problem = Problem::builder("SP1", vec![-100.0; 2], vec![100.0; 2])
        .objective(
            |x| sq(x[0] - 1.0) + sq(x[0] - x[1]),
            |x| vec![2.0 * (x[0] - 1.0) + 2.0 * (x[0] - x[1]), -2.0 * (x[0] - x[1])],
        )
        .objective(
            |x| sq(x[1] - 3.0) + sq(x[0] - x[1]),
            |x| vec![2.0 * (x[0] - x[1]), 2.0 * (x[1] - 3.0) - 2.0 * (x[0] - x[1])],
        )
        .build()
        .expect("SP1");
    CatalogEntry {
        problem,
        // minimizers of s f1 + (1 - s) f2
        known_pareto_set: Some(|s| {
            let q = 1.0 + s - s * s;
            vec![1.0 + 2.0 * (1.0 - s) / q, 3.0 - 2.0 * s / q]
        }),
        source_note: "Sefrioui & Periaux (2000), via Huband et al. (2006)",
    }
}

fn ssfyy1() -> CatalogEntry {
    let problem = Problem::builder("SSFYY1", vec![-100.0; 2], vec![100.0; 2])
        .objective(|x| sq(x[0]) + sq(x[1]), |x| vec![2.0 * x[0], 2.0 * x[1]])
        .objective(
            |x| sq(x[0] - 1.0) + sq(x[1] - 2.0),
            |x| vec![2.0 * (x[0] - 1.0), 2.0 * (x[1] - 2.0)],
        )
        .build()
        .expect("SSFYY1");
    CatalogEntry {
        problem,
        known_pareto_set: Some(|s| vec![s, 2.0 * s]),
        source_note: "Shim et al. (2002), via Huband et al. (2006)",
    }
}

fn lrs1() -> CatalogEntry {
    let problem = Problem::builder("LRS1", vec![-50.0; 2], vec![50.0; 2])
        .objective(|x| sq(x[0]) + sq(x[1]), |x| vec![2.0 * x[0], 2.0 * x[1]])
        .objective(
            |x| sq(x[0] + 2.0) + sq(x[1]),
            |x| vec![2.0 * (x[0] + 2.0), 2.0 * x[1]],
        )
        .build()
        .expect("LRS1");
    CatalogEntry {
        problem,
        known_pareto_set: Some(|s| vec![-2.0 * s, 0.0]),
        source_note: "Laumanns, Rudolph & Schwefel (1998), via Huband et al. (2006)",
    }
}

fn dtlz2n2() -> CatalogEntry {
    let half_pi = 0.5 * PI;
    let problem = Problem::builder("DTLZ2n2", vec![0.0; 2], vec![1.0; 2])
        .objective(
            move |x| (1.0 + sq(x[1] - 0.5)) * (half_pi * x[0]).cos(),
            move |x| {
                let g = 1.0 + sq(x[1] - 0.5);
                let a = half_pi * x[0];
                vec![-g * half_pi * a.sin(), 2.0 * (x[1] - 0.5) * a.cos()]
            },
        )
        .objective(
            move |x| (1.0 + sq(x[1] - 0.5)) * (half_pi * x[0]).sin(),
            move |x| {
                let g = 1.0 + sq(x[1] - 0.5);
                let a = half_pi * x[0];
                vec![g * half_pi * a.cos(), 2.0 * (x[1] - 0.5) * a.sin()]
            },
        )
        .build()
        .expect("DTLZ2n2");
    CatalogEntry {
        problem,
        known_pareto_set: Some(|s| vec![s, 0.5]),
        source_note: "Deb, Thiele, Laumanns & Zitzler (2002), two-variable two-objective instance",
    }
}

/// Three-objective DTLZ2 with 12 variables. Not part of the default grid.
fn dtlz2() -> CatalogEntry {
    const N: usize = 12;
    let half_pi = 0.5 * PI;
    let g = |x: &[f64]| 1.0 + x[2..].iter().map(|v| sq(v - 0.5)).sum::<f64>();
    let dg = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; N];
        for i in 2..N {
            out[i] = 2.0 * (x[i] - 0.5);
        }
        out
    };
    let trig = move |x: &[f64]| {
        let (a, b) = (half_pi * x[0], half_pi * x[1]);
        (a.cos(), a.sin(), b.cos(), b.sin())
    };
    let problem = Problem::builder("DTLZ2", vec![0.0; N], vec![1.0; N])
        .objective(
            move |x| {
                let (ca, _, cb, _) = trig(x);
                g(x) * ca * cb
            },
            move |x| {
                let (ca, sa, cb, sb) = trig(x);
                let gv = g(x);
                let mut out: Vec<f64> = dg(x).iter().map(|v| v * ca * cb).collect();
                out[0] = -gv * half_pi * sa * cb;
                out[1] = -gv * half_pi * ca * sb;
                out
            },
        )
        .objective(
            move |x| {
                let (ca, _, _, sb) = trig(x);
                g(x) * ca * sb
            },
            move |x| {
                let (ca, sa, cb, sb) = trig(x);
                let gv = g(x);
                let mut out: Vec<f64> = dg(x).iter().map(|v| v * ca * sb).collect();
                out[0] = -gv * half_pi * sa * sb;
                out[1] = gv * half_pi * ca * cb;
                out
            },
        )
        .objective(
            move |x| {
                let (_, sa, _, _) = trig(x);
                g(x) * sa
            },
            move |x| {
                let (ca, sa, _, _) = trig(x);
                let gv = g(x);
                let mut out: Vec<f64> = dg(x).iter().map(|v| v * sa).collect();
                out[0] = gv * half_pi * ca;
                out[1] = 0.0;
                out
            },
        )
        .build()
        .expect("DTLZ2");
    CatalogEntry {
        problem,
        known_pareto_set: None,
        source_note: "Deb, Thiele, Laumanns & Zitzler (2002)",
    }
}

fn bnh() -> CatalogEntry {
    let problem = Problem::builder("BNH", vec![0.0, 0.0], vec![5.0, 3.0])
        .objective(
            |x| 4.0 * sq(x[0]) + 4.0 * sq(x[1]),
            |x| vec![8.0 * x[0], 8.0 * x[1]],
        )
        .objective(
            |x| sq(x[0] - 5.0) + sq(x[1] - 5.0),
            |x| vec![2.0 * (x[0] - 5.0), 2.0 * (x[1] - 5.0)],
        )
        .constraint(
            ConstraintKind::Nonlinear,
            |x| sq(x[0] - 5.0) + sq(x[1]) - 25.0,
            |x| vec![2.0 * (x[0] - 5.0), 2.0 * x[1]],
        )
        .constraint(
            ConstraintKind::Nonlinear,
            |x| 7.7 - sq(x[0] - 8.0) - sq(x[1] + 3.0),
            |x| vec![-2.0 * (x[0] - 8.0), -2.0 * (x[1] + 3.0)],
        )
        .build()
        .expect("BNH");
    CatalogEntry {
        problem,
        known_pareto_set: Some(|s| {
            // x1 = x2 in [0, 3], then x2 = 3 with x1 in [3, 5]
            let arc = 5.0 * s;
            if arc <= 3.0 {
                vec![arc, arc]
            } else {
                vec![arc, 3.0]
            }
        }),
        source_note: "Binh & Korn (1997), constrained form in Deb (2001)",
    }
}

fn srn() -> CatalogEntry {
    let problem = Problem::builder("SRN", vec![-20.0; 2], vec![20.0; 2])
        .objective(
            |x| 2.0 + sq(x[0] - 2.0) + sq(x[1] - 1.0),
            |x| vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)],
        )
        .objective(
            |x| 9.0 * x[0] - sq(x[1] - 1.0),
            |x| vec![9.0, -2.0 * (x[1] - 1.0)],
        )
        .constraint(
            ConstraintKind::Nonlinear,
            |x| sq(x[0]) + sq(x[1]) - 225.0,
            |x| vec![2.0 * x[0], 2.0 * x[1]],
        )
        .constraint(
            ConstraintKind::Linear,
            |x| x[0] - 3.0 * x[1] + 10.0,
            |_| vec![1.0, -3.0],
        )
        .build()
        .expect("SRN");
    CatalogEntry {
        problem,
        known_pareto_set: Some(|s| vec![-2.5, 2.5 + s * 12.2]),
        source_note: "Srinivas & Deb (1994), as listed in Deb (2001)",
    }
}

fn tnk() -> CatalogEntry {
    let problem = Problem::builder("TNK", vec![0.0; 2], vec![PI; 2])
        .objective(|x| x[0], |_| vec![1.0, 0.0])
        .objective(|x| x[1], |_| vec![0.0, 1.0])
        .constraint(
            ConstraintKind::Nonlinear,
            |x| 1.0 - sq(x[0]) - sq(x[1]) + 0.1 * (16.0 * x[0].atan2(x[1])).cos(),
            |x| {
                let r2 = sq(x[0]) + sq(x[1]);
                // the angular term has no gradient at the origin
                let (da0, da1) = if r2 > 0.0 { (x[1] / r2, -x[0] / r2) } else { (0.0, 0.0) };
                let s = -1.6 * (16.0 * x[0].atan2(x[1])).sin();
                vec![-2.0 * x[0] + s * da0, -2.0 * x[1] + s * da1]
            },
        )
        .constraint(
            ConstraintKind::Nonlinear,
            |x| sq(x[0] - 0.5) + sq(x[1] - 0.5) - 0.5,
            |x| vec![2.0 * (x[0] - 0.5), 2.0 * (x[1] - 0.5)],
        )
        .build()
        .expect("TNK");
    CatalogEntry {
        problem,
        known_pareto_set: None,
        source_note: "Tanaka et al. (1995), as listed in Deb (2001); atan(x1/x2) taken as atan2(x1, x2)",
    }
}

fn osy() -> CatalogEntry {
    let lower = vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    let upper = vec![10.0, 10.0, 5.0, 6.0, 5.0, 10.0];
    let problem = Problem::builder("OSY", lower, upper)
        .objective(
            |x| {
                -(25.0 * sq(x[0] - 2.0) + sq(x[1] - 2.0) + sq(x[2] - 1.0) + sq(x[3] - 4.0) + sq(x[4] - 1.0))
            },
            |x| {
                vec![
                    -50.0 * (x[0] - 2.0),
                    -2.0 * (x[1] - 2.0),
                    -2.0 * (x[2] - 1.0),
                    -2.0 * (x[3] - 4.0),
                    -2.0 * (x[4] - 1.0),
                    0.0,
                ]
            },
        )
        .objective(
            |x| x.iter().map(|v| v * v).sum(),
            |x| x.iter().map(|v| 2.0 * v).collect(),
        )
        .constraint(
            ConstraintKind::Linear,
            |x| 2.0 - x[0] - x[1],
            |_| vec![-1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
        )
        .constraint(
            ConstraintKind::Linear,
            |x| x[0] + x[1] - 6.0,
            |_| vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        )
        .constraint(
            ConstraintKind::Linear,
            |x| x[1] - x[0] - 2.0,
            |_| vec![-1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        )
        .constraint(
            ConstraintKind::Linear,
            |x| x[0] - 3.0 * x[1] - 2.0,
            |_| vec![1.0, -3.0, 0.0, 0.0, 0.0, 0.0],
        )
        .constraint(
            ConstraintKind::Nonlinear,
            |x| sq(x[2] - 3.0) + x[3] - 4.0,
            |x| vec![0.0, 0.0, 2.0 * (x[2] - 3.0), 1.0, 0.0, 0.0],
        )
        .constraint(
            ConstraintKind::Nonlinear,
            |x| 4.0 - sq(x[4] - 3.0) - x[5],
            |x| vec![0.0, 0.0, 0.0, 0.0, -2.0 * (x[4] - 3.0), -1.0],
        )
        .build()
        .expect("OSY");
    CatalogEntry {
        problem,
        known_pareto_set: None,
        source_note: "Osyczka & Kundu (1995), as listed in Deb (2001)",
    }
}

/// Outcome of [`validate_entry`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub problem: String,
    pub points_checked: usize,
    /// Largest relative gap between analytic and central-difference gradients.
    pub max_gradient_error: f64,
    pub front_samples: usize,
}

pub const VALIDATION_POINTS: usize = 20;
const FRONT_SAMPLES: usize = 25;
const CENTRAL_STEP: f64 = 1e-6;

pub fn validate_entry(entry: &CatalogEntry) -> Result<ValidationReport> {
    validate_entry_with_tol(entry, 1e-4)
}

/// Checks analytic gradients at random interior points against central
/// differences (relative tolerance `tol`) and, when a closed-form efficient
/// set is known, that its sampled images are feasible and mutually
/// non-dominated.
pub fn validate_entry_with_tol(entry: &CatalogEntry, tol: f64) -> Result<ValidationReport> {
    let p = &entry.problem;
    let fail = |reason: String| Error::CatalogValidation {
        problem: p.name().to_string(),
        reason,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let mut max_err = 0.0_f64;
    for _ in 0..VALIDATION_POINTS {
        let x: Vec<f64> = p
            .lower()
            .iter()
            .zip(p.upper())
            .map(|(l, u)| {
                let margin = 0.01 * (u - l);
                rng.random_range(l + margin..u - margin)
            })
            .collect();
        let funcs = p
            .objectives()
            .iter()
            .enumerate()
            .map(|(j, f)| (format!("objective {j}"), f))
            .chain(p.constraints().iter().enumerate().map(|(i, c)| (format!("constraint {i}"), &c.func)));
        for (label, func) in funcs {
            if !func.has_analytic_gradient() {
                continue;
            }
            let analytic = func.gradient(&x);
            let numeric = func.central_difference(&x, CENTRAL_STEP);
            if analytic.len() != p.n() {
                return Err(fail(format!("{label}: gradient has length {}", analytic.len())));
            }
            for (k, (a, c)) in analytic.iter().zip(&numeric).enumerate() {
                let err = (a - c).abs() / a.abs().max(c.abs()).max(1.0);
                if !(err <= tol) {
                    return Err(fail(format!(
                        "{label}: d/dx_{k} analytic {a} vs finite difference {c} at {x:?}"
                    )));
                }
                max_err = max_err.max(err);
            }
        }
    }

    let mut front_samples = 0;
    if let Some(curve) = entry.known_pareto_set {
        let mut images = Vec::with_capacity(FRONT_SAMPLES);
        for i in 0..FRONT_SAMPLES {
            let s = i as f64 / (FRONT_SAMPLES - 1) as f64;
            let x = curve(s);
            let phi = evaluate_phi(p, &x)?.phi;
            if phi > FEASIBILITY_TOL {
                return Err(fail(format!("known front point {x:?} is infeasible (phi = {phi})")));
            }
            images.push(p.objective_values(&x)?);
        }
        for (a, fa) in images.iter().enumerate() {
            for (b, fb) in images.iter().enumerate() {
                if a != b && dominates(fa, fb) {
                    return Err(fail(format!("known front sample {a} dominates sample {b}")));
                }
            }
        }
        front_samples = images.len();
    }

    Ok(ValidationReport {
        problem: p.name().to_string(),
        points_checked: VALIDATION_POINTS,
        max_gradient_error: max_err,
        front_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SmoothFn;

    fn dims(name: &str) -> (usize, usize, usize, usize) {
        let p = lookup(name).unwrap().problem;
        (
            p.m(),
            p.n(),
            p.count_constraints(ConstraintKind::Linear),
            p.count_constraints(ConstraintKind::Nonlinear),
        )
    }

    #[test]
    fn table_dimensions() {
        for name in ["BK1", "Fonseca", "MOP2", "MOP3", "SP1", "SSFYY1", "LRS1", "DTLZ2n2"] {
            assert_eq!(dims(name), (2, 2, 0, 0), "{name}");
        }
        assert_eq!(dims("DTLZ2"), (3, 12, 0, 0));
        assert_eq!(dims("BNH"), (2, 2, 0, 2));
        assert_eq!(dims("SRN"), (2, 2, 1, 1));
        assert_eq!(dims("TNK"), (2, 2, 0, 2));
        assert_eq!(dims("OSY"), (2, 6, 4, 2));
    }

    #[test]
    fn default_problems_resolve() {
        for name in DEFAULT_PROBLEMS {
            let e = lookup(name).unwrap();
            assert!(e.problem.m() >= 2);
            assert_eq!(e.problem.p(), e.problem.constraints().len() + 2 * e.problem.n());
        }
        assert!(matches!(lookup("ZDT3"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn every_entry_validates() {
        for e in catalog() {
            let r = validate_entry(&e).unwrap_or_else(|err| panic!("{err}"));
            assert_eq!(r.points_checked, VALIDATION_POINTS);
        }
    }

    #[test]
    fn bk1_front_samples_are_nondominated() {
        let r = validate_entry(&lookup("BK1").unwrap()).unwrap();
        assert_eq!(r.front_samples, 25);
    }

    #[test]
    fn wrong_gradient_sign_is_caught() {
        let mut e = lookup("BK1").unwrap();
        e.problem = Problem::builder("BK1-broken", vec![-5.0; 2], vec![10.0; 2])
            .objective(|x| x[0] * x[0] + x[1] * x[1], |x| vec![-2.0 * x[0], -2.0 * x[1]])
            .smooth_objective(e.problem.objectives()[1].clone())
            .build()
            .unwrap();
        match validate_entry(&e) {
            Err(Error::CatalogValidation { problem, .. }) => assert_eq!(problem, "BK1-broken"),
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn forward_difference_fallback_agrees() {
        for e in catalog() {
            let p = &e.problem;
            let x = p.midpoint();
            let x: Vec<f64> = x.iter().zip(p.lower()).map(|(m, l)| m + 0.137 * (m - l)).collect();
            for f in p.objectives() {
                let fd = SmoothFn::without_gradient({
                    let f = f.clone();
                    move |x: &[f64]| f.value(x)
                });
                for (a, b) in f.gradient(&x).iter().zip(fd.gradient(&x)) {
                    assert!((a - b).abs() <= 1e-3 * a.abs().max(b.abs()).max(1.0), "{}: {a} vs {b}", p.name());
                }
            }
        }
    }
}
