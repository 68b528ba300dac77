mod common;

use common::audit;
use mosqp_core::catalog;
use mosqp_core::front::uniform_box_point;
use mosqp_core::problem::FEASIBILITY_TOL;
use mosqp_core::solver::{solve, SolverConfig, Status};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SLOPE_SLACK: f64 = 1e-12;

fn problem_names() -> Vec<String> {
    catalog::names()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accepted_steps_replay_cleanly(idx in 0usize..13, seed in any::<u64>()) {
        let names = problem_names();
        let p = catalog::lookup(&names[idx % names.len()]).unwrap().problem;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = uniform_box_point(&p, &mut rng);
        let cfg = SolverConfig::default();
        let out = solve(&p, &x0, &cfg).unwrap();
        let a = audit(&p, cfg.beta, &out);
        prop_assert!(a.clean(), "{}: {:?}", p.name(), a);

        for rec in &out.trace {
            let half_dd = 0.5 * rec.d_norm * rec.d_norm;
            if rec.phi > 0.0 {
                for th in &rec.thetas {
                    prop_assert!(*th <= -half_dd + SLOPE_SLACK * (1.0 + th.abs()), "theta {th} > {}", -half_dd);
                }
            } else {
                prop_assert!(rec.t < 0.0);
                for s in &rec.slopes {
                    prop_assert!(*s <= rec.t + SLOPE_SLACK * (1.0 + s.abs()));
                }
            }
        }

        if out.status == Status::StronglyCritical {
            prop_assert!(out.final_d_norm < cfg.epsilon);
            prop_assert!(out.final_phi <= FEASIBILITY_TOL);
            prop_assert!(out.lambda.iter().any(|l| *l > 1e-8));
        }
    }

    #[test]
    fn solves_are_deterministic(idx in 0usize..13, seed in any::<u64>()) {
        let names = problem_names();
        let p = catalog::lookup(&names[idx % names.len()]).unwrap().problem;
        let x0 = uniform_box_point(&p, &mut ChaCha8Rng::seed_from_u64(seed));
        let cfg = SolverConfig::default();
        let a = solve(&p, &x0, &cfg).unwrap();
        let b = solve(&p, &x0, &cfg).unwrap();
        prop_assert_eq!(a.trace, b.trace);
        prop_assert_eq!(a.final_x, b.final_x);
        prop_assert_eq!(a.status, b.status);
    }
}

#[test]
fn feasible_iterates_decrease_every_merit() {
    let p = catalog::lookup("BNH").unwrap().problem;
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let x0 = uniform_box_point(&p, &mut rng);
        let out = solve(&p, &x0, &cfg).unwrap();
        for rec in out.trace.iter().filter(|r| r.phi == 0.0 && r.sigma == r.sigma_prev) {
            for (f0, f1) in rec.f.iter().zip(&rec.f_next) {
                assert!(f1 + rec.sigma * rec.phi_next < *f0);
            }
        }
    }
}
