mod common;

use common::{grid_qp_value, random_qp, reduced_objective};
use mosqp_core::qp::{certify_kkt, solve_qp, QpInstance, KKT_TOL};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..40 {
        let n = 1 + case % 2;
        let m = 1 + case % 3;
        let p = case % 4;
        let inst = random_qp(&mut rng, n, m, p);
        let sol = solve_qp(&inst).unwrap();
        let grid = grid_qp_value(&inst);
        assert!((grid - sol.objective()).abs() <= 1e-2, "case {case}: grid {grid} vs qp {}", sol.objective());
        assert!(sol.objective() <= grid + 1e-12, "case {case}: qp above grid minimum");
        assert!(sol.kkt_residual <= KKT_TOL);
    }
}

#[test]
fn reduced_objective_agrees_with_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let inst = random_qp(&mut rng, 3, 2, 3);
        let sol = solve_qp(&inst).unwrap();
        assert!((reduced_objective(&inst, &sol.d) - sol.objective()).abs() < 1e-10);
    }
}

#[test]
fn row_order_does_not_change_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let inst = random_qp(&mut rng, 3, 3, 4);
        let base = solve_qp(&inst).unwrap();
        let mut fo: Vec<usize> = (0..3).collect();
        let mut go: Vec<usize> = (0..4).collect();
        fo.shuffle(&mut rng);
        go.shuffle(&mut rng);
        let shuffled = QpInstance::new(
            fo.iter().map(|&j| inst.grad_f[j].clone()).collect(),
            go.iter().map(|&i| inst.grad_g[i].clone()).collect(),
            go.iter().map(|&i| inst.g_vals[i]).collect(),
        )
        .unwrap();
        let other = solve_qp(&shuffled).unwrap();
        for (a, b) in base.d.iter().zip(&other.d) {
            assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", base.d, other.d);
        }
        assert!((base.t - other.t).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn solution_bound_and_certificate(seed in any::<u64>(), n in 1usize..5, m in 1usize..4, p in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_qp(&mut rng, n, m, p);
        let sol = solve_qp(&inst).unwrap();
        // t + |d|^2/2 <= Phi, since (Phi, 0) is feasible
        prop_assert!(sol.t <= inst.phi - 0.5 * sol.d_norm().powi(2) + 1e-8);
        prop_assert!(certify_kkt(&inst, &sol, KKT_TOL).passed());
        let lam: f64 = sol.lambda.iter().sum::<f64>() + sol.mu.iter().sum::<f64>();
        prop_assert!((lam - 1.0).abs() < 1e-8);
        prop_assert!(sol.lambda.iter().chain(&sol.mu).all(|v| *v >= 0.0));
    }
}
