#[path = "support/vertex_oracle.rs"]
mod vertex_oracle;

use har_core::lp::{solve_lp, LpProblem, LpStatus, SolveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vertex_oracle::vertex_minimum;

const UPPER: f64 = 10.0;

struct Case {
    c: Vec<f64>,
    eq: Vec<(Vec<f64>, f64)>,
    le: Vec<(Vec<f64>, f64)>,
}

fn random_case(rng: &mut ChaCha8Rng) -> Case {
    let n = rng.random_range(2..=5);
    let m = rng.random_range(1..=8);
    let n_eq = rng.random_range(0..=n.min(2));
    // Anchor point guarantees feasibility.
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..UPPER)).collect();
    let row = |rng: &mut ChaCha8Rng| -> (Vec<f64>, f64) {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let ax: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
        (a, ax)
    };
    let eq = (0..n_eq).map(|_| row(rng)).collect();
    let le = (0..m)
        .map(|_| {
            let (a, ax) = row(rng);
            (a, ax + rng.random_range(0.0..3.0))
        })
        .collect();
    let c = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    Case { c, eq, le }
}

fn to_problem(case: &Case, flip_ge: bool) -> LpProblem {
    let n = case.c.len();
    let mut lp = LpProblem::new(case.c.clone());
    for j in 0..n {
        lp.set_bounds(j, 0.0, UPPER).unwrap();
    }
    for (a, b) in &case.eq {
        lp.add_eq(a.clone(), *b).unwrap();
    }
    for (a, b) in &case.le {
        if flip_ge {
            lp.add_ge(a.iter().map(|v| -v).collect(), -b).unwrap();
        } else {
            lp.add_le(a.clone(), *b).unwrap();
        }
    }
    lp
}

#[test]
fn matches_vertex_enumeration_on_random_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..50 {
        let case = random_case(&mut rng);
        let (want, _) = vertex_minimum(&case.c, &case.eq, &case.le, UPPER).expect("feasible by construction");
        for flip in [false, true] {
            let lp = to_problem(&case, flip);
            let sol = solve_lp(&lp, &SolveOptions::default()).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "case {k}");
            assert!((sol.objective_value - want).abs() <= 1e-6, "case {k}: {} vs {want}", sol.objective_value);
            assert!(lp.max_violation(&sol.x) <= 1e-7, "case {k}");
        }
    }
}

#[test]
fn duals_certify_optimality() {
    // Weak duality gap closes: b'y plus bound terms equals the primal optimum.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..30 {
        let case = random_case(&mut rng);
        let lp = to_problem(&case, false);
        let sol = solve_lp(&lp, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.duals_ineq.iter().all(|&y| y <= 1e-9), "case {k}");
        // Reduced costs r = c - A'y; at optimum x_j = 0 needs r_j >= 0, x_j = U needs r_j <= 0.
        let n = case.c.len();
        let mut bound_term = 0.0;
        for j in 0..n {
            let mut r = case.c[j];
            for (i, (a, _)) in case.eq.iter().enumerate() {
                r -= a[j] * sol.duals_eq[i];
            }
            for (i, (a, _)) in case.le.iter().enumerate() {
                r -= a[j] * sol.duals_ineq[i];
            }
            if r < 0.0 {
                bound_term += r * UPPER;
            }
        }
        let dual_obj: f64 = case.eq.iter().zip(&sol.duals_eq).map(|((_, b), y)| b * y).sum::<f64>()
            + case.le.iter().zip(&sol.duals_ineq).map(|((_, b), y)| b * y).sum::<f64>()
            + bound_term;
        assert!((dual_obj - sol.objective_value).abs() <= 1e-6, "case {k}: {dual_obj} vs {}", sol.objective_value);
    }
}

#[test]
fn infeasible_system_is_reported() {
    let mut lp = LpProblem::new(vec![1.0, 1.0]);
    lp.add_le(vec![1.0, 1.0], 1.0).unwrap();
    lp.add_ge(vec![1.0, 1.0], 2.0).unwrap();
    let sol = solve_lp(&lp, &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
}
