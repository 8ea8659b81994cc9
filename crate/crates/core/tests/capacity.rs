mod common;

use proptest::prelude::*;
use qhopfield::capacity::stationarity_residual;
use qhopfield::limits::classical_zero_t;
use qhopfield::{
    compute_capacity, maximize_y, saddle_residuals, solve_saddle_with, sweep, y_value, GaussianGrid, ModelParams,
    Reason, SaddleState, SolverConfig,
};

fn grid(order: usize) -> GaussianGrid {
    GaussianGrid::new(order).unwrap()
}

fn at(t: f64, omega: f64, m: f64) -> ModelParams {
    ModelParams::from_temperature(t, omega, m).unwrap()
}

#[test]
fn brute_force_oracle_without_drive() {
    let p = at(0.5, 0.0, 0.95);
    let ours = solve_saddle_with(&p, &grid(201), &SolverConfig::default()).unwrap();
    let oracle = common::BruteForce::new(0.95, 2.0, 0.0).solve().unwrap();
    let alpha = 1.0 / ours.averages.gap_sq_mean;
    assert!((alpha - oracle.alpha).abs() / oracle.alpha < 2e-4, "{alpha} vs {}", oracle.alpha);
    assert!((ours.state.lambda1 - oracle.lambda1).abs() / oracle.lambda1 < 2e-4);
}

#[test]
fn brute_force_oracle_with_drive() {
    let p = at(0.5, 0.03, 0.95);
    let ours = solve_saddle_with(&p, &grid(201), &SolverConfig::default()).unwrap();
    let mut brute = common::BruteForce::new(0.95, 2.0, 0.03);
    brute.t_step = 0.02;
    let oracle = brute.solve().unwrap();
    let alpha = 1.0 / ours.averages.gap_sq_mean;
    assert!((alpha - oracle.alpha).abs() / oracle.alpha < 5e-4, "{alpha} vs {}", oracle.alpha);
    assert!((ours.state.m_y - oracle.m_y).abs() < 1e-4, "{} vs {}", ours.state.m_y, oracle.m_y);
}

#[test]
fn low_temperature_approaches_gardner() {
    let g = grid(201);
    let mut prev_gap = f64::INFINITY;
    for t in [0.05, 0.01, 0.002] {
        let a = compute_capacity(&at(t, 0.0, 0.95), &g).unwrap().alpha_c;
        let gap = (a - classical_zero_t(0.95).unwrap()).abs();
        assert!(gap < prev_gap, "T = {t}: {a}");
        prev_gap = gap;
    }
}

#[test]
fn zero_temperature_without_drive_is_gardner() {
    for m in [0.6, 0.9, 0.95] {
        let r = compute_capacity(&ModelParams::new(f64::INFINITY, 0.0, m).unwrap(), &grid(201)).unwrap();
        let exact = common::gardner_reference(m);
        assert!((r.alpha_c - exact).abs() / exact < 1e-6, "m = {m}: {} vs {exact}", r.alpha_c);
    }
}

#[test]
fn capacity_is_monotone_on_a_small_grid() {
    let temps = [0.2, 0.4, 0.8, 1.6];
    let omegas = [0.0, 0.02, 0.04, 0.06];
    let g = grid(101);
    let pts: Vec<_> = temps.iter().flat_map(|&t| omegas.iter().map(move |&o| at(t, o, 0.9))).collect();
    let res: Vec<f64> = sweep(&pts, &g, &SolverConfig::default())
        .into_iter()
        .map(|r| r.unwrap().alpha_c)
        .collect();
    for i in 0..temps.len() {
        for j in 0..omegas.len() {
            let a = res[i * omegas.len() + j];
            if j + 1 < omegas.len() {
                assert!(res[i * omegas.len() + j + 1] <= a);
            }
            if i + 1 < temps.len() {
                assert!(res[(i + 1) * omegas.len() + j] <= a);
            }
        }
    }
}

#[test]
fn grid_refinement_is_converged_at_interior_points() {
    for (t, o) in [(0.3, 0.0), (0.5, 0.04), (1.0, 0.06)] {
        let a = compute_capacity(&at(t, o, 0.95), &grid(201)).unwrap().alpha_c;
        let b = compute_capacity(&at(t, o, 0.95), &grid(401)).unwrap().alpha_c;
        assert!((a - b).abs() / a < 1e-3, "T={t}, Ω={o}: {a} vs {b}");
    }
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let pts: Vec<_> = [0.3, 0.9].iter().flat_map(|&t| [0.0, 0.05, 0.1].map(|o| at(t, o, 0.95))).collect();
    let g = grid(81);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sweep(&pts, &g, &SolverConfig::default()))
            .into_iter()
            .map(|r| {
                let r = r.unwrap();
                (r.alpha_c.to_bits(), r.stability_value.to_bits(), r.iterations, r.reason)
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn zero_capacity_reasons() {
    let g = grid(101);
    let high_t = compute_capacity(&at(10.0, 0.2, 0.95), &g).unwrap();
    assert_eq!(high_t.reason, Reason::AboveOmegaC);
    assert_eq!(high_t.alpha_c, 0.0);
    assert!(!high_t.converged);
    assert!(high_t.stability_value.is_nan());
    let low_t = compute_capacity(&at(0.5, 0.2, 0.95), &g).unwrap();
    assert_eq!(low_t.reason, Reason::NoSaddle);
    let beta_zero = compute_capacity(&ModelParams::new(0.0, 0.0, 0.95).unwrap(), &g).unwrap();
    assert_eq!(beta_zero.alpha_c, 0.0);
}

#[test]
fn stability_functional_is_positive_on_retrieval_states() {
    let g = grid(101);
    for (t, o) in [(0.1, 0.0), (0.5, 0.05), (2.0, 0.07)] {
        let r = compute_capacity(&at(t, o, 0.95), &g).unwrap();
        assert_eq!(r.reason, Reason::Ok);
        assert!(r.stability_value > 0.0);
    }
}

#[test]
fn maximize_y_beats_every_sampled_point() {
    let saddle = SaddleState::from_multipliers(0.9, -0.1, 3.0);
    let p = at(0.3, 0.05, 0.9);
    for t in [-2.0, -0.4, 0.0, 0.7, 3.0] {
        let h = maximize_y(t, &saddle, &p, &SolverConfig::default()).unwrap();
        let best = y_value(h, t, &saddle, &p);
        for k in 0..4000 {
            let x = -t - 20.0 + 40.0 * k as f64 / 3999.0;
            assert!(y_value(x, t, &saddle, &p) <= best + 1e-12);
        }
    }
}

fn check_saddle(p: &ModelParams, order: usize) {
    let g = grid(order);
    let Ok(sol) = solve_saddle_with(p, &g, &SolverConfig::default()) else {
        return;
    };
    let s = &sol.state;
    assert!((s.lambda2 + s.lambda1 * s.m_y / s.m_z).abs() <= 1e-12 * s.lambda1.abs().max(1.0));
    assert_eq!(s.h_profile.len(), g.order());
    assert!(s.h_profile.iter().all(|h| h.is_finite()));
    assert_eq!(s.lambda_theta, 0.0);
    let (r1, r2) = saddle_residuals(s, p, &g).unwrap();
    assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8, "{r1} {r2}");
    if !p.is_zero_temperature() {
        for (&t, &h) in g.nodes().iter().zip(&s.h_profile) {
            assert!(stationarity_residual(h, t, s, p).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn converged_saddles_satisfy_their_invariants(
        m in 0.6f64..0.98,
        t in 0.05f64..3.0,
        omega in 0.0f64..0.12,
    ) {
        check_saddle(&at(t, omega, m), 61);
    }

    #[test]
    fn capacity_decreases_with_drive(t in 0.1f64..2.0, o1 in 0.0f64..0.07, d in 0.001f64..0.03) {
        let g = grid(61);
        let a = compute_capacity(&at(t, o1, 0.95), &g).unwrap();
        let b = compute_capacity(&at(t, o1 + d, 0.95), &g).unwrap();
        prop_assert!(b.alpha_c <= a.alpha_c);
    }
}

/// Without linearizing `tanh`, the small-β saddle has `h ≈ atanh(m(1+8Ω²))/(βm)`
/// for every `t`, so `α_c → (βm / atanh(m(1+8Ω²)))²`.
#[test]
fn high_temperature_limit_keeps_the_saturated_tanh() {
    let g = grid(101);
    for m in [0.3, 0.95] {
        for omega in [0.0, 0.03] {
            let beta = 0.01;
            let a = compute_capacity(&ModelParams::new(beta, omega, m).unwrap(), &g).unwrap().alpha_c;
            let target = m * (1.0 + 8.0 * omega * omega);
            let expected = (beta * m / target.atanh()).powi(2);
            assert!((a - expected).abs() / expected < 1e-2, "m={m}, Ω={omega}: {a} vs {expected}");
        }
    }
}
