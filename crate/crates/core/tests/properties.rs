use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vpair::diagnostics::{default_probes, equilibrium_residual};
use vpair::functional::reflect_state;
use vpair::problem::{series_to_vec, vec_to_series};
use vpair::*;

fn cfg(mode: Mode) -> PairConfig {
    PairConfig::new(mode, [1.0, 2.0], [1.0, 1.5], 6.0).with_discretization(8, 32)
}

fn random_tangent(rng: &mut ChaCha8Rng, modes: usize) -> TangentVector {
    let u: Vec<f64> = (0..2 * modes + 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TangentVector::from_slice(&u, modes).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, cfg: &PairConfig, size: f64) -> StateVector {
    let mut g = base_state(cfg);
    for f in g.maps.iter_mut() {
        for (n, a) in f.coeffs_mut().iter_mut().enumerate() {
            *a = size * rng.gen_range(-1.0..1.0) / ((n + 1) * (n + 1)) as f64;
        }
    }
    g.scalars[0] += 0.01 * rng.gen_range(-1.0..1.0);
    g.scalars[1] += 0.01 * rng.gen_range(-1.0..1.0);
    g
}

#[test]
fn inverse_undoes_the_linearization() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for mode in [Mode::CoRotating, Mode::CounterRotating] {
        let cfg = cfg(mode);
        for _ in 0..100 {
            let h = random_tangent(&mut rng, cfg.modes);
            let back = linearized_solve(&cfg, &linearized_apply(&cfg, &h).unwrap()).unwrap();
            let err = h.to_vec().iter().zip(back.to_vec()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "{mode:?}: {err:e}");
        }
    }
}

#[test]
fn finite_difference_jacobian_matches_linearization() {
    for mode in [Mode::CoRotating, Mode::CounterRotating] {
        let cfg = cfg(mode);
        let jac = jacobian_fd(&cfg, 0.0, &base_state(&cfg)).unwrap();
        let dim = cfg.dimension();
        for c in 0..dim {
            let mut e = vec![0.0; dim];
            e[c] = 1.0;
            let want = series_to_vec(&linearized_apply(&cfg, &TangentVector::from_slice(&e, cfg.modes).unwrap()).unwrap());
            for r in 0..dim {
                assert!((jac[(r, c)] - want[r]).abs() <= 1e-6, "{mode:?} ({r},{c})");
            }
        }
        // a map of one patch does not reach the other patch's equations at eps = 0
        let n = cfg.modes;
        for c in 2..2 + n {
            for r in n + 1..dim {
                assert!(jac[(r, c)].abs() <= 1e-6);
                assert!(jac[(r - (n + 1), c + n)].abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn residual_at_zero_eps_is_the_linearization_of_the_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for mode in [Mode::CoRotating, Mode::CounterRotating] {
        let cfg = cfg(mode);
        let f = Functional::new(cfg.clone()).unwrap();
        for _ in 0..10 {
            let mut g = random_state(&mut rng, &cfg, 0.3);
            g.scalars = base_state(&cfg).scalars;
            let h = TangentVector {
                alphas: [0.0; 2],
                maps: g.maps.clone(),
            };
            let got = series_to_vec(&f.residual(0.0, &g).unwrap());
            let want = series_to_vec(&linearized_apply(&cfg, &h).unwrap());
            let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-13, "{mode:?}: {err:e}");
        }
    }
}

#[test]
fn reflection_symmetry_of_the_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for mode in [Mode::CoRotating, Mode::CounterRotating] {
        let cfg = cfg(mode);
        let f = Functional::new(cfg.clone()).unwrap();
        let half = cfg.grid / 2;
        for _ in 0..10 {
            let g = random_state(&mut rng, &cfg, 0.2);
            let eps = rng.gen_range(0.05..0.4);
            let plus = f.residual_pointwise(eps, &g).unwrap();
            let minus = f.residual_pointwise(-eps, &reflect_state(&g)).unwrap();
            for j in 0..2 {
                for k in 0..cfg.grid {
                    let defect = plus[j][(k + half) % cfg.grid] + minus[j][k];
                    assert!(defect.abs() <= 1e-12, "{mode:?} {defect:e}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn sine_projection_round_trip(coeffs in prop::collection::vec(-1.0f64..1.0, 1..12)) {
        let grid = CircleGrid::new(32, GridOffset::Aligned).unwrap();
        let series = SineSeries::new(coeffs.clone());
        let values: Vec<f64> = (0..32).map(|k| series.eval_theta(grid.theta(k))).collect();
        let back = grid.project_sine(&values, coeffs.len()).unwrap();
        for (a, b) in back.coeffs().iter().zip(&coeffs) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn state_flattening_round_trip(u in prop::collection::vec(-1.0f64..1.0, 10)) {
        let g = StateVector::from_slice(&u, 4).unwrap();
        prop_assert_eq!(g.to_vec(), u.clone());
        prop_assert_eq!(series_to_vec(&vec_to_series(&u)), u);
    }
}

#[test]
fn grid_refinement_leaves_the_residual_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mode in [Mode::CoRotating, Mode::CounterRotating] {
        let coarse = cfg(mode).with_discretization(8, 64);
        let fine = coarse.clone().with_discretization(8, 128);
        let g = random_state(&mut rng, &coarse, 0.2);
        let a = Functional::new(coarse).unwrap().residual_vec(0.3, &g).unwrap();
        let b = Functional::new(fine).unwrap().residual_vec(0.3, &g).unwrap();
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "{mode:?}: {err:e}");
    }
}

#[test]
fn newton_converges_quadratically() {
    for mode in [Mode::CoRotating, Mode::CounterRotating] {
        let mut cfg = cfg(mode).with_discretization(16, 64);
        cfg.tol = 1e-14;
        let v = newton_solve(&cfg, 0.4, &base_state(&cfg)).unwrap();
        let h = &v.residual_history;
        assert!(h.len() >= 3, "{h:?}");
        // e_{k+1} <= C e_k^2, up to the finite-difference floor
        for w in h.windows(2) {
            assert!(w[1] <= 10.0 * w[0] * w[0] + 1e-13, "{mode:?} {h:?}");
        }
    }
}

#[test]
fn solved_maps_never_vanish() {
    for mode in [Mode::CoRotating, Mode::CounterRotating] {
        let cfg = cfg(mode).with_discretization(12, 48);
        let branch = continue_branch(&cfg, &[0.05, 0.1, 0.2]).unwrap();
        for s in &branch.states {
            for f in &s.state.maps {
                assert!(f.abs_sum() > 0.0);
            }
        }
    }
}

#[test]
fn circles_are_equilibria_only_to_first_order() {
    for mode in [Mode::CoRotating, Mode::CounterRotating] {
        let cfg = cfg(mode);
        let at = |eps: f64| {
            let v = VState {
                eps,
                state: base_state(&cfg),
                residual_norm: 0.0,
                newton_iters: 0,
                truncation_indicator: 0.0,
                residual_history: vec![],
            };
            equilibrium_residual(&v, &cfg, 256, &default_probes(32)).unwrap()
        };
        let (r1, r2) = (at(1e-3), at(2e-3));
        assert!(r1 < 1e-3, "{r1:e}");
        assert!((r2 / r1 - 2.0).abs() < 1e-2, "{mode:?} {}", r2 / r1);
    }
}

#[test]
fn forcing_below_tolerance_is_reported() {
    let mut cfg = cfg(Mode::CoRotating);
    cfg.max_iter = 1;
    cfg.tol = 1e-300;
    assert!(matches!(
        newton_solve(&cfg, 0.3, &base_state(&cfg)),
        Err(Error::NoConvergence { iterations: 1, .. })
    ));
}

#[test]
fn failed_first_target_is_an_empty_branch() {
    let mut cfg = cfg(Mode::CoRotating);
    cfg.max_iter = 0;
    cfg.tol = 1e-300;
    assert!(matches!(continue_branch(&cfg, &[0.2, 0.3]), Err(Error::EmptyBranch { .. })));
}
