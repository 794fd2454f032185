use proptest::prelude::*;
use vacuumlab::gasdyn::{
    build_exact_wave, eval_cutoff_wave, eval_exact_wave, riemann_invariants, CutoffWave, GasModel,
    RightState,
};
use vacuumlab::limitlab::{
    cutoff_gap, energy_functional, fit_points, EnergyAccumulator, ExponentModel, Perturbation,
    Quantity,
};
use vacuumlab::nssolver::{step, ConstantState, FieldState, Grid, SolverConfig, SpatialOrder};
use vacuumlab::smoothwave::{
    burgers_initial, eval_approx_wave, eval_w, rate_exponents, ApproxWave, BurgersProfile,
};
use vacuumlab::Exec;

fn wave_params() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (
        1.1f64..5.0,
        0.5f64..4.0,
        -2.0f64..2.0,
        0.01f64..0.45,
        0.05f64..1.0,
    )
        .prop_map(|(g, rho, u, mu_frac, delta)| (g, rho, u, mu_frac * rho, delta))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn implicit_solve_residual(wm in -3.0f64..0.0, dw in 0.1f64..4.0, delta in 0.2f64..1.0,
                               x in -20.0f64..20.0, t in 0.0f64..20.0) {
        let p = BurgersProfile::new(wm, wm + dw, delta).unwrap();
        let e = eval_w(&p, x, t).unwrap();
        let res = (e.x0 + t * burgers_initial(&p, e.x0) - x).abs();
        prop_assert!(res <= 1e-12 * (1.0 + x.abs()));
        prop_assert!(e.w_x > 0.0);
        prop_assert!(e.w >= wm - 1e-12 && e.w <= wm + dw + 1e-12);
    }

    #[test]
    fn curvature_ratio_bound(dw in 0.1f64..4.0, delta in 0.05f64..1.0, s in 0.0f64..1.0, t in 0.0f64..10.0) {
        let p = BurgersProfile::new(-1.0, -1.0 + dw, delta).unwrap();
        let (a, b) = p.support(t);
        let e = eval_w(&p, a + (b - a) * s, t).unwrap();
        prop_assert!(e.w_xx.abs() / e.w_x <= 4.0 / delta);
    }

    #[test]
    fn approximate_wave_keeps_second_invariant((g, rho, u, mu, delta) in wave_params(),
                                               x in -5.0f64..5.0, t in 0.0f64..3.0) {
        let gas = GasModel::new(g).unwrap();
        let aw = ApproxWave::from_parts(gas, RightState::new(rho, u).unwrap(), mu, delta).unwrap();
        let s = eval_approx_wave(&aw, x, t).unwrap();
        let (_, s2) = riemann_invariants(&gas, s.rho, s.u).unwrap();
        prop_assert!((s2 - aw.sigma2()).abs() <= 1e-10 * (1.0 + aw.sigma2().abs()));
        prop_assert!(s.rho >= mu * (1.0 - 1e-12) && s.rho <= rho * (1.0 + 1e-12));
        prop_assert!(s.u_x >= 0.0);
    }

    #[test]
    fn exact_wave_is_monotone(g in 1.1f64..5.0, rho in 0.1f64..4.0, u in -2.0f64..2.0,
                              xi in -8.0f64..8.0, step in 1e-4f64..0.5) {
        let w = build_exact_wave(GasModel::new(g).unwrap(), RightState::new(rho, u).unwrap());
        let (a, b) = (eval_exact_wave(&w, xi), eval_exact_wave(&w, xi + step));
        prop_assert!(b.rho >= a.rho);
        prop_assert!(a.rho >= 0.0 && a.rho <= rho * (1.0 + 1e-12));
    }

    #[test]
    fn cutoff_is_closer_for_smaller_mu(g in 1.1f64..5.0, mu in 0.02f64..0.4) {
        let w = build_exact_wave(GasModel::new(g).unwrap(), RightState::new(1.0, 0.0).unwrap());
        let xi: Vec<f64> = (0..=2000).map(|k| -6.0 + 12.0 * k as f64 / 2000.0).collect();
        let big = cutoff_gap(&CutoffWave::new(w, mu).unwrap(), &xi);
        let small = cutoff_gap(&CutoffWave::new(w, 0.5 * mu).unwrap(), &xi);
        prop_assert!(small.rho <= big.rho && small.combined <= big.combined);
        let c = eval_cutoff_wave(&CutoffWave::new(w, mu).unwrap(), -100.0);
        prop_assert!((c.rho - mu).abs() < 1e-15);
    }

    #[test]
    fn energies_are_nonnegative(seed in prop::collection::vec(-1.0f64..1.0, 96), rb in 0.05f64..3.0,
                                g in 1.1f64..5.0, eps in 1e-4f64..0.1) {
        let n = seed.len() / 2;
        let p = Perturbation {
            dx: 0.05,
            t: 0.0,
            phi: seed[..n].to_vec(),
            psi: seed[n..].to_vec(),
            rho: seed[..n].iter().map(|v| rb + 0.01 * v).collect(),
            u: seed[n..].to_vec(),
            rho_bar: vec![rb; n],
            u_bar: vec![0.0; n],
            rho_bar_x: seed[..n].iter().map(|v| v.abs()).collect(),
            u_bar_x: seed[n..].iter().map(|v| v.abs()).collect(),
            u_bar_xx: seed[..n].to_vec(),
            gamma: g,
        };
        let e = energy_functional(&p, eps);
        prop_assert!(e.e_quadratic >= 0.0 && e.e_gradient >= 0.0 && e.dissipation_rate >= 0.0);
        let mut acc = EnergyAccumulator::default();
        acc.push(0.0, &e);
        acc.push(0.5, &e);
        let r = acc.report(eps, &rate_exponents(&GasModel::new(g).unwrap()));
        prop_assert!(r.energy_peak >= 0.0 && r.dissipation >= 0.0 && r.bound_ratio >= 0.0);
    }

    #[test]
    fn fit_is_scale_invariant(errs in prop::collection::vec(1e-3f64..10.0, 4), scale in 1e-3f64..1e3) {
        let eps = [4e-3, 2e-3, 1e-3, 5e-4];
        let model = ExponentModel::new(&GasModel::new(2.0).unwrap(), Quantity::Density);
        let a = fit_points(&eps, &errs, &model).unwrap();
        let scaled: Vec<f64> = errs.iter().map(|e| e * scale).collect();
        let b = fit_points(&eps, &scaled, &model).unwrap();
        prop_assert!((a.slope - b.slope).abs() <= 1e-9 * (1.0 + a.slope.abs()));
        prop_assert!((b.intercept - a.intercept - scale.ln()).abs() <= 1e-9 * (1.0 + a.intercept.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn step_does_not_depend_on_execution_policy(bumps in prop::collection::vec(-0.2f64..0.2, 400),
                                                order in 1u32..=2) {
        let gas = GasModel::new(1.4).unwrap();
        let grid = Grid::new(0.0, 1.0, 400).unwrap();
        let mut s = FieldState::uniform(grid, 1.0, 0.3, 0.0);
        for (i, b) in bumps.iter().enumerate() {
            s.rho[i] += b;
            s.m[i] += 0.5 * b;
        }
        let bc = ConstantState { gas, rho: 1.0, u: 0.3 };
        let mut cfg = SolverConfig::new(1e-3, 0.45, SpatialOrder::try_from(order).unwrap(), 1.0).unwrap();
        cfg.exec = Exec::Sequential;
        let a = step(&s, &cfg, &bc).unwrap();
        cfg.exec = Exec::Parallel;
        let b = step(&s, &cfg, &bc).unwrap();
        prop_assert_eq!(a.0.rho, b.0.rho);
        prop_assert_eq!(a.0.m, b.0.m);
        prop_assert_eq!(a.1, b.1);
    }
}
