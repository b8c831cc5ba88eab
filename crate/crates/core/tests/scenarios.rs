//! Simulation-backed checks that are too slow or too coupled for unit tests.

use nwh_core::harnack::evolution_residuals;
use nwh_core::scalar::ls_slope;
use nwh_core::waves::ShootOutcome;
use nwh_core::{
    certify, check_gradient_bound, check_speed_bound, evolve, harnack_field, harnack_field_fform, measure_front_speed,
    shoot_profile, Grid, HarnackParams, InitialCondition, PdeParams, SolverConfig, TimeGauge, Trajectory,
};

fn unit_pde() -> PdeParams<f64> {
    PdeParams::new(1.0, 1.0, 1).unwrap()
}

fn order(h: &[f64], err: &[f64]) -> f64 {
    let lh: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let le: Vec<f64> = err.iter().map(|x| x.ln()).collect();
    ls_slope(&lh, &le)
}

fn smooth_run(points: usize) -> (Trajectory<f64>, usize) {
    let grid = Grid::new(1, points, 2.0 * std::f64::consts::PI).unwrap();
    let per_half = 64 * (points / 32).pow(2);
    let interval = 0.5 / per_half as f64;
    let ic = InitialCondition::SinePerturbed { amplitude: 0.5, mode: 1 };
    let cfg = SolverConfig::new(unit_pde(), grid, ic, 0.5 + interval).with_snapshot_interval(interval);
    (evolve(&cfg).unwrap(), per_half)
}

#[test]
fn evolution_identities_converge_at_second_order() {
    let runs: Vec<_> = [32, 64, 128].iter().map(|&n| smooth_run(n)).collect();
    let h: Vec<f64> = runs.iter().map(|(t, _)| t.config.grid.spacing()).collect();
    let res: Vec<_> = runs.iter().map(|(t, k)| evolution_residuals(t, *k).unwrap()).collect();
    let orders = [
        order(&h, &res.iter().map(|r| r.laplacian_log.residual.max_abs()).collect::<Vec<_>>()),
        order(&h, &res.iter().map(|r| r.gradient_sq.residual.max_abs()).collect::<Vec<_>>()),
        order(&h, &res.iter().map(|r| r.exp_two_log.residual.max_abs()).collect::<Vec<_>>()),
    ];
    for p in orders {
        assert!(p >= 1.8, "orders {orders:?}");
    }
}

#[test]
fn evolution_residuals_are_small_on_the_acceptance_grid() {
    let grid = Grid::new(1, 256, 20.0).unwrap();
    let ic = InitialCondition::SinePerturbed { amplitude: 0.1, mode: 1 };
    let traj = evolve(&SolverConfig::new(unit_pde(), grid, ic, 2.0).with_snapshot_interval(0.05)).unwrap();
    for k in [2, 10, 30] {
        let r = evolution_residuals(&traj, k).unwrap();
        for id in [&r.laplacian_log, &r.gradient_sq, &r.exp_two_log] {
            assert!(id.relative() <= 0.05, "snapshot {k}: relative residual {}", id.relative());
        }
    }
}

#[test]
fn l_and_f_forms_agree_to_second_order_on_solutions() {
    let g = TimeGauge::new(HarnackParams::validate(1.0, 0.3, -1.5, unit_pde()).unwrap());
    let gap = |n: usize| {
        let (traj, k) = smooth_run(n);
        let f = &traj.snapshots[k];
        let a = harnack_field(f, &g).unwrap();
        let b = harnack_field_fform(f, &g).unwrap();
        a.values.zip_map(&b.values, |x, y| x - y).max_abs()
    };
    let (e1, e2) = (gap(32), gap(64));
    let p = (e1 / e2).log2();
    assert!((1.8..2.2).contains(&p), "order {p}");
}

#[test]
fn two_dimensional_bump_certifies_on_both_branches() {
    let pde = PdeParams::new(1.0, 1.0, 2).unwrap();
    let grid = Grid::new(2, 64, 20.0).unwrap();
    let ic = InitialCondition::GaussianBump { center: 10.0, width: 2.0, floor: 0.2 };
    let traj = evolve(&SolverConfig::new(pde, grid, ic, 2.0).with_snapshot_interval(0.05)).unwrap();
    for params in [
        HarnackParams::classical_choice(1.0, pde).unwrap(),
        HarnackParams::simplified_choice(1.0, 0.5, pde).unwrap(),
        HarnackParams::validate(1.0, 0.9, -3.0, pde).unwrap(),
    ] {
        let rep = certify(&traj, &TimeGauge::new(params), 0.05, 5e-3).unwrap();
        assert!(rep.passed(), "{:?}: min H {}", params.branch(), rep.min_h());
    }
}

#[test]
fn exact_front_moves_with_velocity_minus_eta() {
    let grid = Grid::new(1, 1024, 80.0).unwrap();
    let cfg = SolverConfig::new(unit_pde(), grid, InitialCondition::ExactFront { center: 60.0 }, 6.0)
        .with_snapshot_interval(0.1);
    let track = measure_front_speed(&evolve(&cfg).unwrap(), 0.5).unwrap();
    let eta = 3.0 / 2f64.sqrt();
    assert!((track.speed + eta).abs() <= 0.01 * eta, "speed {}", track.speed);
}

#[test]
fn front_speed_error_falls_with_resolution() {
    let eta = 3.0 / 2f64.sqrt();
    let err = |n: usize| {
        let grid = Grid::new(1, n, 80.0).unwrap();
        let cfg = SolverConfig::new(unit_pde(), grid, InitialCondition::ExactFront { center: 60.0 }, 6.0)
            .with_snapshot_interval(0.1);
        let track = measure_front_speed(&evolve(&cfg).unwrap(), 0.5).unwrap();
        (track.speed.abs() - eta).abs()
    };
    let (e1, e2) = (err(128), err(256));
    let p = (e1 / e2).log2();
    assert!((1.7..2.3).contains(&p), "order {p} ({e1:e}, {e2:e})");
}

#[test]
fn step_data_spreads_at_least_at_the_linear_speed() {
    // Steep data selects the linear spreading speed 2 with a slow ~3/(2t)
    // deficit, so the run is long. Any positive background grows like e^t and
    // would reach the tracked level, hence the negligible low state.
    let grid = Grid::new(1, 4096, 500.0).unwrap();
    let ic = InitialCondition::Step { low: 1e-60, high: 1.0, position: 390.0 };
    let cfg = SolverConfig::new(unit_pde(), grid, ic, 80.0).with_snapshot_interval(0.5);
    let track = measure_front_speed(&evolve(&cfg).unwrap(), 0.5).unwrap();
    assert!(track.speed.abs() >= 2.0 * 0.98, "speed {}", track.speed);
    assert!(check_speed_bound(track.speed, &unit_pde(), 0.0).pass);
}

#[test]
fn shooting_profiles_satisfy_both_wave_bounds() {
    let pde = unit_pde();
    for eta in [2.2, 2.5, 1.5 * 3.0 / 2f64.sqrt()] {
        let ShootOutcome::Connected(profile) = shoot_profile(&pde, eta, 40.0, 1e-6).unwrap() else {
            panic!("eta = {eta} should connect");
        };
        assert!(check_speed_bound(eta, &pde, 1e-3).pass);
        let grad = check_gradient_bound(&profile, 1e-3);
        assert!(grad.pass && grad.max_ratio < 1.0, "eta = {eta}: ratio {}", grad.max_ratio);
        assert!(profile.v.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-6));
    }
}

#[test]
fn generic_solution_approaches_saturation() {
    // H along a relaxing solution tends to zero from above, like the equilibrium.
    let grid = Grid::new(1, 128, 20.0).unwrap();
    let ic = InitialCondition::SinePerturbed { amplitude: 0.3, mode: 2 };
    let traj = evolve(&SolverConfig::new(unit_pde(), grid, ic, 10.0).with_snapshot_interval(1.0)).unwrap();
    let g = TimeGauge::new(HarnackParams::classical_choice(1.0, unit_pde()).unwrap());
    let rep = certify(&traj, &g, 1.0, 1e-6).unwrap();
    assert!(rep.passed());
    let last = rep.records.last().unwrap();
    assert!(last.min_h < 1e-6, "min H at t = 10: {}", last.min_h);
}
