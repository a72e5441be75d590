mod common;

use common::*;
use num_complex::Complex64;
use ymh_core::flow::{
    density_ratio, heat_kernel, monotonicity_profile, run, step, zeta, FlowParams, GaugeMode, Scheme,
    StopReason,
};
use ymh_core::functional::{el_residual, energy};
use ymh_core::lattice::ScalarField;
use ymh_core::{Error, PairState};

#[test]
fn explicit_step_is_forward_euler() {
    let mut r = rng(30);
    for (g, bg) in [grid2(12, 1), grid3(6, [1, 0, 0])] {
        let pair = random_pair(&mut r, &bg, 0.5);
        let dt = FlowParams::explicit_guard(g.min_spacing(), pair.eps);
        let next = step(&pair, &FlowParams::new(dt, dt, Scheme::Explicit)).unwrap();
        let (eu, ea) = el_residual(&pair);
        let e2 = pair.eps * pair.eps;
        for s in 0..g.num_sites() {
            let want: Complex64 = pair.u.values()[s] - dt * eu.values()[s];
            assert!((next.u.values()[s] - want).norm() < 1e-13);
        }
        for l in 0..g.num_cells(1) {
            let want = pair.alpha.values()[l] - dt * ea.values()[l] / e2;
            assert!((next.alpha.values()[l] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn explicit_scheme_enforces_the_stability_guard() {
    let (g, bg) = grid2(16, 0);
    let pair = PairState::vacuum(&bg, 0.2).unwrap();
    let dt = 1.01 * FlowParams::explicit_guard(g.min_spacing(), 0.2);
    let err = run(&pair, &FlowParams::new(dt, 1.0, Scheme::Explicit)).unwrap_err();
    assert!(matches!(err, Error::Stability { .. }));
    assert!(run(&pair, &FlowParams::new(dt, 0.1, Scheme::Imex)).is_ok());
}

#[test]
fn vacuum_is_stationary() {
    let (_, bg) = grid3(6, [0, 0, 0]);
    let pair = PairState::vacuum(&bg, 0.3).unwrap();
    let traj = run(&pair, &FlowParams::new(0.01, 1.0, Scheme::Imex)).unwrap();
    assert_eq!(traj.stop, StopReason::Stationary);
    assert_eq!(traj.final_energy(), 0.0);
}

#[test]
fn energy_decreases_and_the_unit_disk_is_preserved() {
    let mut r = rng(31);
    let (g, bg) = grid2(16, 1);
    let pair = random_pair(&mut r, &bg, 0.3);
    let e0 = energy(&pair).total;
    let guard = FlowParams::explicit_guard(g.min_spacing(), 0.3);
    for params in [FlowParams::new(guard, 0.05, Scheme::Explicit), FlowParams::new(0.01, 0.5, Scheme::Imex)] {
        let traj = run(&pair, &params).unwrap();
        assert!(traj.max_energy_increase <= 1e-12 * e0, "{:?}: {}", params.scheme, traj.max_energy_increase);
        assert!(traj.final_energy() < e0);
        assert!(traj.max_raw_abs_u <= 1.0 + 1e-12, "{:?}: {}", params.scheme, traj.max_raw_abs_u);
    }
}

#[test]
fn dissipation_identity_error_is_first_order_in_dt() {
    let mut r = rng(32);
    let (g, bg) = grid2(12, 0);
    let pair = random_pair(&mut r, &bg, 0.4);
    let guard = FlowParams::explicit_guard(g.min_spacing(), 0.4);
    let res: Vec<f64> = [guard, guard / 2.0]
        .iter()
        .map(|&dt| {
            let mut p = FlowParams::new(dt, 0.02, Scheme::Explicit);
            p.stationarity_tol = Some(0.0);
            run(&pair, &p).unwrap().samples.last().unwrap().dissipation_residual.abs()
        })
        .collect();
    assert!(res[0] < 0.1, "{res:?}");
    let ratio = res[0] / res[1];
    assert!((1.7..2.3).contains(&ratio), "{res:?}");
}

#[test]
fn coulomb_and_direct_flows_agree_on_invariants() {
    let mut r = rng(33);
    let (g, bg) = grid2(12, 1);
    let pair = random_pair(&mut r, &bg, 0.3);
    let dt = FlowParams::explicit_guard(g.min_spacing(), 0.3);
    let mut direct = FlowParams::new(dt, 0.2, Scheme::Explicit);
    direct.stationarity_tol = Some(0.0);
    let mut coulomb = direct.clone();
    coulomb.gauge_mode = GaugeMode::Coulomb;
    let a = run(&pair, &direct).unwrap();
    let b = run(&pair, &coulomb).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!(rel_close(x.total, y.total, 1e-8), "t = {}: {} vs {}", x.t, x.total, y.total);
    }
}

#[test]
fn clamp_keeps_u_in_the_disk() {
    let (g, bg) = grid2(8, 0);
    let u = ScalarField::from_fn(&g, |s| Complex64::new(if s % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
    let pair = PairState::new(u, ymh_core::FormField::zeros(&g, 1), bg, 0.2).unwrap();
    let mut p = FlowParams::new(0.1, 1.0, Scheme::Imex);
    p.clamp_to_unit_disk = true;
    let traj = run(&pair, &p).unwrap();
    assert!(traj.samples.iter().all(|s| s.max_abs_u <= 1.0 + 1e-15));
}

#[test]
fn heat_kernel_is_a_probability_density() {
    let (g, _) = grid3(8, [0, 0, 0]);
    for t in [0.01, 0.3, 2.0] {
        let k = heat_kernel(&g, t, &[0.3, 0.2, 0.1]).unwrap();
        let mass: f64 = k.values().iter().sum::<f64>() * g.cell_volume();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(k.values().iter().all(|&x| x >= 0.0));
    }
    assert!(heat_kernel(&g, 0.0, &[0.0; 3]).is_err());
    assert_eq!(zeta(1.0, 2.5, 3, 1.0), 0.0);
}

#[test]
fn monotonicity_profile_of_the_vacuum_vanishes() {
    let (_, bg) = grid2(8, 0);
    let pair = PairState::vacuum(&bg, 0.3).unwrap();
    let mut p = FlowParams::new(0.05, 2.5, Scheme::Imex);
    p.stationarity_tol = Some(0.0);
    p.record_density = true;
    p.monitor_stride = 1;
    let traj = run(&pair, &p).unwrap();
    let prof = monotonicity_profile(&traj, 2.5, &[0.5, 0.5], 1.0).unwrap();
    assert!(prof.points.iter().all(|q| q.phi == 0.0));
    assert_eq!(prof.ratio, 0.0);
    assert!(monotonicity_profile(&traj, 3.5, &[0.5, 0.5], 1.0).is_err());
    assert_eq!(density_ratio(&pair, &[0.5, 0.5]).max, 0.0);
}
