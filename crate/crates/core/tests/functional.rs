mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use ymh_core::functional::{el_residual, energy, jacobian_form, jacobian_mismatch, residual_norm};
use ymh_core::lattice::{make_grid, pairs};
use ymh_core::vortex::{synthesize_planar, VortexProfile};
use ymh_core::lattice::{FormField, ScalarField};
use ymh_core::PairState;

/// Energy from per-link transports and plaquette holonomies, without the site averaging.
fn naive_energy(pair: &PairState) -> f64 {
    let g = pair.grid();
    let n = g.n();
    let h = g.spacing();
    let u = pair.u.values();
    let a = pair.alpha.values();
    let ph = pair.background().link_phase();
    let transport = |s: usize, j: usize| ph[s * n + j] * Complex64::from_polar(1.0, -h[j] * a[s * n + j]);
    let mut grad = 0.0;
    let mut curv = 0.0;
    let mut pot = 0.0;
    for s in 0..g.num_sites() {
        for j in 0..n {
            grad += ((transport(s, j) * u[g.fwd(s, j)] - u[s]) / h[j]).norm_sqr();
        }
        for &(j, k) in pairs(n) {
            let hol = transport(s, j) * transport(g.fwd(s, j), k)
                * transport(g.fwd(s, k), j).conj()
                * transport(s, k).conj();
            let w = -hol.arg() / (h[j] * h[k]);
            curv += w * w;
        }
        let m = 1.0 - u[s].norm_sqr();
        pot += m * m / (4.0 * pair.eps * pair.eps);
    }
    g.cell_volume() * (grad + pair.eps * pair.eps * curv + pot)
}

#[test]
fn energy_matches_the_naive_sum() {
    let mut r = rng(10);
    for (_, bg) in [grid2(12, 1), grid3(6, [0, 1, -1])] {
        for _ in 0..3 {
            let eps = r.gen_range(0.2..0.8);
            let pair = random_pair(&mut r, &bg, eps);
            let rep = energy(&pair);
            let naive = naive_energy(&pair);
            assert!(rel_close(rep.total, naive, 1e-10), "{} vs {naive}", rep.total);
            let parts = rep.gradient_part + rep.curvature_part + rep.potential_part;
            assert!(rel_close(rep.total, parts, 1e-12));
            let dens: f64 = rep.density.values().iter().sum::<f64>() * pair.grid().cell_volume();
            assert!(rel_close(rep.total, dens, 1e-10));
        }
    }
}

#[test]
fn residual_is_half_the_energy_gradient() {
    let mut r = rng(11);
    for (g, bg) in [grid2(10, 1), grid3(5, [1, 0, 0])] {
        let pair = random_pair(&mut r, &bg, 0.5);
        let du: Vec<Complex64> = (0..g.num_sites())
            .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
            .collect();
        let da = random_form(&mut r, &g, 1);
        let shifted = |t: f64| {
            let u = ScalarField::from_fn(&g, |s| pair.u.values()[s] + t * du[s]);
            let a = pair.alpha.add_scaled(t, &da).unwrap();
            energy(&PairState::new(u, a, bg.clone(), pair.eps).unwrap()).total
        };
        let t = 1e-5;
        let fd = (shifted(t) - shifted(-t)) / (2.0 * t);
        let (eu, ea) = el_residual(&pair);
        let v = g.cell_volume();
        let lin: f64 = eu.values().iter().zip(&du).map(|(e, d)| (e.conj() * d).re).sum::<f64>()
            + ea.dot(&da).unwrap() / v;
        assert!(rel_close(fd, 2.0 * v * lin, 1e-6), "{fd} vs {}", 2.0 * v * lin);
    }
}

#[test]
fn vacuum_is_critical_and_costs_only_background_curvature() {
    let (g, bg) = grid2(16, 0);
    let vac = PairState::vacuum(&bg, 0.1).unwrap();
    assert_eq!(energy(&vac).total, 0.0);
    assert_eq!(residual_norm(&vac, &el_residual(&vac)), 0.0);

    let (g1, bg1) = grid2(16, 2);
    let vac = PairState::vacuum(&bg1, 0.1).unwrap();
    let w = 2.0 * std::f64::consts::PI * 2.0;
    assert!(rel_close(energy(&vac).curvature_part, 0.01 * w * w, 1e-12));
    assert!(energy(&vac).potential_part == 0.0);
    assert!(g != g1);
}

#[test]
fn jacobian_of_the_trivial_vacuum_vanishes() {
    let (_, bg) = grid3(6, [0, 0, 0]);
    let vac = PairState::vacuum(&bg, 0.2).unwrap();
    assert_eq!(jacobian_form(&vac).max_abs(), 0.0);
}

#[test]
fn jacobian_identity_is_exact_for_flat_connections() {
    let mut r = rng(12);
    for (g, bg) in [grid2(12, 0), grid3(6, [0, 0, 0])] {
        let mut pair = random_pair(&mut r, &bg, 0.3);
        pair.alpha = FormField::zeros(&g, 1);
        let m = jacobian_mismatch(&pair);
        assert!(m.max_abs < 1e-9 * jacobian_form(&pair).max_abs().max(1.0), "{m:?}");
    }
}

#[test]
fn jacobian_identity_defect_is_second_order_in_a_flux_sector() {
    let p = VortexProfile::solve(1, 30.0, 1e-10).unwrap();
    let errs: Vec<f64> = [64, 128]
        .iter()
        .map(|&n| {
            let (_, bg) = make_grid(2, &[n, n], &[4.0, 4.0], &[1]).unwrap();
            let pair = synthesize_planar(&p, 0.3, &bg, [2.01, 2.02]).unwrap();
            jacobian_mismatch(&pair).max_abs
        })
        .collect();
    let ratio = errs[0] / errs[1];
    assert!((3.5..4.5).contains(&ratio), "{errs:?}");
}
