mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use ymh_core::functional::{energy, jacobian_form, slice_flux};
use ymh_core::lattice::{d, d_star, gauge_transform, make_grid, pairs, FormField, Gauge};
use ymh_core::Error;

#[test]
fn d_squared_vanishes() {
    let mut r = rng(1);
    for (g, _) in [grid2(8, 1), grid3(6, [1, 0, -2])] {
        for deg in 0..g.n() - 1 {
            let f = random_form(&mut r, &g, deg);
            let dd = d(&d(&f).unwrap()).unwrap();
            assert!(dd.max_abs() < 1e-9, "degree {deg}: {}", dd.max_abs());
        }
    }
}

#[test]
fn d_star_is_the_adjoint_of_d() {
    let mut r = rng(2);
    for (g, _) in [grid2(8, 0), grid3(6, [0, 0, 0])] {
        for deg in 0..g.n() {
            let a = random_form(&mut r, &g, deg);
            let b = random_form(&mut r, &g, deg + 1);
            let lhs = d(&a).unwrap().dot(&b).unwrap();
            let rhs = a.dot(&d_star(&b).unwrap()).unwrap();
            assert!(rel_close(lhs, rhs, 1e-11), "degree {deg}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn top_degree_has_no_derivative() {
    let (g, _) = grid2(6, 0);
    assert!(matches!(d(&FormField::zeros(&g, 2)), Err(Error::Degree(_))));
    assert!(matches!(d_star(&FormField::zeros(&g, 0)), Err(Error::Degree(_))));
}

#[test]
fn laplacian_eigenmodes_have_the_lattice_symbol() {
    let (g, _) = make_grid(3, &[8, 10, 12], &[1.0, 2.0, 1.5], &[0, 0, 0]).unwrap();
    let q = [1.0, 2.0, 3.0];
    let f = FormField::from_fn(&g, 0, |s| {
        let x = g.position(s);
        (0..3).map(|a| 2.0 * PI * q[a] * x[a] / g.lengths()[a]).sum::<f64>().cos()
    });
    let lap = d_star(&d(&f).unwrap()).unwrap();
    let symbol: f64 = (0..3)
        .map(|a| {
            let h = g.spacing()[a];
            let s = (PI * q[a] * h / g.lengths()[a]).sin();
            4.0 * s * s / (h * h)
        })
        .sum();
    let err = lap.add_scaled(-symbol, &f).unwrap().max_abs();
    assert!(err < 1e-9 * symbol, "{err}");
}

#[test]
fn background_plaquettes_carry_the_curvature() {
    let (g, bg) = grid3(6, [1, -2, 3]);
    let np = g.num_pairs();
    for s in 0..g.num_sites() {
        for (p, &(j, k)) in pairs(3).iter().enumerate() {
            let h2 = g.spacing()[j] * g.spacing()[k];
            let want = Complex64::from_polar(1.0, -h2 * bg.curvature().values()[s * np + p]);
            assert!((bg.plaquette_phase(s, p) - want).norm() < 1e-12);
        }
    }
}

#[test]
fn slice_flux_of_the_jacobian_is_the_sector() {
    let mut r = rng(3);
    let (g, bg) = grid3(6, [1, -1, 2]);
    let pair = random_pair(&mut r, &bg, 0.3);
    let j = jacobian_form(&pair);
    for (p, &m) in g.flux().iter().enumerate() {
        for _ in 0..4 {
            let s = r.gen_range(0..g.num_sites());
            let f = slice_flux(&g, &j, p, s);
            assert!((f - m as f64).abs() < 1e-9, "plane {p}: {f} vs {m}");
        }
    }
}

#[test]
fn mismatched_flux_is_rejected() {
    assert!(matches!(make_grid(3, &[6, 6, 6], &[1.0; 3], &[1]), Err(Error::InvalidGrid(_))));
    assert!(matches!(make_grid(2, &[3, 6], &[1.0; 2], &[0]), Err(Error::InvalidGrid(_))));
    assert!(matches!(make_grid(2, &[6, 6], &[1.0, -1.0], &[0]), Err(Error::InvalidGrid(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn observables_are_gauge_invariant(seed in any::<u64>(), w0 in -2i64..=2, w1 in -2i64..=2, three in any::<bool>()) {
        let mut r = rng(seed);
        let (g, bg) = if three { grid3(5, [1, 0, -1]) } else { grid2(8, 2) };
        let pair = random_pair(&mut r, &bg, 0.4);
        let mut winding = vec![w0, w1];
        if three {
            winding.push(w0 - w1);
        }
        let gauge = Gauge { theta: random_form(&mut r, &g, 0).scaled(3.0), winding };
        let moved = gauge_transform(&pair, &gauge).unwrap();
        let (a, b) = (energy(&pair), energy(&moved));
        prop_assert!(rel_close(a.total, b.total, 1e-11));
        prop_assert!(a.density.add_scaled(-1.0, &b.density).unwrap().max_abs() < 1e-10 * a.max_density.max(1.0));
        let dj = jacobian_form(&pair).add_scaled(-1.0, &jacobian_form(&moved)).unwrap();
        prop_assert!(dj.max_abs() < 1e-9);
    }
}
