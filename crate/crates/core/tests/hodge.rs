mod common;

use std::f64::consts::PI;

use common::*;
use ymh_core::functional::{energy, jacobian_form};
use ymh_core::hodge::{coulomb_project, hodge_decompose, normalize_gauge, p_project, poisson_solve, q_operator};
use ymh_core::lattice::{d, d_star, FormField};
use ymh_core::Error;

#[test]
fn poisson_solve_inverts_the_laplacian() {
    let mut r = rng(20);
    for (g, _) in [grid2(16, 0), grid3(6, [0, 0, 0])] {
        let f = random_form(&mut r, &g, 0);
        let mean = f.values().iter().sum::<f64>() / g.num_sites() as f64;
        let f = FormField::from_fn(&g, 0, |s| f.values()[s] - mean);
        let theta = poisson_solve(&f).unwrap();
        let back = d_star(&d(&theta).unwrap()).unwrap();
        assert!(back.add_scaled(-1.0, &f).unwrap().max_abs() < 1e-10);
        assert!(theta.values().iter().sum::<f64>().abs() < 1e-9);
    }
}

#[test]
fn poisson_solve_rejects_a_mean() {
    let (g, _) = grid2(8, 0);
    let f = FormField::from_fn(&g, 0, |_| 1.0);
    assert!(matches!(poisson_solve(&f), Err(Error::NonzeroMean { .. })));
}

#[test]
fn hodge_pieces_are_orthogonal_and_typed() {
    let mut r = rng(21);
    for (g, _) in [grid2(12, 0), grid3(6, [0, 0, 0])] {
        let a = random_form(&mut r, &g, 1);
        let h = hodge_decompose(&a).unwrap();
        let sum = h.exact.add_scaled(1.0, &h.coexact).unwrap().add_scaled(1.0, &h.harmonic).unwrap();
        assert!(sum.add_scaled(-1.0, &a).unwrap().max_abs() < 1e-12);
        assert!(d(&h.exact).unwrap().max_abs() < 1e-9);
        assert!(d_star(&h.coexact).unwrap().max_abs() < 1e-9);
        assert!(d(&h.harmonic).unwrap().max_abs() < 1e-9);
        assert!(d_star(&h.harmonic).unwrap().max_abs() < 1e-9);
        let scale = a.dot(&a).unwrap();
        assert!(h.exact.dot(&h.coexact).unwrap().abs() < 1e-10 * scale);
        assert!(h.exact.dot(&h.harmonic).unwrap().abs() < 1e-10 * scale);
        assert!(h.coexact.dot(&h.harmonic).unwrap().abs() < 1e-10 * scale);
        assert_eq!(h.harmonic_coefficients().len(), g.n());
    }
}

#[test]
fn p_is_a_projection_onto_co_closed_forms() {
    let mut r = rng(22);
    let (g, _) = grid3(6, [0, 0, 0]);
    let a = random_form(&mut r, &g, 1);
    let pa = p_project(&a).unwrap();
    assert!(d_star(&pa).unwrap().max_abs() < 1e-9);
    let ppa = p_project(&pa).unwrap();
    assert!(ppa.add_scaled(-1.0, &pa).unwrap().max_abs() < 1e-10);
    let q = q_operator(&a).unwrap();
    assert!(pa.add_scaled(-1.0, &a).unwrap().add_scaled(-1.0, &d(&q).unwrap()).unwrap().max_abs() < 1e-12);
}

#[test]
fn coulomb_gauge_is_co_closed_and_keeps_invariants() {
    let mut r = rng(23);
    for (_, bg) in [grid2(12, 1), grid3(6, [0, 1, 0])] {
        let pair = random_pair(&mut r, &bg, 0.4);
        let c = coulomb_project(&pair).unwrap();
        assert!(d_star(&c.alpha).unwrap().max_abs() < 1e-9);
        assert!(rel_close(energy(&pair).total, energy(&c).total, 1e-11));
        let dj = jacobian_form(&pair).add_scaled(-1.0, &jacobian_form(&c)).unwrap();
        assert!(dj.max_abs() < 1e-9);
    }
}

#[test]
fn normalized_harmonic_part_lies_in_the_fundamental_cell() {
    let mut r = rng(24);
    let (g, bg) = grid2(12, 0);
    let mut pair = random_pair(&mut r, &bg, 0.4);
    let shift = [7.3 * PI, -5.1 * PI];
    pair.alpha = pair.alpha.add_scaled(1.0, &FormField::from_fn(&g, 1, |l| shift[l % 2])).unwrap();
    let nrm = normalize_gauge(&pair).unwrap();
    let coeffs = hodge_decompose(&nrm.alpha).unwrap().harmonic_coefficients();
    for (j, c) in coeffs.iter().enumerate() {
        assert!(c.abs() <= PI / g.lengths()[j] + 1e-12, "{c}");
    }
    assert!(rel_close(energy(&pair).total, energy(&nrm).total, 1e-11));
}
