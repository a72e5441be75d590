mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use ymh_core::currents::{
    almgren_class, concentration, extract_jacobian_current, fill_in, fineness, flat_norm, flat_norm_lp,
    homology_class, pairing_class, plaquette_windings, width_bruteforce, Cell, CubicalCurrent, DiscreteFamily,
};
use ymh_core::functional::{jacobian_form, slice_flux};
use ymh_core::lattice::{make_grid, Grid};
use ymh_core::vortex::{solve_profile, synthesize_planar};
use ymh_core::{Error, PairState};

fn random_chain(rng: &mut impl Rng, g: &std::sync::Arc<Grid>, dim: usize, cells: usize) -> CubicalCurrent {
    let n = g.n();
    let mut c = CubicalCurrent::zero(g, dim, false);
    for _ in 0..cells {
        let mut axes: Vec<usize> = (0..n).collect();
        axes.shuffle(rng);
        axes.truncate(dim);
        c.add(Cell::new(rng.gen_range(0..g.num_sites()), &axes), rng.gen_range(-3..=3));
    }
    c
}

/// Periodic ℓ¹ lattice distance between two sites in units of length.
fn l1(g: &Grid, a: usize, b: usize) -> f64 {
    (0..g.n())
        .map(|ax| {
            let d = g.dims()[ax] as i64;
            let k = (g.coord(a, ax) as i64 - g.coord(b, ax) as i64).rem_euclid(d);
            k.min(d - k) as f64 * g.spacing()[ax]
        })
        .sum()
}

/// Flat norm of a 0-chain by exhaustive partial matching of positive against
/// negative unit points; unmatched points cost their unit mass.
fn matching_flat_norm(r: &CubicalCurrent) -> f64 {
    let g = r.grid();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (c, &m) in r.cells() {
        for _ in 0..m.abs() {
            if m > 0 { plus.push(c.base) } else { minus.push(c.base) }
        }
    }
    fn go(g: &Grid, i: usize, plus: &[usize], minus: &[usize], used: &mut Vec<bool>) -> f64 {
        if i == plus.len() {
            return used.iter().filter(|&&u| !u).count() as f64;
        }
        let mut best = 1.0 + go(g, i + 1, plus, minus, used);
        for j in 0..minus.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(l1(g, plus[i], minus[j]) + go(g, i + 1, plus, minus, used));
                used[j] = false;
            }
        }
        best
    }
    go(g, 0, &plus, &minus, &mut vec![false; minus.len()])
}

#[test]
fn mass_and_boundary_of_a_unit_square() {
    let (g, _) = make_grid(3, &[4, 5, 6], &[1.0, 1.0, 2.0], &[0, 0, 0]).unwrap();
    let sq = CubicalCurrent::from_cells(&g, 2, false, [(Cell::new(0, &[0, 2]), 2)]).unwrap();
    assert!((sq.mass() - 2.0 * 0.25 * (2.0 / 6.0)).abs() < 1e-15);
    let b = sq.boundary();
    assert_eq!(b.cells().len(), 4);
    assert!((b.mass() - 2.0 * 2.0 * (0.25 + 1.0 / 3.0)).abs() < 1e-14);
    assert!(b.boundary().is_zero());
}

#[test]
fn mass_matches_the_weighted_l1_sum() {
    let mut r = rng(40);
    let (g, _) = grid3(5, [0, 0, 0]);
    for dim in 0..=3 {
        let c = random_chain(&mut r, &g, dim, 30);
        let naive: f64 = c
            .cells()
            .iter()
            .map(|(cell, m)| m.abs() as f64 * cell.axis_list().iter().map(|&a| g.spacing()[a]).product::<f64>())
            .sum();
        assert!((c.mass() - naive).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_of_a_boundary_vanishes(seed in any::<u64>(), dim in 1usize..=3, count in 1usize..40) {
        let mut r = rng(seed);
        let (g, _) = grid3(4, [0, 0, 0]);
        let c = random_chain(&mut r, &g, dim, count);
        prop_assert!(c.boundary().boundary().is_zero());
        prop_assert!(c.boundary().is_cycle());
    }

    #[test]
    fn flat_norm_is_translation_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (g, _) = grid2(6, 0);
        let a = random_chain(&mut r, &g, 0, 3);
        let b = random_chain(&mut r, &g, 0, 3);
        let shift = [r.gen_range(0..6), r.gen_range(0..6)];
        let x = flat_norm(&a, &b).unwrap().value;
        let y = flat_norm(&a.translated(&shift), &b.translated(&shift)).unwrap().value;
        prop_assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn flat_norm_routes_agree_with_matching() {
    let mut r = rng(41);
    let (g, _) = grid2(6, 0);
    let zero = CubicalCurrent::zero(&g, 0, false);
    for _ in 0..200 {
        let mut c = CubicalCurrent::zero(&g, 0, false);
        for _ in 0..r.gen_range(1..=5) {
            c.add(Cell::new(r.gen_range(0..36), &[]), if r.gen_bool(0.5) { 1 } else { -1 });
        }
        let flow = flat_norm(&c, &zero).unwrap();
        let lp = flat_norm_lp(&c, &zero).unwrap();
        let oracle = matching_flat_norm(&c);
        assert!((flow.value - oracle).abs() < 1e-12, "{c:?}: {} vs {oracle}", flow.value);
        assert!((lp.value - oracle).abs() < 1e-9);
        assert!(flow.integral);
        let rebuilt = flow.p.add_scaled(1, &flow.q.boundary()).unwrap();
        assert_eq!(rebuilt, c);
    }
}

#[test]
fn flat_norm_is_a_metric() {
    let mut r = rng(42);
    let (g, _) = grid2(6, 0);
    for _ in 0..100 {
        let [a, b, c] = [0, 1, 2].map(|_| random_chain(&mut r, &g, 0, 3));
        let ab = flat_norm(&a, &b).unwrap().value;
        let ba = flat_norm(&b, &a).unwrap().value;
        let bc = flat_norm(&b, &c).unwrap().value;
        let ac = flat_norm(&a, &c).unwrap().value;
        assert!((ab - ba).abs() < 1e-12);
        assert!(ac <= ab + bc + 1e-9);
        assert_eq!(flat_norm(&a, &a).unwrap().value, 0.0);
        assert!(a == b || ab > 0.0);
    }
}

#[test]
fn flat_norm_of_a_loop_in_a_three_torus() {
    let (g, _) = make_grid(3, &[4, 4, 4], &[1.0; 3], &[0, 0, 0]).unwrap();
    let lp = CubicalCurrent::axis_loop(&g, 2, 0, 1, false);
    let zero = CubicalCurrent::zero(&g, 1, false);
    let f = flat_norm(&lp, &zero).unwrap();
    assert!(f.integral);
    assert!((f.value - 1.0).abs() < 1e-9);
    let moved = lp.translated(&[1, 0, 0]);
    let f = flat_norm(&lp, &moved).unwrap();
    assert!((f.value - 0.25).abs() < 1e-9, "{}", f.value);
}

#[test]
fn fill_in_needs_a_boundary() {
    let (g, _) = grid2(6, 0);
    let p = CubicalCurrent::dual_point(&g, 3, 1);
    assert!(fill_in(&p).is_err());
    let pair = p.add_scaled(-1, &CubicalCurrent::dual_point(&g, 5, 1)).unwrap();
    let f = fill_in(&pair).unwrap();
    assert!((f.q.mass() - 2.0 / 6.0).abs() < 1e-12);
    assert_eq!(f.q.boundary(), pair);
}

#[test]
fn homology_of_loops_and_boundaries() {
    let (g, _) = grid3(4, [0, 0, 0]);
    assert_eq!(homology_class(&CubicalCurrent::axis_loop(&g, 2, 5, 1, true)).unwrap(), vec![0, 0, 1]);
    assert_eq!(homology_class(&CubicalCurrent::axis_loop(&g, 0, 5, -2, true)).unwrap(), vec![-2, 0, 0]);
    let mut r = rng(43);
    let b = random_chain(&mut r, &g, 2, 10).boundary();
    assert_eq!(homology_class(&b).unwrap(), vec![0, 0, 0]);
    let mut open = CubicalCurrent::zero(&g, 1, false);
    open.add(Cell::new(0, &[1]), 1);
    assert!(matches!(pairing_class(&open), Err(Error::NotACycle)));
    assert!(homology_class(&CubicalCurrent::zero(&g, 0, false)).is_err());
}

#[test]
fn jacobian_current_matches_the_flux_sector() {
    let mut r = rng(44);
    for flux in [[1, 0, -1], [0, 2, 0]] {
        let (g, bg) = grid3(6, flux);
        let pair = random_pair(&mut r, &bg, 0.3);
        let j = extract_jacobian_current(&pair, 0.5).unwrap();
        assert!(j.current.is_cycle());
        let class = homology_class(&j.current).unwrap();
        assert_eq!([class[2], -class[1], class[0]], flux);
        for p in 0..3 {
            assert!((slice_flux(&g, &jacobian_form(&pair), p, 0) - flux[p] as f64).abs() < 1e-9);
        }
        assert_eq!(plaquette_windings(&pair).unwrap().len(), g.num_cells(2));
    }
}

#[test]
fn planar_vortex_current_sits_at_the_core() {
    let p = solve_profile(1, 30.0, 1e-10).unwrap();
    let (g, bg) = make_grid(2, &[64, 64], &[4.0, 4.0], &[1]).unwrap();
    let pair = synthesize_planar(&p, 0.2, &bg, [2.03, 1.03]).unwrap();
    let j = extract_jacobian_current(&pair, 0.5).unwrap();
    let (cell, &m) = j.current.cells().iter().next().unwrap();
    assert_eq!(m, 1);
    assert_eq!(g.coords(cell.base)[..2], [32, 16]);
    assert_eq!(j.regular_nonzero, 0);
    assert!(extract_jacobian_current(&pair, 1.5).is_err());
    let vac = PairState::vacuum(&make_grid(2, &[8, 8], &[1.0, 1.0], &[0]).unwrap().1, 0.2).unwrap();
    assert!(extract_jacobian_current(&vac, 0.5).unwrap().current.is_zero());
}

/// `δ_{q + i e_axis} − δ_q` for `i = 0..=N`.
fn loop_path(g: &std::sync::Arc<Grid>, q: [i64; 2], axis: usize, dir: i64) -> Vec<CubicalCurrent> {
    let n = g.dims()[axis] as i64;
    (0..=n)
        .map(|i| {
            let mut x = q;
            x[axis] += dir * i;
            CubicalCurrent::dual_point(g, g.site(&x), 1)
                .add_scaled(-1, &CubicalCurrent::dual_point(g, g.site(&q), 1))
                .unwrap()
        })
        .collect()
}

#[test]
fn create_transport_annihilate_has_unit_class() {
    let (g, _) = grid2(9, 0);
    let fam = DiscreteFamily::from_path(loop_path(&g, [2, 3], 0, 1)).unwrap();
    assert_eq!(fam.level(), 2);
    assert!((fineness(&fam).unwrap() - 1.0 / 9.0).abs() < 1e-12);
    assert_eq!(almgren_class(&fam).unwrap(), vec![1, 0]);
    let back = DiscreteFamily::from_path(loop_path(&g, [2, 3], 1, -1)).unwrap();
    assert_eq!(almgren_class(&back).unwrap(), vec![0, -1]);
    let both = fam.concatenate(&back).unwrap();
    assert_eq!(almgren_class(&both).unwrap(), vec![1, -1]);
    let r = 0.05;
    assert!((concentration(&fam, r).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn coarse_families_are_rejected() {
    let (g, _) = grid2(9, 0);
    let far = CubicalCurrent::dual_point(&g, g.site(&[4, 4]), 1)
        .add_scaled(-1, &CubicalCurrent::dual_point(&g, 0, 1))
        .unwrap();
    let zero = CubicalCurrent::zero(&g, 0, true);
    let fam = DiscreteFamily::from_path(vec![zero.clone(), far, zero]).unwrap();
    assert!(matches!(almgren_class(&fam), Err(Error::FinenessTooLarge { .. })));
}

#[test]
fn concentration_of_a_loop_family_is_the_ball_diameter() {
    let (g, _) = grid3(8, [0, 0, 0]);
    let lp = CubicalCurrent::axis_loop(&g, 2, 0, 1, true);
    let fam = DiscreteFamily::from_path(vec![lp.clone(), lp]).unwrap();
    let r = 0.2;
    assert!((concentration(&fam, r).unwrap() - 2.0 * r).abs() < 1e-12);
    assert_eq!(fineness(&fam).unwrap(), 0.0);
}

#[test]
fn sweepout_of_a_two_torus_has_degree_one() {
    let (g, _) = grid2(9, 0);
    // δ_(r,c) − δ_(r,0) − δ_(0,c) + δ_(0,0) vanishes on the boundary of the square.
    let side = 10i64;
    let pt = |r: i64, c: i64, m: i64| CubicalCurrent::dual_point(&g, g.site(&[r, c]), m);
    let mut values = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let v = pt(r, c, 1)
                .add_scaled(1, &pt(r, 0, -1))
                .and_then(|x| x.add_scaled(1, &pt(0, c, -1)))
                .and_then(|x| x.add_scaled(1, &pt(0, 0, 1)))
                .unwrap();
            values.push(v);
        }
    }
    let fam = DiscreteFamily::new(2, 2, values).unwrap();
    let class = almgren_class(&fam).unwrap();
    assert_eq!(class.len(), 1);
    assert_eq!(class[0].abs(), 1);
}

#[test]
fn width_of_small_tori() {
    let (g, _) = grid2(4, 0);
    assert_eq!(width_bruteforce(&[0, 0], &g, 8.0, 100_000).unwrap().upper, Some(0.0));
    let w = width_bruteforce(&[1, 0], &g, 8.0, 1_000_000).unwrap();
    assert_eq!((w.lower, w.upper, w.capped), (2.0, Some(2.0), false));
    let w = width_bruteforce(&[1, 1], &g, 8.0, 1_000_000).unwrap();
    assert!(w.lower >= 2.0 && w.upper.unwrap() >= w.lower);
    let (g7, _) = grid2(7, 0);
    assert!(width_bruteforce(&[1, 0], &g7, 8.0, 10).is_err());
}

#[test]
fn windings_detect_a_zero_section() {
    let (g, bg) = grid2(8, 0);
    let mut pair = PairState::vacuum(&bg, 0.2).unwrap();
    pair.u.values_mut()[g.site(&[3, 3])] = num_complex::Complex64::new(0.0, 0.0);
    assert!(matches!(plaquette_windings(&pair), Err(Error::ZeroSection { .. })));
}
