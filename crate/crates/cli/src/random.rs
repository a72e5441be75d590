//! Seeded generators of smooth pairs and of closed families of 0-cycles.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ymh_core::currents::CubicalCurrent;
use ymh_core::lattice::{BackgroundConnection, FormField, Grid, ScalarField};
use ymh_core::PairState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of four random low Fourier modes, sampled at the sites.
pub fn smooth_field(rng: &mut impl Rng, grid: &Grid, amplitude: f64) -> Vec<f64> {
    let n = grid.n();
    let modes: Vec<(Vec<f64>, f64, f64)> = (0..4)
        .map(|_| {
            let q = (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
            (q, rng.gen_range(-1.0..1.0) * amplitude, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    (0..grid.num_sites())
        .map(|s| {
            let x = grid.position(s);
            modes
                .iter()
                .map(|(q, a, ph)| {
                    let arg: f64 = (0..n).map(|j| 2.0 * PI * q[j] * x[j] / grid.lengths()[j]).sum();
                    a * (arg + ph).cos()
                })
                .sum()
        })
        .collect()
}

/// Pair with smooth modulus in `[0, 1]`, smooth phase and smooth one-form.
/// Smooth as a section only in the trivial sector.
pub fn smooth_pair(rng: &mut impl Rng, bg: &Arc<BackgroundConnection>, eps: f64) -> PairState {
    let g = bg.grid().clone();
    let n = g.n();
    let base = rng.gen_range(0.2..0.9);
    let rho = smooth_field(rng, &g, 0.4);
    let phi = smooth_field(rng, &g, 2.0);
    let u = ScalarField::from_values(
        &g,
        (0..g.num_sites())
            .map(|s| Complex64::from_polar((base + rho[s]).clamp(0.0, 1.0), phi[s]))
            .collect(),
    )
    .expect("one value per site");
    let comps: Vec<Vec<f64>> = (0..n).map(|_| smooth_field(rng, &g, 1.5)).collect();
    let alpha = FormField::from_fn(&g, 1, |l| comps[l % n][l / n]);
    PairState::new(u, alpha, bg.clone(), eps).expect("fields share the grid")
}

/// Closed path of dual 0-cycles on a two-torus: unit charges are created on
/// edges, wander one edge per step and are finally walked onto partners of the
/// opposite sign, so the path starts and ends at zero.
pub fn closed_path(rng: &mut impl Rng, grid: &Arc<Grid>, steps: usize) -> Vec<CubicalCurrent> {
    let dims = [grid.dims()[0] as i64, grid.dims()[1] as i64];
    let mut charges: Vec<([i64; 2], i64)> = Vec::new();
    let current = |charges: &[([i64; 2], i64)]| {
        let mut c = CubicalCurrent::zero(grid, 0, true);
        for &(x, m) in charges {
            c.add(ymh_core::currents::Cell::new(grid.site(&x), &[]), m);
        }
        c
    };
    let mut path = vec![current(&charges)];
    let unit = |rng: &mut dyn rand::RngCore| -> [i64; 2] {
        let a = rng.gen_range(0..2);
        let d = if rng.gen_bool(0.5) { 1 } else { -1 };
        if a == 0 { [d, 0] } else { [0, d] }
    };
    for _ in 0..steps {
        if charges.is_empty() || (charges.len() < 4 && rng.gen_bool(0.2)) {
            // A pair on one edge: −1 at x, +1 at x + e.
            let x = [rng.gen_range(0..dims[0]), rng.gen_range(0..dims[1])];
            let e = unit(rng);
            charges.push((x, -1));
            charges.push(([x[0] + e[0], x[1] + e[1]], 1));
        } else {
            let i = rng.gen_range(0..charges.len());
            let e = unit(rng);
            charges[i].0 = [charges[i].0[0] + e[0], charges[i].0[1] + e[1]];
        }
        path.push(current(&charges));
    }
    // Walk each positive charge onto a negative one, sometimes the long way round.
    while let Some(p) = charges.iter().position(|c| c.1 > 0) {
        let q = charges.iter().position(|c| c.1 < 0).expect("charges are balanced");
        let target = charges[q].0;
        for a in 0..2 {
            let mut delta = (target[a] - charges[p].0[a]).rem_euclid(dims[a]);
            if rng.gen_bool(0.5) && delta != 0 {
                delta -= dims[a];
            } else if rng.gen_bool(0.2) {
                delta += dims[a];
            }
            let step = delta.signum();
            for _ in 0..delta.abs() {
                charges[p].0[a] += step;
                path.push(current(&charges));
            }
        }
        let (hi, lo) = if p > q { (p, q) } else { (q, p) };
        charges.remove(hi);
        charges.remove(lo);
    }
    debug_assert!(path.last().is_some_and(|c| c.is_zero()));
    path
}
