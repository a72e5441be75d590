#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ymh_core::lattice::{make_grid, BackgroundConnection, FormField, Grid, ScalarField};
use ymh_core::PairState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random trigonometric polynomial with a few low modes, evaluated at the sites.
pub fn smooth_field(rng: &mut ChaCha8Rng, g: &Arc<Grid>, amplitude: f64) -> Vec<f64> {
    let n = g.n();
    let mut modes = Vec::new();
    for _ in 0..4 {
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
        modes.push((q, rng.gen_range(-1.0..1.0) * amplitude, rng.gen_range(0.0..2.0 * PI)));
    }
    (0..g.num_sites())
        .map(|s| {
            let x = g.position(s);
            modes
                .iter()
                .map(|(q, a, ph)| {
                    let arg: f64 = (0..n).map(|j| 2.0 * PI * q[j] * x[j] / g.lengths()[j]).sum();
                    a * (arg + ph).cos()
                })
                .sum()
        })
        .collect()
}

/// Random smooth pair with `|u| ≤ 1`.
pub fn random_pair(rng: &mut ChaCha8Rng, bg: &Arc<BackgroundConnection>, eps: f64) -> PairState {
    let g = bg.grid().clone();
    let n = g.n();
    let rho = smooth_field(rng, &g, 0.3);
    let phi = smooth_field(rng, &g, 2.0);
    let u = ScalarField::from_values(
        &g,
        (0..g.num_sites())
            .map(|s| Complex64::from_polar((0.6 + rho[s]).clamp(0.0, 1.0), phi[s]))
            .collect(),
    )
    .unwrap();
    let comps: Vec<Vec<f64>> = (0..n).map(|_| smooth_field(rng, &g, 1.0)).collect();
    let alpha = FormField::from_fn(&g, 1, |l| comps[l % n][l / n]);
    PairState::new(u, alpha, bg.clone(), eps).unwrap()
}

pub fn random_form(rng: &mut ChaCha8Rng, g: &Arc<Grid>, degree: usize) -> FormField {
    let len = match degree {
        0 => g.num_sites(),
        d => g.num_cells(d),
    };
    FormField::from_values(g, degree, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn grid2(n: usize, flux: i64) -> (Arc<Grid>, Arc<BackgroundConnection>) {
    make_grid(2, &[n, n], &[1.0, 1.0], &[flux]).unwrap()
}

pub fn grid3(n: usize, flux: [i64; 3]) -> (Arc<Grid>, Arc<BackgroundConnection>) {
    make_grid(3, &[n, n + 1, n + 2], &[1.0, 1.1, 0.9], &flux).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
