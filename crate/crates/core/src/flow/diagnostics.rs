use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::Trajectory;
use crate::functional::{curvature, site_curvature_sq, PairState};
use crate::lattice::{FormField, Grid};
use crate::reduce::tree_sum;
use crate::{Error, Result};

/// `ξ = ε|ω| − (1 − |u|²)/(2ε)` per site, with `|ω|` from the plaquette average of `|ω|²`.
pub fn discrepancy(pair: &PairState) -> FormField {
    let g = pair.grid();
    let w2 = site_curvature_sq(g, &curvature(pair));
    let u = pair.u.values();
    let eps = pair.eps;
    FormField::from_fn(g, 0, |s| eps * w2[s].sqrt() - (1.0 - u[s].norm_sqr()) / (2.0 * eps))
}

/// Periodic one-dimensional heat kernel at displacement `d`.
fn heat_kernel_1d(d: f64, t: f64, l: f64) -> f64 {
    let d = d - l * (d / l).round();
    let images = ((160.0 * t).sqrt() / l).ceil() as i64;
    let modes = (l * (40.0 / t).sqrt() / (2.0 * PI)).ceil() as i64;
    if images <= modes {
        let norm = 1.0 / (4.0 * PI * t).sqrt();
        let mut s = 0.0;
        for m in -images..=images {
            let x = d + m as f64 * l;
            s += (-x * x / (4.0 * t)).exp();
        }
        norm * s
    } else {
        let mut s = 1.0;
        for q in 1..=modes {
            let k = 2.0 * PI * q as f64 / l;
            s += 2.0 * (-k * k * t).exp() * (k * d).cos();
        }
        s / l
    }
}

/// Heat kernel `K(t, ·, x0)` of the flat torus sampled at the sites, renormalized
/// so that `Σ K · V = 1`.
pub fn heat_kernel(grid: &Arc<Grid>, t: f64, x0: &[f64]) -> Result<FormField> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("heat kernel time {t} must be positive")));
    }
    let n = grid.n();
    let factors: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            (0..grid.dims()[a])
                .map(|i| heat_kernel_1d(i as f64 * grid.spacing()[a] - x0[a], t, grid.lengths()[a]))
                .collect()
        })
        .collect();
    let raw: Vec<f64> = (0..grid.num_sites())
        .into_par_iter()
        .map(|s| (0..n).map(|a| factors[a][grid.coord(s, a)]).product())
        .collect();
    let mass = grid.cell_volume() * tree_sum(&raw);
    FormField::from_values(grid, 0, raw.into_iter().map(|k| k / mass).collect())
}

/// `ζ(t) = −∫_1^t C2 log(1/(T − s)^{n/2}) ds` in closed form.
pub fn zeta(t: f64, big_t: f64, n: usize, c2: f64) -> f64 {
    // F(s) = ∫ log(T − s) ds = −[(T − s) log(T − s) − (T − s)].
    let f = |s: f64| {
        let r = big_t - s;
        if r <= 0.0 {
            0.0
        } else {
            -(r * r.ln() - r)
        }
    };
    0.5 * c2 * n as f64 * (f(t) - f(1.0))
}

#[derive(Debug, Clone, Copy)]
pub struct MonotonicityPoint {
    pub t: f64,
    pub phi: f64,
    pub psi: f64,
}

#[derive(Debug, Clone)]
pub struct MonotonicityProfile {
    pub points: Vec<MonotonicityPoint>,
    /// `max_t Ψ(t) / (Ψ(T − 1) + 1)`.
    pub ratio: f64,
}

/// Backward-heat-kernel weighted energies `Φ_h` and their rescaling `Ψ_h` over
/// `[T − 1, T)`.
pub fn monotonicity_profile(
    trajectory: &Trajectory,
    big_t: f64,
    x0: &[f64],
    c2: f64,
) -> Result<MonotonicityProfile> {
    if !(2.0..=3.0).contains(&big_t) {
        return Err(Error::InvalidArgument(format!("T = {big_t} is outside [2, 3]")));
    }
    let gap = trajectory.dt * trajectory.monitor_stride as f64 * (1.0 + 1e-9) + 1e-12;
    let start = big_t - 1.0;
    let window: Vec<_> = trajectory
        .samples
        .iter()
        .filter(|s| s.t >= start - 1e-9 && s.t < big_t - 1e-12)
        .collect();
    let first = window
        .first()
        .ok_or_else(|| Error::InvalidArgument("trajectory does not reach T − 1".into()))?;
    if first.t - start > gap {
        return Err(Error::InvalidArgument(format!(
            "trajectory gap: first sample in the window at t = {}, expected {start}",
            first.t
        )));
    }
    for w in window.windows(2) {
        if w[1].t - w[0].t > gap {
            return Err(Error::InvalidArgument(format!(
                "trajectory gap between t = {} and t = {}",
                w[0].t, w[1].t
            )));
        }
    }
    if big_t - window.last().unwrap().t > gap {
        return Err(Error::InvalidArgument("trajectory stops before T".into()));
    }
    let density0 = first
        .density
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("trajectory was recorded without densities".into()))?;
    let grid = density0.grid().clone();
    let n = grid.n();
    let exponent = 1.0 + c2 * trajectory.eps.powf(2.0 / (n as f64 - 1.0));
    let mut points = Vec::with_capacity(window.len());
    for s in &window {
        let e = s
            .density
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("trajectory was recorded without densities".into()))?;
        let tau = big_t - s.t;
        let k = heat_kernel(&grid, tau, x0)?;
        let phi = k.dot(e)?;
        let psi = tau.powf(exponent) * zeta(s.t, big_t, n, c2).exp() * phi;
        points.push(MonotonicityPoint { t: s.t, phi, psi });
    }
    let reference = points[0].psi;
    let ratio = points.iter().map(|p| p.psi / (reference + 1.0)).fold(0.0, f64::max);
    Ok(MonotonicityProfile { points, ratio })
}

#[derive(Debug, Clone)]
pub struct DensityRatio {
    /// `(r, r^{2−n} Σ_{B_r(x0)} e_ε V)`.
    pub table: Vec<(f64, f64)>,
    pub max: f64,
}

/// Scaled ball energies `r^{2−n} ∫_{B_r(x0)} e_ε` for `r` from `ε` to 1 in factors of `√2`.
pub fn density_ratio(pair: &PairState, x0: &[f64]) -> DensityRatio {
    let g = pair.grid();
    let n = g.n();
    let dens = crate::functional::energy(pair).density;
    let mut by_dist: Vec<(f64, f64)> = (0..g.num_sites())
        .map(|s| (g.distance(&g.position(s)[..n], x0), dens.values()[s]))
        .collect();
    by_dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut radii = Vec::new();
    let mut r = pair.eps;
    while r < 1.0 - 1e-12 {
        radii.push(r);
        r *= std::f64::consts::SQRT_2;
    }
    radii.push(1.0);
    let v = g.cell_volume();
    let mut table = Vec::with_capacity(radii.len());
    let mut idx = 0;
    let mut acc = 0.0;
    for &r in &radii {
        while idx < by_dist.len() && by_dist[idx].0 <= r {
            acc += by_dist[idx].1;
            idx += 1;
        }
        table.push((r, r.powi(2 - n as i32) * acc * v));
    }
    let max = table.iter().map(|x| x.1).fold(0.0, f64::max);
    DensityRatio { table, max }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn images_and_fourier_agree() {
        for &t in &[0.01, 0.05, 0.2, 1.0] {
            for &d in &[0.0, 0.1, 0.37, 0.5] {
                let l: f64 = 1.0;
                let norm = 1.0 / (4.0 * PI * t).sqrt();
                let images: f64 = (-30..=30)
                    .map(|m| norm * (-(d + m as f64 * l).powi(2) / (4.0 * t)).exp())
                    .sum();
                let fourier: f64 = 1.0
                    + 2.0
                        * (1..400)
                            .map(|q| {
                                let k = 2.0 * PI * q as f64;
                                (-k * k * t).exp() * (k * d).cos()
                            })
                            .sum::<f64>();
                assert!((images - fourier).abs() < 1e-10 * images.max(1.0));
                assert!((heat_kernel_1d(d, t, l) - images).abs() < 1e-12 * images.max(1.0));
            }
        }
    }

    #[test]
    fn zeta_vanishes_at_one_and_matches_quadrature() {
        assert_eq!(zeta(1.0, 2.5, 3, 1.0), 0.0);
        let (t, big_t) = (2.2, 2.5);
        let m = 20000;
        let h = (t - 1.0) / m as f64;
        let quad: f64 = (0..m)
            .map(|i| {
                let s = 1.0 + (i as f64 + 0.5) * h;
                1.5 * (big_t - s).ln() * h
            })
            .sum();
        assert!((zeta(t, big_t, 3, 1.0) - quad).abs() < 1e-6);
    }
}
