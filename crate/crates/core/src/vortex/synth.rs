//! Lattice pairs built from scaled vortex profiles.
//!
//! Every vortex contributes a modulus factor `1 − χ(1 − f(r/ε))` and a one-form
//! `μ = χ (κ − a_κ(r/ε)) dθ` on the links of its normal plane, where `χ` is a
//! smooth radial cutoff. Writing the connection as `B − μ` with `B` flat up to
//! `2π` Dirac fluxes at the cores, the perturbation `α` solves
//! `dα = D − dμ − ω_0` in the coexact part, plus the constant one-form that makes
//! the holonomies of `B` trivial. The phase of `u` is then the `B`-parallel
//! section, so far from the cores the pair is the flat vacuum of the sector.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::profile::{VortexProfile, DEFAULT_R_MAX, DEFAULT_TOL};
use crate::currents::{pairing_class, plane_sign, CubicalCurrent};
use crate::functional::{slice_flux, PairState};
use crate::hodge::inverse_laplacian;
use crate::lattice::{d, d_star, pairs, BackgroundConnection, FormField, Grid, ScalarField};
use crate::{Error, Result};

/// A vortex of degree `k` centered at `center`. In `T³` it is a straight line
/// along `axis`, with degree measured in the normal plane `(j, k)`, `j < k`, and
/// orientation so that `(j, k, axis)` is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedVortex {
    pub center: [f64; 3],
    pub axis: Option<usize>,
    pub k: i64,
}

/// Radii where the vortex cutoff starts to fall and where it vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

/// Straight closed loop of a dual 1-cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StraightLoop {
    pub axis: usize,
    /// Dual vertex on the loop.
    pub base: usize,
    pub k: i64,
}

fn smoothstep(cut: &Cutoff, r: f64) -> f64 {
    if r <= cut.inner {
        1.0
    } else if r >= cut.outer {
        0.0
    } else {
        let s = (r - cut.inner) / (cut.outer - cut.inner);
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

fn wrap_angle(t: f64) -> f64 {
    let w = t - 2.0 * PI * (t / (2.0 * PI)).round();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

struct Placed<'a> {
    j: usize,
    k: usize,
    kappa: i64,
    center: [f64; 3],
    profile: &'a VortexProfile,
}

impl Placed<'_> {
    fn polar(&self, g: &Grid, x: &[f64; 3]) -> (f64, f64) {
        let dj = g.wrap_delta(self.j, x[self.j] - self.center[self.j]);
        let dk = g.wrap_delta(self.k, x[self.k] - self.center[self.k]);
        (dj.hypot(dk), dk.atan2(dj))
    }

    fn a_kappa(&self, s: f64) -> f64 {
        self.profile.eval(s).1.abs() * self.kappa.signum() as f64
    }
}

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

fn shifted(x: [f64; 3], axis: usize, h: f64) -> [f64; 3] {
    let mut y = x;
    y[axis] += h;
    y
}

/// General synthesis. `profiles` must contain a profile of degree `±|k|` for
/// every vortex.
pub fn synthesize(
    background: &Arc<BackgroundConnection>,
    eps: f64,
    vortices: &[PlacedVortex],
    profiles: &[VortexProfile],
    cutoff: Cutoff,
) -> Result<PairState> {
    let g = background.grid().clone();
    let n = g.n();
    let np = g.num_pairs();
    if !(cutoff.inner > 0.0 && cutoff.inner < cutoff.outer && cutoff.outer < 0.5 * g.min_length()) {
        return Err(Error::InvalidArgument(format!(
            "cutoff radii {} < {} must lie in (0, ℓ_min/2)",
            cutoff.inner, cutoff.outer
        )));
    }
    let h_max = g.spacing().iter().cloned().fold(0.0, f64::max);
    if cutoff.inner < 2.0 * h_max {
        return Err(Error::InvalidArgument(format!(
            "inner cutoff {} is below two grid spacings",
            cutoff.inner
        )));
    }
    let mut placed = Vec::with_capacity(vortices.len());
    for v in vortices {
        let (j, k, sigma) = match (n, v.axis) {
            (2, None) => (0, 1, 1),
            (3, Some(l)) if l < 3 => {
                let (j, k) = pairs(3)[2 - l];
                (j, k, plane_sign(j, k, l))
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "vortex axis {:?} does not fit an {n}-torus",
                    v.axis
                )))
            }
        };
        let kappa = sigma * v.k;
        if kappa == 0 {
            continue;
        }
        let profile = profiles
            .iter()
            .find(|p| p.k().abs() == kappa.abs())
            .ok_or_else(|| Error::InvalidArgument(format!("no profile of degree {}", kappa.abs())))?;
        placed.push(Placed { j, k, kappa, center: v.center, profile });
    }
    let h = g.spacing().to_vec();

    let modulus: Vec<f64> = (0..g.num_sites())
        .map(|s| {
            let x = g.position(s);
            placed.iter().fold(1.0, |m, v| {
                let (r, _) = v.polar(&g, &x);
                m * (1.0 - smoothstep(&cutoff, r) * (1.0 - v.profile.eval(r / eps).0))
            })
        })
        .collect();

    // Link integrals of χ(κ − a_κ) dθ. Where χ ≡ 1 the singular part κ dθ is
    // integrated exactly and only a_κ dθ goes through the quadrature.
    let mu = FormField::from_fn(&g, 1, |l| {
        let (s, b) = (l / n, l % n);
        let x = g.position(s);
        let mut acc = 0.0;
        for v in &placed {
            if b != v.j && b != v.k {
                continue;
            }
            let pj = g.wrap_delta(v.j, x[v.j] - v.center[v.j]);
            let pk = g.wrap_delta(v.k, x[v.k] - v.center[v.k]);
            let (tj, tk) = if b == v.j { (h[b], 0.0) } else { (0.0, h[b]) };
            let t_perp = ((pj * tk - pk * tj) / h[b]).abs();
            let t_min = -(pj * tj + pk * tk) / (h[b] * h[b]);
            let closest = if t_min <= 0.0 {
                pj.hypot(pk)
            } else if t_min >= 1.0 {
                (pj + tj).hypot(pk + tk)
            } else {
                t_perp
            };
            if closest >= cutoff.outer {
                continue;
            }
            let r_far = pj.hypot(pk).max((pj + tj).hypot(pk + tk));
            let inside = r_far <= cutoff.inner;
            let mut quad = 0.0;
            for (&node, &w) in GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS) {
                let t = 0.5 * (node + 1.0);
                let (qj, qk) = (pj + t * tj, pk + t * tk);
                let r2 = qj * qj + qk * qk;
                let dtheta = (qj * tk - qk * tj) / r2;
                let r = r2.sqrt();
                let g_val = if inside {
                    -v.a_kappa(r / eps)
                } else {
                    smoothstep(&cutoff, r) * (v.kappa as f64 - v.a_kappa(r / eps))
                };
                quad += 0.5 * w * g_val * dtheta;
            }
            if inside {
                let t1 = pk.atan2(pj);
                let t2 = (pk + tk).atan2(pj + tj);
                quad += v.kappa as f64 * wrap_angle(t2 - t1);
            }
            acc += quad / h[b];
        }
        acc
    });

    let dirac = FormField::from_fn(&g, 2, |c| {
        let (s, p) = (c / np, c % np);
        let (pj, pk) = pairs(n)[p];
        let x = g.position(s);
        let corners = [x, shifted(x, pj, h[pj]), shifted(shifted(x, pj, h[pj]), pk, h[pk]), shifted(x, pk, h[pk])];
        let center = shifted(shifted(x, pj, 0.5 * h[pj]), pk, 0.5 * h[pk]);
        let mut acc = 0.0;
        for v in &placed {
            if (v.j, v.k) != (pj, pk) || v.polar(&g, &center).0 >= cutoff.outer {
                continue;
            }
            let t: Vec<f64> = corners.iter().map(|y| v.polar(&g, y).1).collect();
            let circ: f64 = (0..4).map(|i| wrap_angle(t[(i + 1) % 4] - t[i])).sum();
            let w = (circ / (2.0 * PI)).round();
            acc += v.kappa as f64 * w * 2.0 * PI / (h[pj] * h[pk]);
        }
        acc
    });

    let rhs = dirac
        .add_scaled(-1.0, &d(&mu)?)?
        .add_scaled(-1.0, background.curvature())?;
    for (p, &(pj, pk)) in pairs(n).iter().enumerate() {
        let normal_len = if n == 3 { g.dims()[3 - pj - pk] } else { 1 };
        for i in 0..normal_len {
            let mut x = [0i64; 3];
            if n == 3 {
                x[3 - pj - pk] = i as i64;
            }
            let defect = slice_flux(&g, &rhs, p, g.site(&x[..n]));
            if defect.abs() > 1e-6 {
                return Err(Error::SectorMismatch(format!(
                    "vortex degrees miss the flux of plane ({pj}, {pk}) by {:.6}",
                    -defect
                )));
            }
        }
    }
    let mut alpha = d_star(&inverse_laplacian(&rhs))?;

    // Constant correction that trivializes the holonomies of B = α + μ.
    let phases = background.link_phase();
    let transport = |alpha: &FormField, l: usize| {
        let b = l % n;
        phases[l] * Complex64::from_polar(1.0, -h[b] * (alpha.values()[l] + mu.values()[l]))
    };
    let mut shift = vec![0.0; n];
    for (a, c) in shift.iter_mut().enumerate() {
        let mut hol = Complex64::new(1.0, 0.0);
        let mut s = 0;
        for _ in 0..g.dims()[a] {
            hol *= transport(&alpha, s * n + a);
            s = g.fwd(s, a);
        }
        *c = hol.arg() / g.lengths()[a];
    }
    for (l, v) in alpha.values_mut().iter_mut().enumerate() {
        *v += shift[l % n];
    }

    let mut phase = vec![Complex64::new(1.0, 0.0); g.num_sites()];
    for s in 1..g.num_sites() {
        let c = g.coords(s);
        let a = (0..n).rev().find(|&a| c[a] > 0).unwrap();
        let p = g.bwd(s, a);
        phase[s] = transport(&alpha, p * n + a).conj() * phase[p];
    }
    let mut worst: f64 = 0.0;
    for l in 0..g.num_cells(1) {
        let (s, b) = (l / n, l % n);
        worst = worst.max((transport(&alpha, l) * phase[g.fwd(s, b)] - phase[s]).norm());
    }
    if worst > 1e-8 {
        return Err(Error::SectorMismatch(format!(
            "synthesized phase is not parallel (defect {worst:e})"
        )));
    }
    let u = ScalarField::from_values(&g, modulus.iter().zip(&phase).map(|(m, z)| m * z).collect())?;
    PairState::new(u, alpha, background.clone(), eps)
}

/// One planar vortex at `center` in the flux-`k` sector of a two-torus, cut off
/// between `ℓ_min/6` and `ℓ_min/3`.
pub fn synthesize_planar(
    profile: &VortexProfile,
    eps: f64,
    background: &Arc<BackgroundConnection>,
    center: [f64; 2],
) -> Result<PairState> {
    let g = background.grid();
    if g.n() != 2 {
        return Err(Error::InvalidArgument("planar synthesis needs a two-torus".into()));
    }
    if eps > g.min_length() / 10.0 {
        return Err(Error::InvalidArgument(format!(
            "ε = {eps} exceeds ℓ_min/10 = {}",
            g.min_length() / 10.0
        )));
    }
    if g.flux()[0] != profile.k() {
        return Err(Error::SectorMismatch(format!(
            "degree {} in the flux {} sector",
            profile.k(),
            g.flux()[0]
        )));
    }
    let l = g.min_length();
    synthesize(
        background,
        eps,
        &[PlacedVortex { center: [center[0], center[1], 0.0], axis: None, k: profile.k() }],
        std::slice::from_ref(profile),
        Cutoff { inner: l / 6.0, outer: l / 3.0 },
    )
}

/// Splits a dual 1-cycle into full straight loops.
pub fn straight_loops(cycle: &CubicalCurrent) -> Result<Vec<StraightLoop>> {
    let g = cycle.grid();
    if cycle.dim() != 1 || !cycle.is_dual() {
        return Err(Error::InvalidCycle("expected a dual 1-current".into()));
    }
    let mut groups: BTreeMap<(usize, usize), Vec<(usize, i64)>> = BTreeMap::new();
    for (cell, &m) in cycle.cells() {
        let a = cell.axis_list()[0];
        let c = g.coords(cell.base);
        let mut x = [c[0] as i64, c[1] as i64, c[2] as i64];
        x[a] = 0;
        groups.entry((a, g.site(&x[..g.n()]))).or_default().push((cell.base, m));
    }
    let mut loops = Vec::new();
    for ((axis, base), cells) in groups {
        let k = cells[0].1;
        if cells.len() != g.dims()[axis] || cells.iter().any(|&(_, m)| m != k) {
            return Err(Error::InvalidCycle(format!(
                "cells along axis {axis} through dual vertex {base} do not form a full loop of constant multiplicity"
            )));
        }
        loops.push(StraightLoop { axis, base, k });
    }
    Ok(loops)
}

/// Recovery pair concentrating on a dual 1-cycle made of straight loops in `T³`.
///
/// The cutoff runs from `λ = ε^{3/4}` to `2λ`, capped at `0.45 ℓ_min`.
pub fn build_recovery_pair(
    background: &Arc<BackgroundConnection>,
    cycle: &CubicalCurrent,
    eps: f64,
) -> Result<PairState> {
    let g = background.grid().clone();
    if g.n() != 3 {
        return Err(Error::InvalidArgument("recovery pairs live on a three-torus".into()));
    }
    if **cycle.grid() != *g {
        return Err(Error::Shape("cycle lives on a different grid".into()));
    }
    if !cycle.is_cycle() {
        return Err(Error::InvalidCycle("current has a boundary".into()));
    }
    let loops = straight_loops(cycle)?;
    let class = pairing_class(cycle)?;
    let expected = [class[2], -class[1], class[0]];
    if g.flux() != expected {
        return Err(Error::SectorMismatch(format!(
            "cycle class {class:?} needs flux {expected:?}, grid has {:?}",
            g.flux()
        )));
    }
    let centers: Vec<[f64; 3]> = loops.iter().map(|lp| cycle.vertex_position(lp.base)).collect();
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            let (a, b) = (loops[i].axis, loops[j].axis);
            let dist = if a == b {
                (0..3)
                    .filter(|&m| m != a)
                    .map(|m| g.wrap_delta(m, centers[i][m] - centers[j][m]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            } else {
                let m = 3 - a - b;
                g.wrap_delta(m, centers[i][m] - centers[j][m]).abs()
            };
            if dist < 6.0 * eps {
                return Err(Error::InvalidCycle(format!(
                    "loops {i} and {j} are {dist:.4} apart, below 6ε = {:.4}",
                    6.0 * eps
                )));
            }
        }
    }
    let lambda = eps.powf(0.75);
    let outer = (2.0 * lambda).min(0.45 * g.min_length());
    let cutoff = Cutoff { inner: lambda.min(0.5 * outer), outer };
    let mut degrees: Vec<i64> = loops.iter().map(|lp| lp.k.abs()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let profiles = degrees
        .iter()
        .map(|&k| VortexProfile::solve(k, DEFAULT_R_MAX, DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()?;
    let vortices: Vec<PlacedVortex> = loops
        .iter()
        .zip(&centers)
        .map(|(lp, &center)| PlacedVortex { center, axis: Some(lp.axis), k: lp.k })
        .collect();
    synthesize(background, eps, &vortices, &profiles, cutoff)
}
