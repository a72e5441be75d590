//! Experiment drivers. Each writes its tables through an [`OutputDir`] and
//! returns the checks it evaluated.

pub mod flatnorm;
pub mod gamma;
pub mod minimize;
pub mod monotonicity;
pub mod vortex;
pub mod width;

use std::sync::Arc;

use ymh_core::currents::CubicalCurrent;
use ymh_core::flow::{FlowParams, Scheme};
use ymh_core::lattice::{make_grid, BackgroundConnection, Grid};
use ymh_core::vortex::{build_recovery_pair, synthesize, Cutoff, PlacedVortex, VortexProfile};
use ymh_core::PairState;

use crate::config::{CycleSpec, ExperimentConfig, LoopSpec};
use crate::error::CliError;
use crate::random;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Wall-clock checks are printed but kept out of `checks.csv`.
    pub timed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into(), timed: false }
    }

    pub fn timed(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { timed: true, ..Check::new(name, passed, detail) }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("check,passed,detail\n");
        for c in self.checks.iter().filter(|c| !c.timed) {
            s.push_str(&format!("{},{},\"{}\"\n", c.name, c.passed, c.detail.replace('"', "'")));
        }
        s
    }
}

pub fn grid_for(cfg: &ExperimentConfig, eps: f64) -> Result<(Arc<Grid>, Arc<BackgroundConnection>), CliError> {
    Ok(make_grid(cfg.grid.n, &cfg.dims_for(eps), &cfg.grid.lengths, &cfg.grid.flux)?)
}

pub fn flow_params(cfg: &ExperimentConfig, grid: &Grid, eps: f64) -> FlowParams {
    let dt = cfg.flow.dt.unwrap_or(match cfg.flow.scheme {
        Scheme::Imex => 0.5 * eps * eps,
        Scheme::Explicit => FlowParams::explicit_guard(grid.min_spacing(), eps),
    });
    let mut p = FlowParams::new(dt, cfg.flow.t_end, cfg.flow.scheme);
    p.gauge_mode = cfg.flow.gauge;
    p.stationarity_tol = cfg.flow.stationarity_tol;
    p.monitor_stride = cfg.flow.monitor_stride;
    p.clamp_to_unit_disk = cfg.flow.clamp;
    p
}

/// Homology class `(c_0, c_1, c_2)` of `T³` dual to the flux `(m_01, m_02, m_12)`.
pub fn class_of_flux(flux: &[i64]) -> [i64; 3] {
    [flux[2], -flux[1], flux[0]]
}

/// Dual 1-cycle of straight loops described by `cycle.loops`.
pub fn cycle_for(cfg: &ExperimentConfig, grid: &Arc<Grid>) -> CubicalCurrent {
    let loops = match &cfg.cycle {
        CycleSpec::Loops(l) => l.clone(),
        CycleSpec::Auto => {
            let c = class_of_flux(&grid.flux()[..]);
            let count = c.iter().filter(|&&x| x != 0).count();
            // Loops on different axes sit half a period apart along the third axis.
            let spread = [[0.25, 0.25], [0.25, 0.75], [0.75, 0.75]];
            (0..3)
                .filter(|&a| c[a] != 0)
                .map(|a| LoopSpec { axis: a, at: if count == 1 { [0.5, 0.5] } else { spread[a] }, k: c[a] })
                .collect()
        }
    };
    let mut cycle = CubicalCurrent::zero(grid, 1, true);
    for lp in loops {
        let mut x = [0i64; 3];
        let others: Vec<usize> = (0..3).filter(|&b| b != lp.axis).collect();
        for (i, &b) in others.iter().enumerate() {
            x[b] = (lp.at[i] * grid.dims()[b] as f64).floor() as i64;
        }
        let start = grid.site(&x);
        cycle = cycle
            .add_scaled(1, &CubicalCurrent::axis_loop(grid, lp.axis, start, lp.k, true))
            .expect("same grid");
    }
    cycle
}

/// Euclidean length of the shortest closed geodesic in the class of `cycle`.
pub fn geodesic_length(cycle: &CubicalCurrent) -> Result<f64, CliError> {
    let g = cycle.grid();
    let class = ymh_core::currents::homology_class(cycle)?;
    Ok(class.iter().zip(g.lengths()).map(|(&c, &l)| (c as f64 * l).powi(2)).sum::<f64>().sqrt())
}

/// Planar center of the configured vortex, nudged off the grid lines.
pub fn planar_center(cfg: &ExperimentConfig, grid: &Grid) -> [f64; 2] {
    let h = grid.spacing();
    [
        cfg.vortex.center[0] * grid.lengths()[0] + 0.3 * h[0],
        cfg.vortex.center[1] * grid.lengths()[1] + 0.4 * h[1],
    ]
}

/// Initial data for minimization and monotonicity runs.
///
/// On `T²` with flux `k ≠ 0`: `|k|` unit vortices of sign `k` synthesized at
/// `min(seed_scale · ε, seed_cap)` and then read at ε. Flux zero gives a random
/// smooth pair when `perturb` is set and the vacuum otherwise. On `T³`: the
/// recovery pair of the configured cycle.
pub fn seed_pair(
    cfg: &ExperimentConfig,
    bg: &Arc<BackgroundConnection>,
    eps: f64,
    perturb: bool,
) -> Result<PairState, CliError> {
    let g = bg.grid().clone();
    let empty = if g.n() == 2 { g.flux().iter().all(|&m| m == 0) } else { cycle_for(cfg, &g).is_zero() };
    if empty {
        if perturb {
            let mut r = random::rng(cfg.seed);
            return Ok(random::smooth_pair(&mut r, bg, eps));
        }
        return Ok(PairState::vacuum(bg, eps)?);
    }
    if g.n() == 3 {
        return Ok(build_recovery_pair(bg, &cycle_for(cfg, &g), eps)?);
    }
    let k = g.flux()[0];
    let profile = VortexProfile::solve_with_step(k.signum(), cfg.vortex.r_max, cfg.vortex.tol, cfg.vortex.step)?;
    let c = planar_center(cfg, &g);
    let l = g.min_length();
    let count = k.unsigned_abs() as usize;
    let vortices: Vec<PlacedVortex> = (0..count)
        .map(|i| {
            let t = i as f64 / count as f64;
            let center = [c[0] + t * g.lengths()[0], c[1] + t * g.lengths()[1], 0.0];
            PlacedVortex { center, axis: None, k: k.signum() }
        })
        .collect();
    let scale = (cfg.vortex.seed_scale * eps).min(cfg.vortex.seed_cap);
    let cutoff = Cutoff { inner: l / (6.0 * count as f64), outer: l / (3.0 * count as f64) };
    let seed = synthesize(bg, scale, &vortices, std::slice::from_ref(&profile), cutoff)?;
    Ok(seed.with_eps(eps)?)
}
