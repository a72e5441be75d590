//! Backward heat kernel monotonicity on `T²` and density ratios at a fixed
//! time on `T³`.

use ymh_core::flow::{density_ratio, monotonicity_profile, run, DensityRatio, MonotonicityProfile};

use super::{cycle_for, flow_params, grid_for, planar_center, seed_pair, Check, Report};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::OutputDir;

/// Ψ profile of the vortex flow at one ε, centered at the seed vortex.
pub fn psi_profile(cfg: &ExperimentConfig, eps: f64) -> Result<MonotonicityProfile, CliError> {
    let (g, bg) = grid_for(cfg, eps)?;
    let seed = seed_pair(cfg, &bg, eps, false)?;
    let mut params = flow_params(cfg, &g, eps);
    params.t_end = cfg.mono.big_t;
    params.stationarity_tol = Some(0.0);
    params.record_density = true;
    let traj = run(&seed, &params)?;
    let x0 = planar_center(cfg, &g);
    Ok(monotonicity_profile(&traj, cfg.mono.big_t, &x0, cfg.mono.c2)?)
}

/// Density-ratio table at `mono.density_time`, centered on the first loop of the cycle.
pub fn density_table(cfg: &ExperimentConfig, eps: f64) -> Result<(DensityRatio, bool), CliError> {
    let (g, bg) = grid_for(cfg, eps)?;
    let seed = seed_pair(cfg, &bg, eps, false)?;
    let mut params = flow_params(cfg, &g, eps);
    params.t_end = cfg.mono.density_time;
    let traj = run(&seed, &params)?;
    let cycle = cycle_for(cfg, &g);
    let x0 = match cycle.cells().keys().next() {
        Some(cell) => cycle.vertex_position(cell.base),
        None => [0.0; 3],
    };
    let stationary = traj.stop == ymh_core::flow::StopReason::Stationary;
    Ok((density_ratio(&traj.final_state, &x0), stationary))
}

pub fn run_experiment(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let mut report = Report::default();
    for (i, &eps) in cfg.eps.iter().enumerate() {
        if cfg.grid.n == 2 {
            let prof = psi_profile(cfg, eps)?;
            let mut csv = String::from("t,phi,psi\n");
            for p in &prof.points {
                csv.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", p.t, p.phi, p.psi));
            }
            out.write(&format!("psi_eps{i}.csv"), csv.as_bytes())?;
            report.push(Check::new(
                format!("psi ratio eps={eps}"),
                prof.ratio <= cfg.tol.psi_ratio,
                format!("max Ψ(t)/(Ψ(T−1)+1) = {:.6}", prof.ratio),
            ));
        } else {
            let (table, stationary) = density_table(cfg, eps)?;
            let mut csv = String::from("r,ratio\n");
            for (r, v) in &table.table {
                csv.push_str(&format!("{:.17e},{:.17e}\n", r, v));
            }
            out.write(&format!("density_eps{i}.csv"), csv.as_bytes())?;
            report.push(Check::new(
                format!("density ratio eps={eps}"),
                table.max <= cfg.tol.density_ratio,
                format!("max over r ∈ [ε, 1] = {:.6}{}", table.max, if stationary { " (stationary before t)" } else { "" }),
            ));
        }
    }
    Ok(report)
}
