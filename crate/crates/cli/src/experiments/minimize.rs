//! Gradient-flow minimization in a flux sector, one run per ε.

use std::f64::consts::PI;

use ymh_core::currents::{extract_jacobian_current, homology_class};
use ymh_core::flow::{run_observed, StopReason};
use ymh_core::snapshot::write_snapshot;

use super::{class_of_flux, cycle_for, flow_params, geodesic_length, grid_for, seed_pair, Check, Report};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::OutputDir;

/// One monitor sample of the liminf ledger.
#[derive(Debug, Clone, Copy)]
pub struct LiminfRow {
    pub t: f64,
    pub energy: f64,
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeRow {
    pub eps: f64,
    pub dims: Vec<usize>,
    pub h_max: f64,
    pub energy: f64,
    /// Known minimal mass: `|k|` on `T²`, the geodesic length of the class on `T³`.
    pub target: f64,
    pub stationary: bool,
    pub t_final: f64,
    pub class: Vec<i64>,
    pub expected_class: Vec<i64>,
    pub mass: f64,
    pub is_cycle: bool,
    pub liminf: Vec<LiminfRow>,
}

impl MinimizeRow {
    pub fn ratio(&self) -> f64 {
        self.energy / (2.0 * PI)
    }

    /// Rows violating `2π M ≤ E + c·h`.
    pub fn liminf_violations(&self, c: f64) -> usize {
        self.liminf
            .iter()
            .filter(|r| 2.0 * PI * r.mass > r.energy + c * self.h_max)
            .count()
    }
}

/// Runs the flow at one coupling.
pub fn minimize_one(cfg: &ExperimentConfig, eps: f64, out: Option<(&mut OutputDir, usize)>) -> Result<MinimizeRow, CliError> {
    let (g, bg) = grid_for(cfg, eps)?;
    let seed = seed_pair(cfg, &bg, eps, true)?;
    let params = flow_params(cfg, &g, eps);
    let mut liminf = Vec::new();
    let mut failure = None;
    let traj = run_observed(&seed, &params, |s, state| match extract_jacobian_current(state, 0.5) {
        Ok(j) => liminf.push(LiminfRow { t: s.t, energy: s.total, mass: j.current.mass() }),
        Err(e) => failure = Some(e),
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let fin = &traj.final_state;
    let current = extract_jacobian_current(fin, 0.5)?.current;
    let is_cycle = current.is_cycle();
    let class = if is_cycle { homology_class(&current)? } else { Vec::new() };
    let (expected_class, target) = if g.n() == 2 {
        (vec![g.flux()[0]], g.flux()[0].unsigned_abs() as f64)
    } else {
        let cycle = cycle_for(cfg, &g);
        (class_of_flux(g.flux()).to_vec(), if cycle.is_zero() { 0.0 } else { geodesic_length(&cycle)? })
    };
    if let Some((out, i)) = out {
        out.write_with(&format!("trajectory_eps{i}.csv"), |w| traj.write_csv(w))?;
        let mut snap = Vec::new();
        write_snapshot(fin, &mut snap)?;
        out.write(&format!("snapshot_eps{i}.ymh"), &snap)?;
        out.write_with(&format!("current_eps{i}.csv"), |w| current.write_csv(w))?;
        let mut rows = String::from("t,E,twoPiMass\n");
        for r in &liminf {
            rows.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", r.t, r.energy, 2.0 * PI * r.mass));
        }
        out.write(&format!("liminf_eps{i}.csv"), rows.as_bytes())?;
    }
    Ok(MinimizeRow {
        eps,
        dims: g.dims().to_vec(),
        h_max: g.spacing().iter().cloned().fold(0.0, f64::max),
        energy: traj.final_energy(),
        target,
        stationary: traj.stop == StopReason::Stationary,
        t_final: traj.samples.last().map(|s| s.t).unwrap_or(0.0),
        class,
        expected_class,
        mass: current.mass(),
        is_cycle,
        liminf,
    })
}

/// Whether `|E/2π − target|` never grows by more than `noise` along the sweep.
pub fn trending(rows: &[MinimizeRow], noise: f64) -> bool {
    rows.windows(2)
        .all(|w| (w[1].ratio() - w[1].target).abs() <= (w[0].ratio() - w[0].target).abs() + noise)
}

pub fn check_rows(cfg: &ExperimentConfig, rows: &[MinimizeRow], report: &mut Report) {
    let tol = if cfg.grid.n == 2 { cfg.tol.minimize_t2 } else { cfg.tol.minimize_t3 };
    for r in rows {
        report.push(Check::new(
            format!("stationary eps={}", r.eps),
            r.stationary,
            format!("stopped at t = {}", r.t_final),
        ));
        report.push(Check::new(
            format!("class eps={}", r.eps),
            r.is_cycle && r.class == r.expected_class,
            format!("class {:?}, expected {:?}, cycle {}", r.class, r.expected_class, r.is_cycle),
        ));
        report.push(Check::new(
            format!("liminf eps={}", r.eps),
            r.liminf_violations(cfg.tol.liminf_h) == 0,
            format!("{} of {} samples violate 2πM ≤ E + {}h", r.liminf_violations(cfg.tol.liminf_h), r.liminf.len(), cfg.tol.liminf_h),
        ));
    }
    if let Some(last) = rows.last() {
        let ok = if last.target > 0.0 {
            (last.ratio() / last.target - 1.0).abs() <= tol
        } else {
            last.ratio() <= tol
        };
        report.push(Check::new(
            "energy at finest eps",
            ok,
            format!("E/2π = {:.6}, target {}", last.ratio(), last.target),
        ));
        if cfg.grid.n == 2 {
            report.push(Check::new(
                "extracted mass",
                last.mass == last.target,
                format!("mass {} vs {}", last.mass, last.target),
            ));
        }
    }
    report.push(Check::new("monotone trend", trending(rows, cfg.tol.trend_noise), "|E/2π − target| along the ε sweep"));
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(Vec<MinimizeRow>, Report), CliError> {
    let mut rows = Vec::new();
    for (i, &eps) in cfg.eps.iter().enumerate() {
        rows.push(minimize_one(cfg, eps, Some((out, i)))?);
    }
    let mut summary = String::from("eps,dims,E,EOver2Pi,target,stationary,tFinal,class,mass\n");
    for r in &rows {
        summary.push_str(&format!(
            "{},{},{:.17e},{:.17e},{},{},{},{},{}\n",
            r.eps,
            r.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"),
            r.energy,
            r.ratio(),
            r.target,
            r.stationary,
            r.t_final,
            r.class.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "),
            r.mass
        ));
    }
    out.write("summary.csv", summary.as_bytes())?;
    let mut report = Report::default();
    check_rows(cfg, &rows, &mut report);
    Ok((rows, report))
}
