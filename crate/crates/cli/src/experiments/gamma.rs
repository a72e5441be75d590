//! Recovery and liminf ledgers.

use std::f64::consts::PI;

use ymh_core::currents::extract_jacobian_current;
use ymh_core::functional::energy;
use ymh_core::vortex::build_recovery_pair;

use super::{cycle_for, geodesic_length, grid_for, minimize, Check, Report};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Debug, Clone)]
pub struct RecoveryRow {
    pub eps: f64,
    pub dims: Vec<usize>,
    pub energy: f64,
    /// `2π · M(cycle)` with the Euclidean length of the loops.
    pub limit: f64,
    pub exact: bool,
}

impl RecoveryRow {
    pub fn ratio(&self) -> f64 {
        if self.limit > 0.0 {
            self.energy / self.limit
        } else {
            f64::NAN
        }
    }
}

pub fn recovery_one(cfg: &ExperimentConfig, eps: f64) -> Result<RecoveryRow, CliError> {
    let (g, bg) = grid_for(cfg, eps)?;
    let cycle = cycle_for(cfg, &g);
    let pair = build_recovery_pair(&bg, &cycle, eps)?;
    let e = energy(&pair).total;
    let extracted = extract_jacobian_current(&pair, 0.5)?.current;
    let limit = if cycle.is_zero() { 0.0 } else { 2.0 * PI * geodesic_length(&cycle)? };
    Ok(RecoveryRow { eps, dims: g.dims().to_vec(), energy: e, limit, exact: extracted == cycle })
}

pub fn recovery_ledger(cfg: &ExperimentConfig) -> Result<Vec<RecoveryRow>, CliError> {
    cfg.eps.iter().map(|&e| recovery_one(cfg, e)).collect()
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let mut report = Report::default();
    let mut csv = String::from("eps,dims,E,twoPiMass,ratio,exact\n");
    let recovery = if cfg.grid.n == 3 { recovery_ledger(cfg)? } else { Vec::new() };
    for r in &recovery {
        csv.push_str(&format!(
            "{},{},{:.17e},{:.17e},{:.17e},{}\n",
            r.eps,
            r.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"),
            r.energy,
            r.limit,
            r.ratio(),
            r.exact
        ));
        report.push(Check::new(format!("recovery exact eps={}", r.eps), r.exact, "extracted current equals the cycle"));
    }
    for (i, r) in recovery.iter().enumerate() {
        let tol = if i + 1 == recovery.len() { cfg.tol.recovery_fine } else { cfg.tol.recovery_coarse };
        let ok = if r.limit > 0.0 { (r.ratio() - 1.0).abs() <= tol } else { r.energy.abs() <= tol };
        report.push(Check::new(
            format!("recovery energy eps={}", r.eps),
            ok,
            format!("E = {:.6}, 2πM = {:.6}, tolerance {tol}", r.energy, r.limit),
        ));
    }
    out.write("recovery.csv", csv.as_bytes())?;

    let mut liminf = String::from("eps,t,E,twoPiMass,bound\n");
    let mut violations = 0;
    let mut rows = 0;
    for &eps in &cfg.eps {
        let r = minimize::minimize_one(cfg, eps, None)?;
        for s in &r.liminf {
            let bound = s.energy + cfg.tol.liminf_h * r.h_max;
            liminf.push_str(&format!("{},{:.17e},{:.17e},{:.17e},{:.17e}\n", eps, s.t, s.energy, 2.0 * PI * s.mass, bound));
        }
        violations += r.liminf_violations(cfg.tol.liminf_h);
        rows += r.liminf.len();
    }
    out.write("liminf.csv", liminf.as_bytes())?;
    report.push(Check::new("liminf ledger", violations == 0, format!("{violations} of {rows} rows violate 2πM ≤ E + {}h", cfg.tol.liminf_h)));
    Ok(report)
}
