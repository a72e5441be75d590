//! Vortex profiles, their quantization defects, and the discrepancy of
//! synthesized planar vortices under refinement.

use std::f64::consts::PI;
use std::time::Instant;

use ymh_core::flow::discrepancy;
use ymh_core::functional::energy;
use ymh_core::lattice::make_grid;
use ymh_core::vortex::{synthesize_planar, VortexProfile};

use super::{Check, Report};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub k: i64,
    pub energy: f64,
    pub defect: f64,
    pub bogomolny: f64,
    pub shooting: f64,
    pub seconds: f64,
}

pub fn profile_row(cfg: &ExperimentConfig, k: i64) -> Result<(VortexProfile, ProfileRow), CliError> {
    let start = Instant::now();
    let p = VortexProfile::solve_with_step(k, cfg.vortex.r_max, cfg.vortex.tol, cfg.vortex.step)?;
    let e = p.energy();
    let seconds = start.elapsed().as_secs_f64();
    let row = ProfileRow {
        k,
        energy: e.value,
        defect: e.defect,
        bogomolny: p.bogomolny_residual(),
        shooting: p.shooting_coefficient(),
        seconds,
    };
    Ok((p, row))
}

#[derive(Debug, Clone)]
pub struct PlanarRow {
    pub dims: usize,
    pub energy: f64,
    pub max_xi: f64,
}

/// Degree-one vortex at `eps` on the square torus of side `length`, synthesized on each grid.
pub fn planar_series(profile: &VortexProfile, eps: f64, length: f64, dims: &[usize]) -> Result<Vec<PlanarRow>, CliError> {
    dims.iter()
        .map(|&n| {
            let (g, bg) = make_grid(2, &[n, n], &[length, length], &[profile.k()])?;
            let h = g.spacing()[0];
            let c = [0.5 * length + 0.3 * h, 0.5 * length + 0.4 * h];
            let pair = synthesize_planar(profile, eps, &bg, c)?;
            Ok(PlanarRow { dims: n, energy: energy(&pair).total, max_xi: discrepancy(&pair).max_abs() })
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let mut report = Report::default();
    let mut csv = String::from("k,E,twoPiK,defect,bogomolnyResidual,shootingCoefficient\n");
    let mut unit = None;
    for &k in &cfg.vortex.k {
        let (p, row) = profile_row(cfg, k)?;
        out.write_with(&format!("profile_k{k}.csv"), |w| p.write_csv(w))?;
        csv.push_str(&format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            k,
            row.energy,
            2.0 * PI * k.abs() as f64,
            row.defect,
            row.bogomolny,
            row.shooting
        ));
        report.push(Check::new(
            format!("quantization k={k}"),
            row.defect.abs() <= cfg.tol.vortex_defect,
            format!("E = {:.9}, defect {:.3e}", row.energy, row.defect),
        ));
        report.push(Check::new(
            format!("bogomolny k={k}"),
            row.bogomolny <= cfg.tol.bogomolny,
            format!("residual {:.3e}", row.bogomolny),
        ));
        report.push(Check::timed(
            format!("runtime k={k}"),
            row.seconds < cfg.tol.vortex_seconds,
            format!("{:.3} s", row.seconds),
        ));
        if k == 1 {
            unit = Some(p);
        }
    }
    out.write("quantization.csv", csv.as_bytes())?;
    if let (Some(p), 2) = (unit, cfg.grid.n) {
        let n = cfg.grid.dims[0];
        let eps = *cfg.eps.last().expect("validated");
        let rows = planar_series(&p, eps, cfg.grid.lengths[0], &[n, 2 * n])?;
        let mut csv = String::from("N,E,EOver2Pi,maxAbsXi\n");
        for r in &rows {
            csv.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", r.dims, r.energy, r.energy / (2.0 * PI), r.max_xi));
        }
        out.write("planar.csv", csv.as_bytes())?;
        let ratio = rows[0].max_xi / rows[1].max_xi;
        report.push(Check::new(
            "discrepancy refinement",
            ratio >= cfg.tol.xi_ratio,
            format!("max|ξ| {:.4e} → {:.4e}, ratio {ratio:.3}", rows[0].max_xi, rows[1].max_xi),
        ));
    }
    Ok(report)
}
