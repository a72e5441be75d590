//! Sweep-out of the trivial sector of `T²` by a vortex–antivortex pair and the
//! width inequality `max E ≥ 2π Ŵ − tol`.
//!
//! The antivortex stays at `x0` while the vortex travels along the straight
//! segment from `x0` to `x0 + (c_0 ℓ_0, c_1 ℓ_1)`. The family starts at the
//! vacuum and ends at its winding-`c` gauge.

use std::f64::consts::PI;

use ymh_core::currents::{almgren_class, extract_jacobian_current, width_bruteforce, DiscreteFamily, WidthBracket};
use ymh_core::flow::{run, FlowParams, Scheme};
use ymh_core::functional::energy;
use ymh_core::lattice::{gauge_transform, make_grid, Gauge};
use ymh_core::vortex::{synthesize, Cutoff, PlacedVortex, VortexProfile};
use ymh_core::PairState;

use super::{Check, Report};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Debug, Clone)]
pub struct WidthOutcome {
    pub class: Vec<i64>,
    pub family_class: Vec<i64>,
    /// `(parameter, raw energy, tightened energy, current mass)` per member.
    pub members: Vec<(f64, f64, f64, f64)>,
    pub max_energy: f64,
    pub bracket: WidthBracket,
}

impl WidthOutcome {
    /// `max E − 2π Ŵ_lower`.
    pub fn slack(&self) -> f64 {
        self.max_energy - 2.0 * PI * self.bracket.lower
    }
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<WidthOutcome, CliError> {
    let w = &cfg.width;
    let n = w.sweep_dims;
    let (g, bg) = make_grid(2, &[n, n], &[1.0, 1.0], &[0])?;
    let eps = w.eps;
    let class = w.class.clone();
    let side = 3usize.pow(w.level) + 1;
    let h = g.spacing()[0];
    let x0 = [0.25 + 0.3 * h, 0.5 + 0.4 * h];
    let profile = VortexProfile::solve_with_step(1, cfg.vortex.r_max, cfg.vortex.tol, cfg.vortex.step)?;
    let cutoff = Cutoff { inner: 1.0 / 6.0, outer: 1.0 / 3.0 };
    let vacuum = PairState::vacuum(&bg, eps)?;
    let trivial = class.iter().all(|&c| c == 0);
    let mut pairs = Vec::with_capacity(side);
    let mut params = FlowParams::new(0.5 * eps * eps, w.tighten, Scheme::Imex);
    params.stationarity_tol = Some(0.0);
    for i in 0..side {
        let s = i as f64 / (side - 1) as f64;
        let travelled = [s * class[0] as f64, s * class[1] as f64];
        let p = [x0[0] + travelled[0], x0[1] + travelled[1]];
        let gap = g.distance(&p, &x0);
        let pair = if trivial {
            vacuum.clone()
        } else if gap < 0.5 * h {
            let wind: Vec<i64> = travelled.iter().map(|t| t.round() as i64).collect();
            gauge_transform(&vacuum, &Gauge::winding(&g, &wind))?
        } else {
            let vortices = [
                PlacedVortex { center: [p[0], p[1], 0.0], axis: None, k: 1 },
                PlacedVortex { center: [x0[0], x0[1], 0.0], axis: None, k: -1 },
            ];
            synthesize(&bg, eps, &vortices, std::slice::from_ref(&profile), cutoff)?
        };
        pairs.push(pair);
    }
    let mut members = Vec::with_capacity(side);
    let mut currents = Vec::with_capacity(side);
    for (i, pair) in pairs.iter().enumerate() {
        let raw = energy(pair).total;
        let tight = if i == 0 || i == side - 1 || trivial {
            raw
        } else {
            run(pair, &params)?.final_energy()
        };
        let current = extract_jacobian_current(pair, 0.5)?.current;
        members.push((i as f64 / (side - 1) as f64, raw, tight, current.mass()));
        currents.push(current);
    }
    let family = DiscreteFamily::new(1, w.level, currents)?;
    let family_class = almgren_class(&family)?;
    let (wg, _) = make_grid(2, &[w.grid, w.grid], &[1.0, 1.0], &[0])?;
    let bracket = width_bruteforce(&class, &wg, w.mass_cap, w.state_cap)?;
    let max_energy = members.iter().map(|m| m.2).fold(0.0, f64::max);
    Ok(WidthOutcome { class, family_class, members, max_energy, bracket })
}

pub fn run_experiment(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let o = sweep(cfg)?;
    let mut csv = String::from("s,E,Etightened,currentMass\n");
    for m in &o.members {
        csv.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", m.0, m.1, m.2, m.3));
    }
    out.write("family.csv", csv.as_bytes())?;
    let upper = o.bracket.upper.map_or_else(|| "none".to_string(), |u| u.to_string());
    let summary = format!(
        "class,familyClass,maxE,WLower,WUpper,capped,twoPiWLower,slack\n\"{:?}\",\"{:?}\",{:.17e},{},{},{},{:.17e},{:.17e}\n",
        o.class,
        o.family_class,
        o.max_energy,
        o.bracket.lower,
        upper,
        o.bracket.capped,
        2.0 * PI * o.bracket.lower,
        o.slack()
    );
    out.write("width.csv", summary.as_bytes())?;
    let mut report = Report::default();
    report.push(Check::new("family class", o.family_class == o.class, format!("{:?} vs {:?}", o.family_class, o.class)));
    let bound = 2.0 * PI * o.bracket.lower * (1.0 - cfg.tol.width);
    report.push(Check::new(
        "width inequality",
        o.max_energy >= bound,
        format!("max E = {:.6} vs 2πŴ = {:.6} (Ŵ ∈ [{}, {upper}])", o.max_energy, 2.0 * PI * o.bracket.lower, o.bracket.lower),
    ));
    Ok(report)
}
