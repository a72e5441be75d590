//! Gradient flow of `E_ε` and its diagnostics.
//!
//! The flow is the gradient of `½E_ε` for the metric `∫ |u̇|² + ε²|α̇|²`:
//!
//! `u̇ = −(D*Du − (1 − |u|²)u/(2ε²))`, `α̇ = −d*ω + ε⁻²⟨Du, iu⟩`.
//!
//! Two schemes are available. `Explicit` is forward Euler. `Imex` solves the
//! stiff linear parts implicitly: the section update uses the background
//! covariant Laplacian plus a stabilizing shift `1/ε²`, the one-form update uses
//! the lattice Laplacian plus the same shift, and all couplings and
//! nonlinearities stay explicit.
//!
//! In Coulomb mode the state is kept co-closed: the one-form velocity is
//! projected by `P` and the section is rotated by `e^{i dt Qα̇}`, which differs
//! from the direct step by a gauge transformation.

mod diagnostics;
mod imex;

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::functional::{el_residual_from, energy, residual_norm, LinkData, PairState};
use crate::hodge::{coulomb_project, q_operator};
use crate::lattice::{d, FormField, ScalarField};
use crate::reduce::tree_sum_by;
use crate::{Error, Result};

pub use diagnostics::{
    density_ratio, discrepancy, heat_kernel, monotonicity_profile, zeta, DensityRatio,
    MonotonicityPoint, MonotonicityProfile,
};
use imex::Imex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    Imex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeMode {
    Direct,
    Coulomb,
}

#[derive(Debug, Clone)]
pub struct FlowParams {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub gauge_mode: GaugeMode,
    /// Early stop when the residual norm drops below this value. `None` uses
    /// `1e-6 · sqrt(E)` evaluated at each monitor sample; a non-positive value
    /// disables the stop.
    pub stationarity_tol: Option<f64>,
    pub monitor_stride: usize,
    /// Radially project `u` onto the closed unit disk after each step.
    pub clamp_to_unit_disk: bool,
    /// Keep the energy density of every sample (needed for monotonicity profiles).
    pub record_density: bool,
    /// Times at which the state is stored in the trajectory.
    pub snapshot_times: Vec<f64>,
}

impl FlowParams {
    pub fn new(dt: f64, t_end: f64, scheme: Scheme) -> Self {
        FlowParams {
            dt,
            t_end,
            scheme,
            gauge_mode: GaugeMode::Direct,
            stationarity_tol: None,
            monitor_stride: 10,
            clamp_to_unit_disk: false,
            record_density: false,
            snapshot_times: Vec::new(),
        }
    }

    /// Largest time step accepted by the explicit scheme, `0.2 h_min² min(1, ε²)`.
    pub fn explicit_guard(h_min: f64, eps: f64) -> f64 {
        0.2 * h_min * h_min * f64::min(1.0, eps * eps)
    }

    pub fn validate(&self, pair: &PairState) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidArgument(format!("tEnd = {} is negative", self.t_end)));
        }
        if self.monitor_stride == 0 {
            return Err(Error::InvalidArgument("monitor stride must be at least 1".into()));
        }
        if self.scheme == Scheme::Explicit {
            let limit = Self::explicit_guard(pair.grid().min_spacing(), pair.eps);
            if self.dt > limit * (1.0 + 1e-12) {
                return Err(Error::Stability { dt: self.dt, limit });
            }
        }
        Ok(())
    }
}

struct Stepper {
    scheme: Scheme,
    mode: GaugeMode,
    dt: f64,
    clamp: bool,
    imex: Option<Imex>,
}

struct StepInfo {
    /// `V (Σ|u̇|² + ε² Σ α̇²)` for the direct-mode velocity of this step.
    rate: f64,
    raw_max_abs_u: f64,
}

impl Stepper {
    fn new(pair: &PairState, params: &FlowParams) -> Self {
        let imex = match params.scheme {
            Scheme::Imex => Some(Imex::new(pair.grid(), params.dt, pair.eps)),
            Scheme::Explicit => None,
        };
        Stepper {
            scheme: params.scheme,
            mode: params.gauge_mode,
            dt: params.dt,
            clamp: params.clamp_to_unit_disk,
            imex,
        }
    }

    fn advance(&self, pair: &PairState) -> Result<(PairState, StepInfo)> {
        let g = pair.grid().clone();
        let links = LinkData::new(pair);
        let (el_u, el_a) = el_residual_from(pair, &links);
        let e2 = pair.eps * pair.eps;
        let mut vu: Vec<Complex64> = el_u.values().par_iter().map(|z| -z).collect();
        let mut va: Vec<f64> = el_a.values().par_iter().map(|x| -x / e2).collect();
        if let Some(im) = &self.imex {
            im.solve_u(&g, &mut vu);
            im.solve_alpha(&g, &mut va);
        }
        debug_assert_eq!(self.scheme == Scheme::Imex, self.imex.is_some());
        let rate = g.cell_volume()
            * (tree_sum_by(vu.len(), |i| vu[i].norm_sqr()) + e2 * tree_sum_by(va.len(), |i| va[i] * va[i]));
        let dt = self.dt;
        let u = pair.u.values();
        let a = pair.alpha.values();
        let (mut new_u, new_a): (Vec<Complex64>, Vec<f64>) = match self.mode {
            GaugeMode::Direct => (
                (0..u.len()).into_par_iter().map(|s| u[s] + vu[s] * dt).collect(),
                (0..a.len()).into_par_iter().map(|l| a[l] + va[l] * dt).collect(),
            ),
            GaugeMode::Coulomb => {
                let vel = FormField::from_values(&g, 1, va)?;
                let theta_dot = q_operator(&vel)?;
                let dq = d(&theta_dot)?;
                let (tq, dqv, vv) = (theta_dot.values(), dq.values(), vel.values());
                (
                    (0..u.len())
                        .into_par_iter()
                        .map(|s| Complex64::from_polar(1.0, dt * tq[s]) * (u[s] + vu[s] * dt))
                        .collect(),
                    (0..a.len()).into_par_iter().map(|l| a[l] + dt * (vv[l] + dqv[l])).collect(),
                )
            }
        };
        let raw_max_abs_u = new_u.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        if self.clamp && raw_max_abs_u > 1.0 {
            new_u.par_iter_mut().for_each(|z| {
                let r = z.norm();
                if r > 1.0 {
                    *z /= r;
                }
            });
        }
        let state = PairState::new(
            ScalarField::from_values(&g, new_u)?,
            FormField::from_values(&g, 1, new_a)?,
            pair.background().clone(),
            pair.eps,
        )?;
        Ok((
            state,
            StepInfo {
                rate,
                raw_max_abs_u,
            },
        ))
    }
}

fn is_finite_pair(p: &PairState) -> bool {
    p.u.values().iter().all(|z| z.re.is_finite() && z.im.is_finite())
        && p.alpha.values().iter().all(|x| x.is_finite())
}

/// One time step.
pub fn step(pair: &PairState, params: &FlowParams) -> Result<PairState> {
    params.validate(pair)?;
    let (next, _) = Stepper::new(pair, params).advance(pair)?;
    if !is_finite_pair(&next) {
        return Err(Error::NonFinite { step: 1 });
    }
    Ok(next)
}

/// Monitor row of a trajectory.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub step: usize,
    pub total: f64,
    pub gradient_part: f64,
    pub curvature_part: f64,
    pub potential_part: f64,
    pub max_density: f64,
    pub max_abs_u: f64,
    /// Accumulated `2 ∫∫ |u̇|² + ε²|α̇|²`.
    pub dissipated: f64,
    /// `(E(0) − E(t) − dissipated) / (E(0) − E(t))`; zero while the energy has not moved.
    pub dissipation_residual: f64,
    pub max_xi_plus: f64,
    pub residual_norm: f64,
    pub density: Option<FormField>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EndTime,
    Stationary,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<(f64, PairState)>,
    pub final_state: PairState,
    pub stop: StopReason,
    pub dt: f64,
    pub monitor_stride: usize,
    pub eps: f64,
    /// Largest `|u|` produced by a step before any clamping.
    pub max_raw_abs_u: f64,
    /// Largest increase of the energy between consecutive samples.
    pub max_energy_increase: f64,
}

impl Trajectory {
    pub const CSV_HEADER: &'static str = "t,E,gradientPart,curvaturePart,potentialPart,dissipationResidual,maxXiPlus,maxAbsU,maxDensity";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                s.t,
                s.total,
                s.gradient_part,
                s.curvature_part,
                s.potential_part,
                s.dissipation_residual,
                s.max_xi_plus,
                s.max_abs_u,
                s.max_density
            )?;
        }
        Ok(())
    }

    pub fn initial_energy(&self) -> f64 {
        self.samples[0].total
    }

    pub fn final_energy(&self) -> f64 {
        self.samples.last().map(|s| s.total).unwrap_or(f64::NAN)
    }
}

fn sample(pair: &PairState, t: f64, step: usize, e0: f64, dissipated: f64, keep_density: bool) -> Sample {
    let rep = energy(pair);
    let el = crate::functional::el_residual(pair);
    let xi = discrepancy(pair);
    let drop = e0 - rep.total;
    let dissipation_residual = if drop.abs() > 1e-14 * e0.abs().max(1e-300) && drop != 0.0 {
        (drop - dissipated) / drop
    } else {
        0.0
    };
    Sample {
        t,
        step,
        total: rep.total,
        gradient_part: rep.gradient_part,
        curvature_part: rep.curvature_part,
        potential_part: rep.potential_part,
        max_density: rep.max_density,
        max_abs_u: rep.max_abs_u,
        dissipated,
        dissipation_residual,
        max_xi_plus: xi.values().iter().cloned().fold(0.0, f64::max),
        residual_norm: residual_norm(pair, &el),
        density: if keep_density { Some(rep.density) } else { None },
    }
}

/// Integrates to `t_end` or until stationary.
pub fn run(pair: &PairState, params: &FlowParams) -> Result<Trajectory> {
    run_observed(pair, params, |_, _| {})
}

/// As [`run`], calling `observer` at every monitor sample.
pub fn run_observed(
    pair: &PairState,
    params: &FlowParams,
    mut observer: impl FnMut(&Sample, &PairState),
) -> Result<Trajectory> {
    params.validate(pair)?;
    let mut state = match params.gauge_mode {
        GaugeMode::Direct => pair.clone(),
        GaugeMode::Coulomb => coulomb_project(pair)?,
    };
    let stepper = Stepper::new(&state, params);
    let nsteps = (params.t_end / params.dt - 1e-9).ceil().max(0.0) as usize;
    let first = sample(&state, 0.0, 0, f64::NAN, 0.0, params.record_density);
    let e0 = first.total;
    let first = Sample {
        dissipation_residual: 0.0,
        ..first
    };
    observer(&first, &state);
    let mut samples = vec![first];
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = params.snapshot_times.clone();
    pending.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut next_snap = 0;
    while next_snap < pending.len() && pending[next_snap] <= 0.0 {
        snapshots.push((0.0, state.clone()));
        next_snap += 1;
    }
    let mut dissipated = 0.0;
    let mut max_raw = state.max_abs_u();
    let mut max_inc = f64::NEG_INFINITY;
    let mut stop = StopReason::EndTime;
    for k in 1..=nsteps {
        let (next, info) = stepper.advance(&state)?;
        if !is_finite_pair(&next) {
            return Err(Error::NonFinite { step: k });
        }
        state = next;
        dissipated += 2.0 * params.dt * info.rate;
        max_raw = max_raw.max(info.raw_max_abs_u);
        let t = k as f64 * params.dt;
        while next_snap < pending.len() && pending[next_snap] <= t + 1e-12 {
            snapshots.push((t, state.clone()));
            next_snap += 1;
        }
        if k % params.monitor_stride == 0 || k == nsteps {
            let s = sample(&state, t, k, e0, dissipated, params.record_density);
            if !s.total.is_finite() {
                return Err(Error::NonFinite { step: k });
            }
            max_inc = max_inc.max(s.total - samples.last().unwrap().total);
            observer(&s, &state);
            let stationary = match params.stationarity_tol {
                Some(tol) => tol > 0.0 && s.residual_norm <= tol,
                None => s.residual_norm <= 1e-6 * s.total.max(0.0).sqrt(),
            };
            samples.push(s);
            if stationary {
                stop = StopReason::Stationary;
                break;
            }
        }
    }
    Ok(Trajectory {
        samples,
        snapshots,
        final_state: state,
        stop,
        dt: params.dt,
        monitor_stride: params.monitor_stride,
        eps: pair.eps,
        max_raw_abs_u: max_raw,
        max_energy_increase: if max_inc.is_finite() { max_inc } else { 0.0 },
    })
}

/// Whether the IMEX section solve treats the background phases implicitly for
/// this grid (always true unless flux is spread over several planes).
pub fn imex_is_covariant(pair: &PairState) -> bool {
    Imex::new(pair.grid(), 1.0, pair.eps).is_covariant(pair.grid())
}
