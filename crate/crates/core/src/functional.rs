//! The energy `E_ε`, its density, the gauge-invariant Jacobian, the one-form `β`,
//! the Euler–Lagrange residual and the stress-energy trace.
//!
//! With `D` the covariant difference and `ω = ω_0 + dα`,
//!
//! `E_ε = Σ (|Du|² + ε²|ω|² + (1 − |u|²)²/(4ε²)) · V`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::lattice::{self, link_transport, pairs, BackgroundConnection, FormField, Grid, ScalarField};
use crate::reduce::{tree_sum, tree_sum_by};
use crate::{Error, Result};

/// A section `u` and a connection `∇_0 − iα` at coupling `ε`.
#[derive(Debug, Clone)]
pub struct PairState {
    pub u: ScalarField,
    pub alpha: FormField,
    pub eps: f64,
    background: Arc<BackgroundConnection>,
}

impl PairState {
    pub fn new(
        u: ScalarField,
        alpha: FormField,
        background: Arc<BackgroundConnection>,
        eps: f64,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("ε = {eps} is outside (0, 1]")));
        }
        if alpha.degree() != 1 {
            return Err(Error::Degree(format!("α has degree {}", alpha.degree())));
        }
        if **u.grid() != **alpha.grid() || **background.grid() != **u.grid() {
            return Err(Error::Shape("u, α and the background live on different grids".into()));
        }
        Ok(PairState {
            u,
            alpha,
            eps,
            background,
        })
    }

    /// `u ≡ 1`, `α = 0`.
    pub fn vacuum(background: &Arc<BackgroundConnection>, eps: f64) -> Result<Self> {
        let g = background.grid().clone();
        PairState::new(
            ScalarField::constant(&g, Complex64::new(1.0, 0.0)),
            FormField::zeros(&g, 1),
            background.clone(),
            eps,
        )
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn background(&self) -> &Arc<BackgroundConnection> {
        &self.background
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u.max_abs()
    }

    /// Same pair with a different coupling.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        PairState::new(self.u.clone(), self.alpha.clone(), self.background.clone(), eps)
    }
}

/// Per-link quantities shared by several observables.
pub(crate) struct LinkData {
    /// `U = linkPhase · e^{−ihα}`.
    pub transport: Vec<Complex64>,
    /// Covariant difference `D_j u`.
    pub diff: Vec<Complex64>,
    /// `⟨Du, iū⟩` with `ū` the transported endpoint average, i.e. `Im(conj(u) U u') / h`.
    pub current: Vec<f64>,
}

impl LinkData {
    pub(crate) fn new(pair: &PairState) -> Self {
        let g = pair.grid();
        let n = g.n();
        let h = g.spacing();
        let u = pair.u.values();
        let a = pair.alpha.values();
        let bg = &pair.background;
        let rows: Vec<(Complex64, Complex64, f64)> = (0..g.num_cells(1))
            .into_par_iter()
            .map(|l| {
                let (s, j) = (l / n, l % n);
                let t = link_transport(bg, a, h, l, j);
                let w = t * u[g.fwd(s, j)];
                ((t), (w - u[s]) / h[j], (u[s].conj() * w).im / h[j])
            })
            .collect();
        let mut transport = Vec::with_capacity(rows.len());
        let mut diff = Vec::with_capacity(rows.len());
        let mut current = Vec::with_capacity(rows.len());
        for (t, d, c) in rows {
            transport.push(t);
            diff.push(d);
            current.push(c);
        }
        LinkData {
            transport,
            diff,
            current,
        }
    }
}

/// Curvature `ω_0 + dα`.
pub fn curvature(pair: &PairState) -> FormField {
    let da = lattice::d(&pair.alpha).expect("α has degree 1");
    da.add_scaled(1.0, pair.background.curvature())
        .expect("same grid and degree")
}

/// Site average of `|Du|²`: per axis, the mean of the two incident links.
pub(crate) fn site_gradient_sq(grid: &Grid, diff: &[Complex64]) -> Vec<f64> {
    let n = grid.n();
    (0..grid.num_sites())
        .into_par_iter()
        .map(|s| {
            let mut acc = 0.0;
            for j in 0..n {
                acc += 0.5 * (diff[s * n + j].norm_sqr() + diff[grid.bwd(s, j) * n + j].norm_sqr());
            }
            acc
        })
        .collect()
}

/// Site average of `|ω|²`: per plane, the mean of the four incident plaquettes.
pub(crate) fn site_curvature_sq(grid: &Grid, omega: &FormField) -> Vec<f64> {
    let np = grid.num_pairs();
    let w = omega.values();
    let n = grid.n();
    (0..grid.num_sites())
        .into_par_iter()
        .map(|s| {
            let mut acc = 0.0;
            for (p, &(j, k)) in pairs(n).iter().enumerate() {
                let sj = grid.bwd(s, j);
                let sk = grid.bwd(s, k);
                let sjk = grid.bwd(sj, k);
                let v = |c: usize| w[c * np + p] * w[c * np + p];
                acc += 0.25 * (v(s) + v(sj) + v(sk) + v(sjk));
            }
            acc
        })
        .collect()
}

pub(crate) fn potential(u: Complex64, eps: f64) -> f64 {
    let m = 1.0 - u.norm_sqr();
    m * m / (4.0 * eps * eps)
}

/// Energy split into its three parts, plus the site density `e_ε`.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub total: f64,
    pub gradient_part: f64,
    pub curvature_part: f64,
    pub potential_part: f64,
    pub density: FormField,
    pub max_density: f64,
    pub max_abs_u: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str =
        "t,total,gradientPart,curvaturePart,potentialPart,maxDensity,maxAbsU";

    pub fn csv_row(&self, t: f64) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            t,
            self.total,
            self.gradient_part,
            self.curvature_part,
            self.potential_part,
            self.max_density,
            self.max_abs_u
        )
    }
}

pub fn energy(pair: &PairState) -> EnergyReport {
    let g = pair.grid();
    let links = LinkData::new(pair);
    let omega = curvature(pair);
    let grad = site_gradient_sq(g, &links.diff);
    let curv = site_curvature_sq(g, &omega);
    let eps2 = pair.eps * pair.eps;
    let u = pair.u.values();
    let pot: Vec<f64> = u.par_iter().map(|&z| potential(z, pair.eps)).collect();
    let density: Vec<f64> = (0..g.num_sites())
        .into_par_iter()
        .map(|s| grad[s] + eps2 * curv[s] + pot[s])
        .collect();
    let v = g.cell_volume();
    let gradient_part = v * tree_sum(&grad);
    let curvature_part = v * eps2 * tree_sum(&curv);
    let potential_part = v * tree_sum(&pot);
    let max_density = density.iter().cloned().fold(0.0, f64::max);
    EnergyReport {
        total: gradient_part + curvature_part + potential_part,
        gradient_part,
        curvature_part,
        potential_part,
        density: FormField::from_values(g, 0, density).expect("site field"),
        max_density,
        max_abs_u: pair.max_abs_u(),
    }
}

/// `β = ⟨Du, iū⟩ + α` per link.
pub fn beta_form(pair: &PairState) -> FormField {
    let links = LinkData::new(pair);
    let a = pair.alpha.values();
    FormField::from_fn(pair.grid(), 1, |l| links.current[l] + a[l])
}

/// Gauge-invariant Jacobian `J = dβ + ω_0`.
pub fn jacobian_form(pair: &PairState) -> FormField {
    let db = lattice::d(&beta_form(pair)).expect("β has degree 1");
    db.add_scaled(1.0, pair.background.curvature())
        .expect("same grid and degree")
}

/// Euler–Lagrange residual `(D*Du − (1 − |u|²)u/(2ε²), ε² d*ω − ⟨Du, iu⟩)`.
///
/// Equals half the gradient of the lattice energy divided by the cell volume.
pub fn el_residual(pair: &PairState) -> (ScalarField, FormField) {
    let links = LinkData::new(pair);
    el_residual_from(pair, &links)
}

pub(crate) fn el_residual_from(pair: &PairState, links: &LinkData) -> (ScalarField, FormField) {
    let g = pair.grid();
    let n = g.n();
    let h = g.spacing();
    let u = pair.u.values();
    let inv2e2 = 0.5 / (pair.eps * pair.eps);
    let el_u = ScalarField::from_fn(g, |s| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let b = g.bwd(s, j) * n + j;
            acc += (links.transport[b].conj() * links.diff[b] - links.diff[s * n + j]) / h[j];
        }
        acc - u[s] * ((1.0 - u[s].norm_sqr()) * inv2e2)
    });
    let dso = lattice::d_star(&curvature(pair)).expect("curvature has degree 2");
    let eps2 = pair.eps * pair.eps;
    let ds = dso.values();
    let el_a = FormField::from_fn(g, 1, |l| eps2 * ds[l] - links.current[l]);
    (el_u, el_a)
}

/// Flow-metric norm of the residual, `sqrt(V Σ |el_u|² + V Σ el_α²/ε²)`.
pub fn residual_norm(pair: &PairState, el: &(ScalarField, FormField)) -> f64 {
    let g = pair.grid();
    let eu = el.0.values();
    let ea = el.1.values();
    let e2 = pair.eps * pair.eps;
    let su = tree_sum_by(eu.len(), |i| eu[i].norm_sqr());
    let sa = tree_sum_by(ea.len(), |i| ea[i] * ea[i]);
    (g.cell_volume() * (su + sa / e2)).sqrt()
}

/// Stress-energy trace `|Du|² + 2ε²|ω|²` per site.
pub fn stress_trace(pair: &PairState) -> FormField {
    let g = pair.grid();
    let links = LinkData::new(pair);
    let grad = site_gradient_sq(g, &links.diff);
    let curv = site_curvature_sq(g, &curvature(pair));
    let e2 = pair.eps * pair.eps;
    FormField::from_fn(g, 0, |s| grad[s] + 2.0 * e2 * curv[s])
}

/// Discrete mismatch between `J = dβ + ω_0` and `ψ + (1 − |u|²)ω` with
/// `ψ_jk = 2⟨i D_j u, D_k u⟩`.
#[derive(Debug, Clone, Copy)]
pub struct JacobianMismatch {
    pub max_abs: f64,
    /// Weighted ℓ¹ norm of the difference.
    pub l1: f64,
}

pub fn jacobian_mismatch(pair: &PairState) -> JacobianMismatch {
    let g = pair.grid();
    let n = g.n();
    let np = g.num_pairs();
    let links = LinkData::new(pair);
    let jf = jacobian_form(pair);
    let omega = curvature(pair);
    let u = pair.u.values();
    let diffs: Vec<f64> = (0..g.num_cells(2))
        .into_par_iter()
        .map(|c| {
            let (s, p) = (c / np, c % np);
            let (j, k) = pairs(n)[p];
            let sj = g.fwd(s, j);
            let sk = g.fwd(s, k);
            let dj = 0.5 * (links.diff[s * n + j] + links.transport[s * n + k] * links.diff[sk * n + j]);
            let dk = 0.5 * (links.diff[s * n + k] + links.transport[s * n + j] * links.diff[sj * n + k]);
            let psi = -2.0 * (dj * dk.conj()).im;
            let m2 = 0.25 * (u[s].norm_sqr() + u[sj].norm_sqr() + u[sk].norm_sqr() + u[g.fwd(sj, k)].norm_sqr());
            (jf.values()[c] - psi - (1.0 - m2) * omega.values()[c]).abs()
        })
        .collect();
    JacobianMismatch {
        max_abs: diffs.iter().cloned().fold(0.0, f64::max),
        l1: g.cell_volume() * tree_sum(&diffs),
    }
}

/// `(1/2π) Σ J · h_j h_k` over the coordinate 2-torus through `site` in plane `p`.
pub fn slice_flux(grid: &Grid, two_form: &FormField, p: usize, site: usize) -> f64 {
    let n = grid.n();
    let np = grid.num_pairs();
    let (j, k) = pairs(n)[p];
    let h = grid.spacing();
    let c = grid.coords(site);
    let mut acc = Vec::with_capacity(grid.dims()[j] * grid.dims()[k]);
    for a in 0..grid.dims()[j] {
        for b in 0..grid.dims()[k] {
            let mut x = [c[0] as i64, c[1] as i64, c[2] as i64];
            x[j] = a as i64;
            x[k] = b as i64;
            let s = grid.site(&x[..n]);
            acc.push(two_form.values()[s * np + p] * h[j] * h[k]);
        }
    }
    tree_sum(&acc) / (2.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;

    #[test]
    fn vacuum_has_zero_energy_and_residual() {
        let (_, bg) = make_grid(2, &[8, 8], &[1.0, 1.0], &[0]).unwrap();
        let p = PairState::vacuum(&bg, 0.3).unwrap();
        let e = energy(&p);
        assert_eq!(e.total, 0.0);
        let el = el_residual(&p);
        assert_eq!(residual_norm(&p, &el), 0.0);
    }

    #[test]
    fn zero_section_is_pure_potential() {
        let (g, bg) = make_grid(2, &[8, 8], &[2.0, 1.0], &[0]).unwrap();
        let eps = 0.25;
        let p = PairState::new(
            ScalarField::constant(&g, Complex64::new(0.0, 0.0)),
            FormField::zeros(&g, 1),
            bg,
            eps,
        )
        .unwrap();
        let e = energy(&p);
        assert!((e.total - 2.0 / (4.0 * eps * eps)).abs() < 1e-12);
        assert!(stress_trace(&p).max_abs() == 0.0);
    }

    #[test]
    fn eps_out_of_range_is_rejected() {
        let (_, bg) = make_grid(2, &[4, 4], &[1.0, 1.0], &[0]).unwrap();
        assert!(PairState::vacuum(&bg, 0.0).is_err());
        assert!(PairState::vacuum(&bg, 1.5).is_err());
    }
}
