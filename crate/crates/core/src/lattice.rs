//! Periodic cubical grids on flat tori, twisted bundle sectors, discrete exterior
//! calculus and gauge transformations.
//!
//! Storage conventions:
//!
//! - sites are stored row-major with the last axis fastest;
//! - the link from site `s` in direction `j` has index `s * n + j`;
//! - the plaquette at `s` spanned by `(e_j, e_k)`, `j < k`, has index `s * np + p`
//!   where `p` enumerates pairs as `(0,1), (0,2), (1,2)`;
//! - a 3-cell is indexed by its base site.
//!
//! Forms are stored by their coefficients, so the weighted inner product of two
//! forms of any degree is `V * sum(a_i * b_i)` with `V` the volume of one cell.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fft::Plans;
use crate::functional::PairState;
use crate::reduce::tree_sum_by;
use crate::{Error, Result};

const PAIRS_2: [(usize, usize); 1] = [(0, 1)];
const PAIRS_3: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Coordinate pairs `(j, k)` with `j < k` in canonical order.
pub fn pairs(n: usize) -> &'static [(usize, usize)] {
    if n == 2 {
        &PAIRS_2
    } else {
        &PAIRS_3
    }
}

/// Index of the pair `(j, k)` (in either order) and the orientation sign relative
/// to the canonical `(min, max)` order.
pub fn pair_index(n: usize, j: usize, k: usize) -> Option<(usize, f64)> {
    let (a, b, s) = if j < k { (j, k, 1.0) } else { (k, j, -1.0) };
    pairs(n).iter().position(|&p| p == (a, b)).map(|p| (p, s))
}

/// Periodic cubical lattice on a flat torus together with its flux sector.
pub struct Grid {
    n: usize,
    dims: Vec<usize>,
    lengths: Vec<f64>,
    spacing: Vec<f64>,
    flux: Vec<i64>,
    num_sites: usize,
    strides: Vec<usize>,
    forward: Vec<Vec<u32>>,
    backward: Vec<Vec<u32>>,
    plans: OnceLock<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dims", &self.dims)
            .field("lengths", &self.lengths)
            .field("flux", &self.flux)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.lengths == other.lengths && self.flux == other.flux
    }
}

impl Grid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn min_length(&self) -> f64 {
        self.lengths.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Flux integers in canonical pair order.
    pub fn flux(&self) -> &[i64] {
        &self.flux
    }

    /// Antisymmetric flux entry `m_{jk}`.
    pub fn flux_entry(&self, j: usize, k: usize) -> i64 {
        match pair_index(self.n, j, k) {
            Some((p, s)) => (s as i64) * self.flux[p],
            None => 0,
        }
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn num_pairs(&self) -> usize {
        pairs(self.n).len()
    }

    /// Number of cells of the given degree.
    pub fn num_cells(&self, degree: usize) -> usize {
        match degree {
            0 => self.num_sites,
            1 => self.num_sites * self.n,
            2 => self.num_sites * self.num_pairs(),
            3 if self.n == 3 => self.num_sites,
            _ => 0,
        }
    }

    /// Volume of one n-cell, the weight of every lattice inner product.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn total_volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn coord(&self, site: usize, axis: usize) -> usize {
        (site / self.strides[axis]) % self.dims[axis]
    }

    pub fn coords(&self, site: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for a in 0..self.n {
            c[a] = self.coord(site, a);
        }
        c
    }

    /// Site index of (periodically wrapped) integer coordinates.
    pub fn site(&self, coords: &[i64]) -> usize {
        let mut s = 0;
        for a in 0..self.n {
            let d = self.dims[a] as i64;
            s += (coords[a].rem_euclid(d) as usize) * self.strides[a];
        }
        s
    }

    /// Position of a site in `[0, ℓ_1) × … × [0, ℓ_n)`.
    pub fn position(&self, site: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = self.coord(site, a) as f64 * self.spacing[a];
        }
        x
    }

    #[inline]
    pub fn fwd(&self, site: usize, axis: usize) -> usize {
        self.forward[axis][site] as usize
    }

    #[inline]
    pub fn bwd(&self, site: usize, axis: usize) -> usize {
        self.backward[axis][site] as usize
    }

    /// Minimal-image displacement `y - x` along one axis.
    pub fn wrap_delta(&self, axis: usize, d: f64) -> f64 {
        let l = self.lengths[axis];
        d - l * (d / l).round()
    }

    /// Periodic distance between two points.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for a in 0..self.n {
            let d = self.wrap_delta(a, y[a] - x[a]);
            s += d * d;
        }
        s.sqrt()
    }

    pub(crate) fn plans(&self) -> &Plans {
        self.plans
            .get_or_init(|| Plans::new(&self.dims, &self.spacing))
    }
}

/// Reference connection of the flux sector: one unit phase per link and the
/// constant curvature it represents.
#[derive(Debug, Clone)]
pub struct BackgroundConnection {
    link_phase: Vec<Complex64>,
    curvature: FormField,
}

impl BackgroundConnection {
    pub fn link_phase(&self) -> &[Complex64] {
        &self.link_phase
    }

    /// Stored smooth curvature `ω_0` (constant per plaquette orientation).
    pub fn curvature(&self) -> &FormField {
        &self.curvature
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.curvature.grid
    }

    /// Product of the four link phases around plaquette `(site, p)`.
    pub fn plaquette_phase(&self, site: usize, p: usize) -> Complex64 {
        let g = self.grid();
        let n = g.n();
        let (j, k) = pairs(n)[p];
        let ph = &self.link_phase;
        ph[site * n + j] * ph[g.fwd(site, j) * n + k]
            * ph[g.fwd(site, k) * n + j].conj()
            * ph[site * n + k].conj()
    }
}

/// Converts real flux entries to integers, rejecting non-integral values.
pub fn flux_from_real(flux: &[f64]) -> Result<Vec<i64>> {
    flux.iter()
        .map(|&m| {
            if m.is_finite() && m == m.round() {
                Ok(m as i64)
            } else {
                Err(Error::InvalidGrid(format!("flux entry {m} is not an integer")))
            }
        })
        .collect()
}

/// Builds the grid and the background connection of the given flux sector.
///
/// `flux` lists `m_{jk}` in canonical pair order: one entry for `n = 2`, three
/// (`m_01, m_02, m_12`) for `n = 3`. For each pair the link phases follow the
/// axial pattern `A_k = ω x_j`, with the `2π m` defect carried by the `j`-links
/// leaving the last slice.
pub fn make_grid(
    n: usize,
    dims: &[usize],
    lengths: &[f64],
    flux: &[i64],
) -> Result<(Arc<Grid>, Arc<BackgroundConnection>)> {
    if n != 2 && n != 3 {
        return Err(Error::InvalidGrid(format!("dimension {n} is not 2 or 3")));
    }
    if dims.len() != n || lengths.len() != n {
        return Err(Error::InvalidGrid(format!(
            "expected {n} dims and lengths, got {} and {}",
            dims.len(),
            lengths.len()
        )));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 4) {
        return Err(Error::InvalidGrid(format!("axis with {d} < 4 sites")));
    }
    if let Some(l) = lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidGrid(format!("period length {l} is not positive")));
    }
    let np = pairs(n).len();
    if flux.len() != np {
        return Err(Error::InvalidGrid(format!(
            "expected {np} flux entries, got {}",
            flux.len()
        )));
    }
    let num_sites: usize = dims.iter().product();
    if num_sites > u32::MAX as usize {
        return Err(Error::InvalidGrid("too many sites".into()));
    }
    let spacing: Vec<f64> = lengths.iter().zip(dims).map(|(l, &d)| l / d as f64).collect();
    let mut strides = vec![1; n];
    for a in (0..n - 1).rev() {
        strides[a] = strides[a + 1] * dims[a + 1];
    }
    let mut forward = vec![vec![0u32; num_sites]; n];
    let mut backward = vec![vec![0u32; num_sites]; n];
    for s in 0..num_sites {
        for a in 0..n {
            let c = (s / strides[a]) % dims[a];
            let base = s - c * strides[a];
            forward[a][s] = (base + ((c + 1) % dims[a]) * strides[a]) as u32;
            backward[a][s] = (base + ((c + dims[a] - 1) % dims[a]) * strides[a]) as u32;
        }
    }
    let grid = Arc::new(Grid {
        n,
        dims: dims.to_vec(),
        lengths: lengths.to_vec(),
        spacing,
        flux: flux.to_vec(),
        num_sites,
        strides,
        forward,
        backward,
        plans: OnceLock::new(),
    });

    let mut phase = vec![0.0f64; num_sites * n];
    let mut curvature = FormField::zeros(&grid, 2);
    for (p, &(j, k)) in pairs(n).iter().enumerate() {
        let m = flux[p];
        if m == 0 {
            continue;
        }
        let omega = 2.0 * PI * m as f64 / (lengths[j] * lengths[k]);
        let (hj, hk) = (grid.spacing[j], grid.spacing[k]);
        for s in 0..num_sites {
            let cj = grid.coord(s, j);
            let ck = grid.coord(s, k);
            phase[s * n + k] -= hk * omega * cj as f64 * hj;
            if cj == dims[j] - 1 {
                phase[s * n + j] += omega * lengths[j] * ck as f64 * hk;
            }
            curvature.values[s * np + p] = omega;
        }
    }
    let link_phase = phase.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    let bg = Arc::new(BackgroundConnection {
        link_phase,
        curvature,
    });
    Ok((grid, bg))
}

/// Real discrete form of degree 0..=n stored by cell coefficients.
#[derive(Debug, Clone)]
pub struct FormField {
    grid: Arc<Grid>,
    degree: usize,
    values: Vec<f64>,
}

impl FormField {
    pub fn zeros(grid: &Arc<Grid>, degree: usize) -> Self {
        FormField {
            grid: grid.clone(),
            degree,
            values: vec![0.0; grid.num_cells(degree)],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > grid.n() {
            return Err(Error::Degree(format!("degree {degree} on an n = {} grid", grid.n())));
        }
        if values.len() != grid.num_cells(degree) {
            return Err(Error::Shape(format!(
                "{} values for {} cells of degree {degree}",
                values.len(),
                grid.num_cells(degree)
            )));
        }
        Ok(FormField {
            grid: grid.clone(),
            degree,
            values,
        })
    }

    pub fn from_fn(grid: &Arc<Grid>, degree: usize, f: impl Fn(usize) -> f64 + Sync) -> Self {
        let values = (0..grid.num_cells(degree)).into_par_iter().map(|i| f(i)).collect();
        FormField {
            grid: grid.clone(),
            degree,
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of components per site.
    pub fn components(&self) -> usize {
        self.values.len() / self.grid.num_sites()
    }

    pub fn get(&self, site: usize, component: usize) -> f64 {
        self.values[site * self.components() + component]
    }

    fn check_compatible(&self, other: &FormField) -> Result<()> {
        if self.degree != other.degree || *self.grid != *other.grid {
            return Err(Error::Shape(format!(
                "degree {} vs {} or different grids",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// Weighted inner product `V Σ a_i b_i`.
    pub fn dot(&self, other: &FormField) -> Result<f64> {
        self.check_compatible(other)?;
        let (a, b) = (&self.values, &other.values);
        Ok(self.grid.cell_volume() * tree_sum_by(a.len(), |i| a[i] * b[i]))
    }

    /// Weighted ℓ² norm.
    pub fn norm(&self) -> f64 {
        let a = &self.values;
        (self.grid.cell_volume() * tree_sum_by(a.len(), |i| a[i] * a[i])).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &FormField) -> Result<FormField> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(FormField {
            grid: self.grid.clone(),
            degree: self.degree,
            values,
        })
    }

    pub fn scaled(&self, c: f64) -> FormField {
        FormField {
            grid: self.grid.clone(),
            degree: self.degree,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// Complex field on sites: a section in the trivialization fixed by the background.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn constant(grid: &Arc<Grid>, z: Complex64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![z; grid.num_sites()],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.num_sites() {
            return Err(Error::Shape(format!(
                "{} values for {} sites",
                values.len(),
                grid.num_sites()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(usize) -> Complex64 + Sync) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: (0..grid.num_sites()).into_par_iter().map(|i| f(i)).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| f64::max(m, z.norm()))
    }
}

/// Exterior derivative. Degree `n` input has no image and is rejected.
pub fn d(f: &FormField) -> Result<FormField> {
    let g = f.grid.clone();
    let n = g.n();
    let v = &f.values;
    let h = g.spacing().to_vec();
    match f.degree {
        0 => Ok(FormField::from_fn(&g, 1, |l| {
            let (s, j) = (l / n, l % n);
            (v[g.fwd(s, j)] - v[s]) / h[j]
        })),
        1 => {
            let np = g.num_pairs();
            Ok(FormField::from_fn(&g, 2, |c| {
                let (s, p) = (c / np, c % np);
                let (j, k) = pairs(n)[p];
                (v[g.fwd(s, j) * n + k] - v[s * n + k]) / h[j]
                    - (v[g.fwd(s, k) * n + j] - v[s * n + j]) / h[k]
            }))
        }
        2 if n == 3 => Ok(FormField::from_fn(&g, 3, |s| {
            let dd = |p: usize, a: usize| (v[g.fwd(s, a) * 3 + p] - v[s * 3 + p]) / h[a];
            dd(2, 0) - dd(1, 1) + dd(0, 2)
        })),
        k => Err(Error::Degree(format!(
            "d is undefined on degree {k} forms when n = {n}"
        ))),
    }
}

/// Adjoint of [`d`] under the weighted inner products.
pub fn d_star(f: &FormField) -> Result<FormField> {
    let g = f.grid.clone();
    let n = g.n();
    let v = &f.values;
    let h = g.spacing().to_vec();
    match f.degree {
        1 => Ok(FormField::from_fn(&g, 0, |s| {
            let mut acc = 0.0;
            for j in 0..n {
                acc -= (v[s * n + j] - v[g.bwd(s, j) * n + j]) / h[j];
            }
            acc
        })),
        2 => {
            let np = g.num_pairs();
            Ok(FormField::from_fn(&g, 1, |l| {
                let (s, a) = (l / n, l % n);
                let mut acc = 0.0;
                for (p, &(j, k)) in pairs(n).iter().enumerate() {
                    if a == k {
                        acc += (v[g.bwd(s, j) * np + p] - v[s * np + p]) / h[j];
                    } else if a == j {
                        acc += (v[s * np + p] - v[g.bwd(s, k) * np + p]) / h[k];
                    }
                }
                acc
            }))
        }
        3 => {
            // Missing axis and sign of each pair in the 3-form.
            const TERMS: [(usize, f64); 3] = [(2, 1.0), (1, -1.0), (0, 1.0)];
            Ok(FormField::from_fn(&g, 2, |c| {
                let (s, p) = (c / 3, c % 3);
                let (a, sign) = TERMS[p];
                sign * (v[g.bwd(s, a)] - v[s]) / h[a]
            }))
        }
        k => Err(Error::Degree(format!("d* is undefined on degree {k} forms"))),
    }
}

/// Parallel transport factor of link `l`: `linkPhase · exp(−i h_j α_j)`.
#[inline]
pub fn link_transport(bg: &BackgroundConnection, alpha: &[f64], h: &[f64], l: usize, j: usize) -> Complex64 {
    bg.link_phase[l] * Complex64::from_polar(1.0, -h[j] * alpha[l])
}

/// Covariant difference `D_j u = (U u(x + e_j) − u(x)) / h_j` on every link.
pub fn covariant_diff(
    u: &ScalarField,
    alpha: &FormField,
    bg: &BackgroundConnection,
) -> Result<Vec<Complex64>> {
    let g = u.grid.clone();
    if alpha.degree != 1 || *alpha.grid != *g || **bg.grid() != *g {
        return Err(Error::Shape("covariant_diff needs u, a 1-form and the background on one grid".into()));
    }
    let n = g.n();
    let h = g.spacing();
    let uv = &u.values;
    Ok((0..g.num_cells(1))
        .into_par_iter()
        .map(|l| {
            let (s, j) = (l / n, l % n);
            let t = link_transport(bg, &alpha.values, h, l, j);
            (t * uv[g.fwd(s, j)] - uv[s]) / h[j]
        })
        .collect())
}

/// Gauge transformation: a real site function `θ` plus integer windings `w`
/// realizing the large gauge `exp(2πi Σ w_j x_j / ℓ_j)`.
#[derive(Debug, Clone)]
pub struct Gauge {
    pub theta: FormField,
    pub winding: Vec<i64>,
}

impl Gauge {
    pub fn small(theta: FormField) -> Self {
        let n = theta.grid().n();
        Gauge {
            theta,
            winding: vec![0; n],
        }
    }

    pub fn winding(grid: &Arc<Grid>, winding: &[i64]) -> Self {
        Gauge {
            theta: FormField::zeros(grid, 0),
            winding: winding.to_vec(),
        }
    }

    /// Total phase applied to `u` at a site.
    pub fn phase(&self, site: usize) -> f64 {
        let g = self.theta.grid();
        let mut t = self.theta.values[site];
        for (a, &w) in self.winding.iter().enumerate() {
            if w != 0 {
                t += 2.0 * PI * (w as f64) * g.coord(site, a) as f64 / g.dims()[a] as f64;
            }
        }
        t
    }
}

/// `u ← e^{iθ} u`, `α ← α + dθ + Σ (2π w_j/ℓ_j) dx_j`.
pub fn gauge_transform(pair: &PairState, gauge: &Gauge) -> Result<PairState> {
    let g = pair.grid().clone();
    if gauge.theta.degree != 0 || *gauge.theta.grid != *g || gauge.winding.len() != g.n() {
        return Err(Error::Shape("gauge does not live on the pair's grid".into()));
    }
    let n = g.n();
    let u = ScalarField::from_fn(&g, |s| {
        Complex64::from_polar(1.0, gauge.phase(s)) * pair.u.values[s]
    });
    let dtheta = d(&gauge.theta)?;
    let mut alpha = pair.alpha.add_scaled(1.0, &dtheta)?;
    for (l, a) in alpha.values.iter_mut().enumerate() {
        let j = l % n;
        let w = gauge.winding[j];
        if w != 0 {
            *a += 2.0 * PI * w as f64 / g.lengths()[j];
        }
    }
    PairState::new(u, alpha, pair.background().clone(), pair.eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_sector_has_unit_phases() {
        let (g, bg) = make_grid(2, &[8, 8], &[1.0, 1.0], &[0]).unwrap();
        assert!(bg.link_phase().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        assert!(bg.curvature().values().iter().all(|&w| w == 0.0));
        assert_eq!(g.num_cells(2), 64);
    }

    #[test]
    fn flux_one_normalization() {
        let (g, bg) = make_grid(2, &[8, 8], &[1.0, 1.0], &[1]).unwrap();
        let h2 = g.cell_volume();
        let total: f64 = bg.curvature().values().iter().map(|w| w * h2).sum();
        assert!((total - 2.0 * PI).abs() < 1e-12);
        for s in 0..g.num_sites() {
            let expected = Complex64::from_polar(1.0, -h2 * bg.curvature().values()[s]);
            assert!((bg.plaquette_phase(s, 0) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_small_dims_and_fractional_flux() {
        assert!(make_grid(2, &[3, 8], &[1.0, 1.0], &[0]).is_err());
        assert!(flux_from_real(&[0.5]).is_err());
        assert_eq!(flux_from_real(&[2.0]).unwrap(), vec![2]);
    }

    #[test]
    fn d_of_degree_two_in_plane_is_rejected() {
        let (g, _) = make_grid(2, &[4, 4], &[1.0, 1.0], &[0]).unwrap();
        assert!(d(&FormField::zeros(&g, 2)).is_err());
        assert!(d_star(&FormField::zeros(&g, 0)).is_err());
    }
}
