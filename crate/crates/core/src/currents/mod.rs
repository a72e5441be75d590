//! Integral cubical currents: mass, boundary, homology classes, flat norm,
//! Jacobian currents of pairs, and discrete families.
//!
//! A cell is an oriented cube `[b; A]` with base vertex `b` and axis set `A`.
//! Currents live either on the primal lattice (vertices at sites) or on the dual
//! lattice (vertices at centers of n-cells, offset by `h/2` along every axis).

mod family;
mod flat;
mod mincost;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::functional::{curvature, jacobian_form, LinkData, PairState};
use crate::hodge::inverse_laplacian;
use crate::lattice::{d_star, pairs, FormField, Grid};
use crate::{Error, Result};

pub use family::{almgren_class, concentration, fineness, width_bruteforce, DiscreteFamily, WidthBracket};
pub use flat::{fill_in, flat_norm, flat_norm_lp, FlatNorm};

/// Oriented cube `[base; axes]`; `axes` is a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub base: usize,
    pub axes: u8,
}

impl Cell {
    pub fn new(base: usize, axes: &[usize]) -> Self {
        Cell {
            base,
            axes: axes.iter().fold(0u8, |m, &a| m | (1 << a)),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.count_ones() as usize
    }

    pub fn axis_list(&self) -> Vec<usize> {
        (0..8).filter(|a| self.axes & (1 << a) != 0).collect()
    }

    pub fn has_axis(&self, a: usize) -> bool {
        self.axes & (1 << a) != 0
    }
}

/// Integer-multiplicity chain of oriented cells of one dimension.
#[derive(Debug, Clone)]
pub struct CubicalCurrent {
    grid: Arc<Grid>,
    dim: usize,
    dual: bool,
    cells: BTreeMap<Cell, i64>,
}

impl PartialEq for CubicalCurrent {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.dim == other.dim && self.dual == other.dual && self.cells == other.cells
    }
}

impl CubicalCurrent {
    pub fn zero(grid: &Arc<Grid>, dim: usize, dual: bool) -> Self {
        CubicalCurrent {
            grid: grid.clone(),
            dim,
            dual,
            cells: BTreeMap::new(),
        }
    }

    pub fn from_cells(
        grid: &Arc<Grid>,
        dim: usize,
        dual: bool,
        cells: impl IntoIterator<Item = (Cell, i64)>,
    ) -> Result<Self> {
        if dim > grid.n() {
            return Err(Error::InvalidArgument(format!("current dimension {dim} exceeds n = {}", grid.n())));
        }
        let mut c = CubicalCurrent::zero(grid, dim, dual);
        for (cell, m) in cells {
            if cell.dim() != dim || cell.base >= grid.num_sites() || cell.axes >> grid.n() != 0 {
                return Err(Error::InvalidArgument(format!("cell {cell:?} is not a {dim}-cell of the grid")));
            }
            c.add(cell, m);
        }
        Ok(c)
    }

    /// Dual 0-current with multiplicity `m` at the center of the n-cell based at `site`.
    pub fn dual_point(grid: &Arc<Grid>, site: usize, m: i64) -> Self {
        let mut c = CubicalCurrent::zero(grid, 0, true);
        c.add(Cell::new(site, &[]), m);
        c
    }

    /// Closed straight loop along `axis` through the vertex `start`, multiplicity `k`.
    pub fn axis_loop(grid: &Arc<Grid>, axis: usize, start: usize, k: i64, dual: bool) -> Self {
        let mut c = CubicalCurrent::zero(grid, 1, dual);
        let mut s = start;
        for _ in 0..grid.dims()[axis] {
            c.add(Cell::new(s, &[axis]), k);
            s = grid.fwd(s, axis);
        }
        c
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }

    pub fn cells(&self) -> &BTreeMap<Cell, i64> {
        &self.cells
    }

    pub fn multiplicity(&self, cell: &Cell) -> i64 {
        self.cells.get(cell).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn add(&mut self, cell: Cell, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.cells.entry(cell).or_insert(0);
        *e += m;
        if *e == 0 {
            self.cells.remove(&cell);
        }
    }

    fn check_same(&self, other: &CubicalCurrent) -> Result<()> {
        if *self.grid != *other.grid || self.dim != other.dim || self.dual != other.dual {
            return Err(Error::InvalidArgument(
                "currents differ in grid, dimension or lattice".into(),
            ));
        }
        Ok(())
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: i64, other: &CubicalCurrent) -> Result<CubicalCurrent> {
        self.check_same(other)?;
        let mut r = self.clone();
        for (&cell, &m) in &other.cells {
            r.add(cell, c * m);
        }
        Ok(r)
    }

    pub fn scaled(&self, c: i64) -> CubicalCurrent {
        let mut r = CubicalCurrent::zero(&self.grid, self.dim, self.dual);
        for (&cell, &m) in &self.cells {
            r.add(cell, c * m);
        }
        r
    }

    /// Shift by integer lattice vector.
    pub fn translated(&self, shift: &[i64]) -> CubicalCurrent {
        let g = &self.grid;
        let mut r = CubicalCurrent::zero(g, self.dim, self.dual);
        for (&cell, &m) in &self.cells {
            let c = g.coords(cell.base);
            let x: Vec<i64> = (0..g.n()).map(|a| c[a] as i64 + shift[a]).collect();
            r.add(Cell { base: g.site(&x), axes: cell.axes }, m);
        }
        r
    }

    /// d-volume of a cell.
    pub fn cell_volume(&self, cell: &Cell) -> f64 {
        cell.axis_list().iter().map(|&a| self.grid.spacing()[a]).product()
    }

    pub fn mass(&self) -> f64 {
        self.cells
            .iter()
            .map(|(c, m)| m.unsigned_abs() as f64 * self.cell_volume(c))
            .fold(0.0, |a, b| a + b)
    }

    /// Cubical boundary: `∂[b; a_0 < … ] = Σ_i (−1)^i ([b + e_{a_i}; A∖a_i] − [b; A∖a_i])`.
    pub fn boundary(&self) -> CubicalCurrent {
        let g = &self.grid;
        let mut r = CubicalCurrent::zero(g, self.dim.saturating_sub(1), self.dual);
        if self.dim == 0 {
            return r;
        }
        for (&cell, &m) in &self.cells {
            for (i, &a) in cell.axis_list().iter().enumerate() {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                let face = cell.axes & !(1 << a);
                r.add(Cell { base: g.fwd(cell.base, a), axes: face }, sign * m);
                r.add(Cell { base: cell.base, axes: face }, -sign * m);
            }
        }
        r
    }

    pub fn is_cycle(&self) -> bool {
        self.dim == 0 || self.boundary().is_zero()
    }

    /// Position of the base vertex.
    pub fn vertex_position(&self, base: usize) -> [f64; 3] {
        let mut x = self.grid.position(base);
        if self.dual {
            for a in 0..self.grid.n() {
                x[a] += 0.5 * self.grid.spacing()[a];
            }
        }
        x
    }

    /// CSV rows `base coordinates, axes, multiplicity`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.grid.n();
        let coords: Vec<String> = (0..n).map(|a| format!("i{a}")).collect();
        writeln!(w, "{},axes,multiplicity", coords.join(","))?;
        for (cell, m) in &self.cells {
            let c = self.grid.coords(cell.base);
            let cs: Vec<String> = (0..n).map(|a| c[a].to_string()).collect();
            let ax: Vec<String> = cell.axis_list().iter().map(|a| a.to_string()).collect();
            writeln!(w, "{},{},{}", cs.join(","), ax.join(""), m)?;
        }
        Ok(())
    }
}

/// Pairing of a `d`-cycle with the normalized coordinate `d`-forms, one entry per
/// axis set of size `d` in increasing bitmask order. For `d = 0` this is the
/// total multiplicity.
pub fn pairing_class(t: &CubicalCurrent) -> Result<Vec<i64>> {
    if !t.is_cycle() {
        return Err(Error::NotACycle);
    }
    let g = t.grid();
    let n = g.n();
    let masks: Vec<u8> = (0u8..(1 << n)).filter(|m| m.count_ones() as usize == t.dim()).collect();
    masks
        .iter()
        .map(|&mask| {
            let total: i64 = t.cells().iter().filter(|(c, _)| c.axes == mask).map(|(_, m)| m).sum();
            let cells_per: usize = (0..n).filter(|a| mask & (1 << a) != 0).map(|a| g.dims()[a]).product();
            if total % cells_per as i64 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "pairing {total}/{cells_per} is not an integer"
                )));
            }
            Ok(total / cells_per as i64)
        })
        .collect()
}

/// Homology class of an `(n−2)`-cycle: total multiplicity for `n = 2`; for
/// `n = 3` the signed crossing numbers with the coordinate 2-tori, indexed by the
/// loop axis.
pub fn homology_class(t: &CubicalCurrent) -> Result<Vec<i64>> {
    let n = t.grid().n();
    if t.dim() + 2 != n {
        return Err(Error::InvalidArgument(format!(
            "homology class expects an (n−2)-current, got dimension {}",
            t.dim()
        )));
    }
    pairing_class(t)
}

/// Orientation sign relating the plane `(j, k)` to its normal axis `l`: the sign
/// of the permutation `(j, k, l)`.
pub fn plane_sign(j: usize, k: usize, l: usize) -> i64 {
    let perm = [j, k, l];
    let mut inv = 0;
    for a in 0..3 {
        for b in a + 1..3 {
            if perm[a] > perm[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Jacobian current of a pair.
#[derive(Debug, Clone)]
pub struct JacobianCurrent {
    /// Dual `(n−2)`-cycle of plaquette windings.
    pub current: CubicalCurrent,
    /// `‖d*Δ⁻¹(J/2π − W)‖_{ℓ¹}` with `W` the current as a plaquette density; an
    /// upper bound for the flat distance between the two.
    pub residual: f64,
    /// Plaquettes with nonzero winding although all corners have `|u| ≥ threshold`.
    pub regular_nonzero: usize,
}

fn wrapped_arg(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re);
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Per-plaquette winding numbers of `u` relative to the connection.
pub fn plaquette_windings(pair: &PairState) -> Result<Vec<i64>> {
    let g = pair.grid();
    let n = g.n();
    let np = g.num_pairs();
    let u = pair.u.values();
    if let Some(site) = u.iter().position(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroSection { site });
    }
    let links = LinkData::new(pair);
    let omega = curvature(pair);
    let h = g.spacing();
    let theta = |s: usize, a: usize| wrapped_arg(u[s].conj() * links.transport[s * n + a] * u[g.fwd(s, a)]);
    let mut w = vec![0i64; g.num_cells(2)];
    for s in 0..g.num_sites() {
        for (p, &(j, k)) in pairs(n).iter().enumerate() {
            let sum = theta(s, j) + theta(g.fwd(s, j), k) - theta(g.fwd(s, k), j) - theta(s, k)
                + h[j] * h[k] * omega.values()[s * np + p];
            let raw = sum / (2.0 * PI);
            let r = raw.round();
            if (raw - r).abs() > 1e-6 {
                return Err(Error::InvalidArgument(format!(
                    "plaquette winding {raw} is not an integer"
                )));
            }
            w[s * np + p] = r as i64;
        }
    }
    Ok(w)
}

/// Jacobian current: the plaquette windings placed on the dual `(n−2)`-cells.
pub fn extract_jacobian_current(pair: &PairState, threshold: f64) -> Result<JacobianCurrent> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} is outside (0, 1)")));
    }
    let g = pair.grid().clone();
    let n = g.n();
    let np = g.num_pairs();
    let w = plaquette_windings(pair)?;
    let u = pair.u.values();
    let mut current = CubicalCurrent::zero(&g, n - 2, true);
    let mut regular_nonzero = 0;
    for s in 0..g.num_sites() {
        for (p, &(j, k)) in pairs(n).iter().enumerate() {
            let m = w[s * np + p];
            if m == 0 {
                continue;
            }
            let corners = [s, g.fwd(s, j), g.fwd(s, k), g.fwd(g.fwd(s, j), k)];
            if corners.iter().all(|&c| u[c].norm() >= threshold) {
                regular_nonzero += 1;
            }
            if n == 2 {
                current.add(Cell::new(s, &[]), m);
            } else {
                let l = 3 - j - k;
                current.add(Cell::new(g.bwd(s, l), &[l]), plane_sign(j, k, l) * m);
            }
        }
    }
    let jf = jacobian_form(pair);
    let h = g.spacing();
    let rho = FormField::from_fn(&g, 2, |c| {
        let (j, k) = pairs(n)[c % np];
        jf.values()[c] / (2.0 * PI) - w[c] as f64 / (h[j] * h[k])
    });
    let eta = d_star(&inverse_laplacian(&rho))?;
    let residual = g.cell_volume() * eta.values().iter().map(|x| x.abs()).sum::<f64>();
    Ok(JacobianCurrent {
        current,
        residual,
        regular_nonzero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;

    #[test]
    fn plane_signs() {
        assert_eq!(plane_sign(1, 2, 0), 1);
        assert_eq!(plane_sign(0, 2, 1), -1);
        assert_eq!(plane_sign(0, 1, 2), 1);
    }

    #[test]
    fn unit_edge_mass_and_boundary() {
        let (g, _) = make_grid(2, &[4, 4], &[1.0, 1.0], &[0]).unwrap();
        let c = CubicalCurrent::from_cells(&g, 1, false, [(Cell::new(0, &[1]), 1)]).unwrap();
        assert_eq!(c.mass(), 0.25);
        let b = c.boundary();
        assert_eq!(b.multiplicity(&Cell::new(1, &[])), 1);
        assert_eq!(b.multiplicity(&Cell::new(0, &[])), -1);
    }
}
