//! Flat norm `min M(P) + M(Q)` over `R = P + ∂Q`, and minimal fill-ins.

use std::sync::Arc;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::mincost::{MinCostFlow, INF_CAP};
use super::{Cell, CubicalCurrent};
use crate::lattice::Grid;
use crate::{Error, Result};

const INTEGRALITY_TOL: f64 = 1e-7;

/// Optimal decomposition `S − T = P + ∂Q`.
#[derive(Debug, Clone)]
pub struct FlatNorm {
    pub value: f64,
    pub p: CubicalCurrent,
    pub q: CubicalCurrent,
    /// False when the relaxation returned non-integer coefficients; `p` and `q`
    /// then hold the nearest integers and are not an exact decomposition.
    pub integral: bool,
}

fn masks(n: usize, d: usize) -> Vec<u8> {
    (0u8..(1 << n)).filter(|m| m.count_ones() as usize == d).collect()
}

fn cell_volume(grid: &Grid, axes: u8) -> f64 {
    (0..grid.n())
        .filter(|a| axes & (1 << a) != 0)
        .map(|a| grid.spacing()[a])
        .product()
}

fn check_pair(s: &CubicalCurrent, t: &CubicalCurrent) -> Result<()> {
    if *s.grid() != *t.grid() || s.dim() != t.dim() || s.is_dual() != t.is_dual() {
        return Err(Error::InvalidArgument(
            "flat norm needs currents of equal dimension on one lattice".into(),
        ));
    }
    if s.dim() >= s.grid().n() {
        return Err(Error::InvalidArgument(format!(
            "flat norm of {}-currents on a {}-torus has no filling dimension",
            s.dim(),
            s.grid().n()
        )));
    }
    Ok(())
}

/// Flat distance between `s` and `t`. Zero-currents on a two-torus go through a
/// min-cost flow; everything else through the linear relaxation.
pub fn flat_norm(s: &CubicalCurrent, t: &CubicalCurrent) -> Result<FlatNorm> {
    check_pair(s, t)?;
    let r = s.add_scaled(-1, t)?;
    if r.dim() == 0 && r.grid().n() == 2 {
        return Ok(flow_route(&r, true)?.expect("flat norm is always feasible"));
    }
    lp_route(&r, true).map(|x| x.expect("flat norm is always feasible"))
}

/// Flat distance through the linear relaxation regardless of dimension.
pub fn flat_norm_lp(s: &CubicalCurrent, t: &CubicalCurrent) -> Result<FlatNorm> {
    check_pair(s, t)?;
    let r = s.add_scaled(-1, t)?;
    lp_route(&r, true).map(|x| x.expect("flat norm is always feasible"))
}

/// Minimal-mass `Q` with `∂Q = r`.
pub fn fill_in(r: &CubicalCurrent) -> Result<FlatNorm> {
    if r.dim() >= r.grid().n() {
        return Err(Error::InvalidArgument("top-dimensional currents have no fill-in".into()));
    }
    let out = if r.dim() == 0 && r.grid().n() == 2 {
        flow_route(r, false)?
    } else {
        lp_route(r, false)?
    };
    out.ok_or_else(|| Error::InvalidArgument("current is not a boundary".into()))
}

fn flow_route(r: &CubicalCurrent, allow_p: bool) -> Result<Option<FlatNorm>> {
    let g: &Arc<Grid> = r.grid();
    let ns = g.num_sites();
    let total: i64 = r.cells().values().sum();
    if !allow_p && total != 0 {
        return Ok(None);
    }
    let z = ns;
    let src = ns + 1;
    let snk = ns + 2;
    let mut mcf = MinCostFlow::new(ns + 3);
    let mut edges = Vec::with_capacity(2 * ns * 2);
    for s in 0..ns {
        for a in 0..2 {
            let t = g.fwd(s, a);
            let h = g.spacing()[a];
            let fwd = mcf.add_edge(s, t, INF_CAP, h);
            let bwd = mcf.add_edge(t, s, INF_CAP, h);
            edges.push((s, a, fwd, bwd));
        }
    }
    let mut zarcs = Vec::new();
    if allow_p {
        for s in 0..ns {
            let out = mcf.add_edge(s, z, INF_CAP, 1.0);
            let inn = mcf.add_edge(z, s, INF_CAP, 1.0);
            zarcs.push((s, out, inn));
        }
    }
    // Supply is net outflow: −R at sites, ΣR at the auxiliary node.
    let mut need = 0;
    let mut add_supply = |mcf: &mut MinCostFlow, v: usize, supply: i64| {
        if supply > 0 {
            mcf.add_edge(src, v, supply, 0.0);
            need += supply;
        } else if supply < 0 {
            mcf.add_edge(v, snk, -supply, 0.0);
        }
    };
    for (cell, &m) in r.cells() {
        add_supply(&mut mcf, cell.base, -m);
    }
    add_supply(&mut mcf, z, total);
    let (sent, _) = mcf.run(src, snk, need);
    if sent != need {
        return Ok(None);
    }
    let mut q = CubicalCurrent::zero(g, 1, r.is_dual());
    for &(s, a, fwd, bwd) in &edges {
        q.add(Cell { base: s, axes: 1 << a }, mcf.flow(fwd) - mcf.flow(bwd));
    }
    let mut p = CubicalCurrent::zero(g, 0, r.is_dual());
    for &(s, out, inn) in &zarcs {
        p.add(Cell { base: s, axes: 0 }, mcf.flow(inn) - mcf.flow(out));
    }
    let value = p.mass() + q.mass();
    Ok(Some(FlatNorm {
        value,
        p,
        q,
        integral: true,
    }))
}

fn lp_route(r: &CubicalCurrent, allow_p: bool) -> Result<Option<FlatNorm>> {
    let g = r.grid().clone();
    let n = g.n();
    let d = r.dim();
    let ns = g.num_sites();
    let low = masks(n, d);
    let high = masks(n, d + 1);
    let row_of = |c: &Cell| c.base * low.len() + low.iter().position(|&m| m == c.axes).unwrap();
    let rows = ns * low.len();

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut terms: Vec<Vec<(microlp::Variable, f64)>> = vec![Vec::new(); rows];
    let mut pvars = Vec::new();
    if allow_p {
        for s in 0..ns {
            for &m in &low {
                let w = cell_volume(&g, m);
                let plus = lp.add_var(w, (0.0, f64::INFINITY));
                let minus = lp.add_var(w, (0.0, f64::INFINITY));
                let c = Cell { base: s, axes: m };
                let row = row_of(&c);
                terms[row].push((plus, 1.0));
                terms[row].push((minus, -1.0));
                pvars.push((c, plus, minus));
            }
        }
    }
    let mut qvars = Vec::new();
    for s in 0..ns {
        for &m in &high {
            let w = cell_volume(&g, m);
            let plus = lp.add_var(w, (0.0, f64::INFINITY));
            let minus = lp.add_var(w, (0.0, f64::INFINITY));
            let c = Cell { base: s, axes: m };
            let face = CubicalCurrent::from_cells(&g, d + 1, r.is_dual(), [(c, 1)])?.boundary();
            for (f, &k) in face.cells() {
                let row = row_of(f);
                terms[row].push((plus, k as f64));
                terms[row].push((minus, -(k as f64)));
            }
            qvars.push((c, plus, minus));
        }
    }
    for (row, t) in terms.iter().enumerate() {
        let base = row / low.len();
        let c = Cell { base, axes: low[row % low.len()] };
        lp.add_constraint(t.as_slice(), ComparisonOp::Eq, r.multiplicity(&c) as f64);
    }
    let sol = match lp.solve() {
        Ok(s) => s,
        Err(microlp::Error::Infeasible) => return Ok(None),
        Err(e) => return Err(Error::Lp(e.to_string())),
    };
    let sol = sol
        .into_solution()
        .map_err(|_| Error::Lp("solve was interrupted".into()))?;
    let mut integral = true;
    let mut round = |x: f64| {
        let k = x.round();
        if (x - k).abs() > INTEGRALITY_TOL {
            integral = false;
        }
        k as i64
    };
    let mut p = CubicalCurrent::zero(&g, d, r.is_dual());
    for &(c, plus, minus) in &pvars {
        p.add(c, round(sol.var_value(plus) - sol.var_value(minus)));
    }
    let mut q = CubicalCurrent::zero(&g, d + 1, r.is_dual());
    for &(c, plus, minus) in &qvars {
        q.add(c, round(sol.var_value(plus) - sol.var_value(minus)));
    }
    let value = if integral { p.mass() + q.mass() } else { sol.objective() };
    Ok(Some(FlatNorm { value, p, q, integral }))
}
