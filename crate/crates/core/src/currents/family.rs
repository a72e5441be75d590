//! Discrete families of `(n−2)`-cycles: fineness, concentration, the Almgren
//! class built from minimal fill-ins, and a brute-force width for tiny grids.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use super::flat::{fill_in, flat_norm};
use super::{pairing_class, Cell, CubicalCurrent};
use crate::lattice::Grid;
use crate::{Error, Result};

/// Currents indexed by the vertices of the cube `[0, 1]^m` subdivided into `3^j`
/// intervals per side, stored row-major.
#[derive(Debug, Clone)]
pub struct DiscreteFamily {
    m: usize,
    j: u32,
    values: Vec<CubicalCurrent>,
}

impl DiscreteFamily {
    pub fn new(m: usize, j: u32, values: Vec<CubicalCurrent>) -> Result<Self> {
        if m != 1 && m != 2 {
            return Err(Error::InvalidArgument(format!("family dimension {m} must be 1 or 2")));
        }
        let side = 3usize.pow(j) + 1;
        if values.len() != side.pow(m as u32) {
            return Err(Error::InvalidArgument(format!(
                "expected {} currents for m = {m}, j = {j}, got {}",
                side.pow(m as u32),
                values.len()
            )));
        }
        let first = &values[0];
        let n = first.grid().n();
        for v in &values {
            if *v.grid() != *first.grid() || v.dim() + 2 != n || v.is_dual() != first.is_dual() {
                return Err(Error::InvalidArgument(
                    "family members must be (n−2)-currents on one lattice".into(),
                ));
            }
        }
        Ok(DiscreteFamily { m, j, values })
    }

    /// One-parameter family through `path`, padded by repeating the last member.
    pub fn from_path(path: Vec<CubicalCurrent>) -> Result<Self> {
        if path.is_empty() {
            return Err(Error::InvalidArgument("empty path".into()));
        }
        let mut j = 0;
        while 3usize.pow(j) + 1 < path.len() {
            j += 1;
        }
        let side = 3usize.pow(j) + 1;
        let mut values = path;
        let last = values.last().unwrap().clone();
        values.resize(side, last);
        DiscreteFamily::new(1, j, values)
    }

    /// Concatenation of one-parameter families whose endpoints match.
    pub fn concatenate(&self, other: &DiscreteFamily) -> Result<Self> {
        if self.m != 1 || other.m != 1 {
            return Err(Error::InvalidArgument("only one-parameter families concatenate".into()));
        }
        if self.values.last() != other.values.first() {
            return Err(Error::InvalidArgument("endpoints do not match".into()));
        }
        let mut path = self.values.clone();
        path.extend(other.values[1..].iter().cloned());
        DiscreteFamily::from_path(path)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn level(&self) -> u32 {
        self.j
    }

    pub fn side(&self) -> usize {
        3usize.pow(self.j) + 1
    }

    pub fn values(&self) -> &[CubicalCurrent] {
        &self.values
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.values[0].grid()
    }

    pub fn get(&self, index: &[usize]) -> &CubicalCurrent {
        let side = self.side();
        let k = index.iter().fold(0, |acc, &i| acc * side + i);
        &self.values[k]
    }

    /// Adjacent vertex pairs `(a, b)` along the coordinate directions.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let side = self.side();
        let mut out = Vec::new();
        if self.m == 1 {
            for i in 0..side - 1 {
                out.push((i, i + 1));
            }
        } else {
            for r in 0..side {
                for c in 0..side {
                    let k = r * side + c;
                    if c + 1 < side {
                        out.push((k, k + 1));
                    }
                    if r + 1 < side {
                        out.push((k, k + side));
                    }
                }
            }
        }
        out
    }
}

/// Largest flat distance between adjacent members.
pub fn fineness(family: &DiscreteFamily) -> Result<f64> {
    let mut f: f64 = 0.0;
    for (a, b) in family.edges() {
        let (x, y) = (&family.values[a], &family.values[b]);
        if x == y {
            continue;
        }
        f = f.max(flat_norm(x, y)?.value);
    }
    Ok(f)
}

/// Mass of `t` inside the open ball of radius `r` about `center`.
fn ball_mass(t: &CubicalCurrent, center: &[f64], r: f64) -> f64 {
    let g = t.grid();
    let n = g.n();
    let mut total = 0.0;
    for (cell, &m) in t.cells() {
        let x = t.vertex_position(cell.base);
        match cell.dim() {
            0 => {
                if g.distance(&x[..n], center) < r {
                    total += m.unsigned_abs() as f64;
                }
            }
            1 => {
                let a = cell.axis_list()[0];
                let h = g.spacing()[a];
                let mut perp2 = 0.0;
                let mut along = 0.0;
                for b in 0..n {
                    let mid = if b == a { x[b] + 0.5 * h } else { x[b] };
                    let delta = g.wrap_delta(b, mid - center[b]);
                    if b == a {
                        along = delta;
                    } else {
                        perp2 += delta * delta;
                    }
                }
                if perp2 < r * r {
                    let w = (r * r - perp2).sqrt();
                    let lo = (-along - w).max(-0.5 * h);
                    let hi = (-along + w).min(0.5 * h);
                    if hi > lo {
                        total += m.unsigned_abs() as f64 * (hi - lo);
                    }
                }
            }
            _ => unreachable!("families carry currents of dimension at most one"),
        }
    }
    total
}

/// Largest mass any member places in a ball of radius `r`, with centers on the
/// half-spacing lattice.
pub fn concentration(family: &DiscreteFamily, r: f64) -> Result<f64> {
    let g = family.grid();
    let n = g.n();
    if family.values[0].dim() > 1 {
        return Err(Error::InvalidArgument("concentration needs currents of dimension ≤ 1".into()));
    }
    if !(r > 0.0 && r < 0.5 * g.min_length()) {
        return Err(Error::InvalidArgument(format!("radius {r} must lie in (0, ℓ_min/2)")));
    }
    let fine: Vec<usize> = g.dims().iter().map(|&d| 2 * d).collect();
    let count: usize = fine.iter().product();
    let mut best: f64 = 0.0;
    for t in family.values() {
        if t.is_zero() {
            continue;
        }
        for k in 0..count {
            let mut rem = k;
            let mut c = [0.0; 3];
            for a in (0..n).rev() {
                c[a] = (rem % fine[a]) as f64 * 0.5 * g.spacing()[a];
                rem /= fine[a];
            }
            best = best.max(ball_mass(t, &c[..n], r));
        }
    }
    Ok(best)
}

fn check_fineness(family: &DiscreteFamily) -> Result<()> {
    let limit = 0.25 * family.grid().min_length();
    let f = fineness(family)?;
    if f > limit {
        return Err(Error::FinenessTooLarge { fineness: f, limit });
    }
    Ok(())
}

/// Minimal fill-in of `b − a`.
fn edge_fill(a: &CubicalCurrent, b: &CubicalCurrent) -> Result<CubicalCurrent> {
    let r = b.add_scaled(-1, a)?;
    let f = fill_in(&r)?;
    if !f.integral {
        return Err(Error::AmbiguousFill("fill-in relaxation is fractional".into()));
    }
    Ok(f.q)
}

/// Top-dimensional chain `F` with `∂F = s` and `M(F) < vol/2`.
fn fill_top(s: &CubicalCurrent) -> Result<CubicalCurrent> {
    let g = s.grid().clone();
    let n = g.n();
    let all: u8 = (1 << n) - 1;
    let ns = g.num_sites();
    let mut f: Vec<Option<i64>> = vec![None; ns];
    f[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    // Face [c; all∖a] sits between the cubes based at c − e_a and c with
    // coefficient (−1)^pos (F(c − e_a) − F(c)).
    let sign = |a: usize| if a % 2 == 0 { 1 } else { -1 };
    let face = |c: usize, a: usize| Cell { base: c, axes: all & !(1 << a) };
    while let Some(c) = queue.pop_front() {
        let fc = f[c].unwrap();
        for a in 0..n {
            let up = g.fwd(c, a);
            let expect_up = fc - sign(a) * s.multiplicity(&face(up, a));
            let down = g.bwd(c, a);
            let expect_down = fc + sign(a) * s.multiplicity(&face(c, a));
            for (v, e) in [(up, expect_up), (down, expect_down)] {
                match f[v] {
                    None => {
                        f[v] = Some(e);
                        queue.push_back(v);
                    }
                    Some(x) if x != e => {
                        return Err(Error::AmbiguousFill("square cycle is not a boundary".into()))
                    }
                    _ => {}
                }
            }
        }
    }
    let mut vals: Vec<i64> = f.into_iter().map(|x| x.unwrap()).collect();
    let mut sorted = vals.clone();
    sorted.sort_unstable();
    let median = sorted[(ns - 1) / 2];
    for v in &mut vals {
        *v -= median;
    }
    let mass: f64 = vals.iter().map(|v| v.unsigned_abs() as f64).sum::<f64>() * g.cell_volume();
    if mass >= 0.5 * g.total_volume() {
        return Err(Error::AmbiguousFill(format!(
            "smallest square fill-in has mass {mass}, not below half the volume"
        )));
    }
    CubicalCurrent::from_cells(&g, n, s.is_dual(), vals.into_iter().enumerate().map(|(b, m)| (Cell { base: b, axes: all }, m)))
}

/// Almgren class. For `m = 1` the endpoints must agree and the result pairs the
/// summed fill-ins with the coordinate `(n−1)`-forms; for `m = 2` the boundary
/// must vanish and the result is the degree of the summed square fill-ins.
pub fn almgren_class(family: &DiscreteFamily) -> Result<Vec<i64>> {
    check_fineness(family)?;
    let g = family.grid().clone();
    let n = g.n();
    let dual = family.values[0].is_dual();
    let side = family.side();
    if family.m == 1 {
        if family.values[0] != family.values[side - 1] {
            return Err(Error::InvalidArgument("one-parameter family must be closed".into()));
        }
        let mut total = CubicalCurrent::zero(&g, n - 1, dual);
        for i in 0..side - 1 {
            total = total.add_scaled(1, &edge_fill(&family.values[i], &family.values[i + 1])?)?;
        }
        return pairing_class(&total);
    }
    for r in 0..side {
        for c in 0..side {
            if (r == 0 || c == 0 || r == side - 1 || c == side - 1) && !family.get(&[r, c]).is_zero() {
                return Err(Error::InvalidArgument("two-parameter family must vanish on the boundary".into()));
            }
        }
    }
    let mut fills: HashMap<(usize, usize), CubicalCurrent> = HashMap::new();
    let mut fill = |a: usize, b: usize| -> Result<CubicalCurrent> {
        if let Some(f) = fills.get(&(a, b)) {
            return Ok(f.clone());
        }
        if let Some(f) = fills.get(&(b, a)) {
            return Ok(f.scaled(-1));
        }
        let f = edge_fill(&family.values[a], &family.values[b])?;
        fills.insert((a, b), f.clone());
        Ok(f)
    };
    let mut total = CubicalCurrent::zero(&g, n, dual);
    for r in 0..side - 1 {
        for c in 0..side - 1 {
            let a = r * side + c;
            let b = a + 1;
            let cc = a + side + 1;
            let d = a + side;
            let square = fill(a, b)?
                .add_scaled(1, &fill(b, cc)?)?
                .add_scaled(1, &fill(cc, d)?)?
                .add_scaled(1, &fill(d, a)?)?;
            if square.is_zero() {
                continue;
            }
            total = total.add_scaled(1, &fill_top(&square)?)?;
        }
    }
    pairing_class(&total)
}

/// Result of the brute-force width search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthBracket {
    /// Every admissible family has a member of at least this mass.
    pub lower: f64,
    /// Max mass of the best family found, if any.
    pub upper: Option<f64>,
    /// True when the state cap truncated a search level.
    pub capped: bool,
}

/// Smallest max-mass over closed one-parameter families of 0-cycles on a small
/// two-torus whose steps move one unit along one edge of minimal length, and
/// whose summed fill-ins have class `class`. Levels are searched in increasing
/// mass up to `mass_cap`.
pub fn width_bruteforce(class: &[i64], grid: &Arc<Grid>, mass_cap: f64, state_cap: usize) -> Result<WidthBracket> {
    if grid.n() != 2 || grid.dims().iter().any(|&d| d > 6) {
        return Err(Error::InvalidArgument("width search runs on 2-tori with N ≤ 6".into()));
    }
    if class.len() != 2 {
        return Err(Error::InvalidArgument("class needs one entry per axis".into()));
    }
    let ns = grid.num_sites();
    let hmin = grid.min_spacing();
    let axes: Vec<usize> = (0..2).filter(|&a| grid.spacing()[a] <= hmin * (1.0 + 1e-12)).collect();
    let target = [class[0] * grid.dims()[0] as i64, class[1] * grid.dims()[1] as i64];
    // Winding counters stay within one lap of the target on each side.
    let bound = [
        target[0].abs() + grid.dims()[0] as i64,
        target[1].abs() + grid.dims()[1] as i64,
    ];
    if class.iter().all(|&c| c == 0) {
        return Ok(WidthBracket { lower: 0.0, upper: Some(0.0), capped: false });
    }
    type State = (Vec<i8>, [i64; 2]);
    let mut lower = 0.0;
    let mut capped_any = false;
    // Reachable chains have total multiplicity zero, so masses are even.
    let mut level = 2usize;
    while level as f64 <= mass_cap + 1e-12 {
        let start: State = (vec![0; ns], [0, 0]);
        let mut seen: HashSet<State> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        let mut found = false;
        let mut capped = false;
        while let Some((chain, count)) = queue.pop_front() {
            for s in 0..ns {
                for &a in &axes {
                    let t = grid.fwd(s, a);
                    for dir in [1i8, -1] {
                        // Moving a unit across edge [s; a] adds ±([t] − [s]).
                        let mut next = chain.clone();
                        next[t] += dir;
                        next[s] -= dir;
                        let mass: usize = next.iter().map(|x| x.unsigned_abs() as usize).sum();
                        if mass > level {
                            continue;
                        }
                        let mut c = count;
                        c[a] += dir as i64;
                        if c[a].abs() > bound[a] {
                            continue;
                        }
                        if mass == 0 && c == target {
                            found = true;
                            break;
                        }
                        let st = (next, c);
                        if seen.contains(&st) {
                            continue;
                        }
                        if seen.len() >= state_cap {
                            capped = true;
                            continue;
                        }
                        seen.insert(st.clone());
                        queue.push_back(st);
                    }
                    if found {
                        break;
                    }
                }
                if found {
                    break;
                }
            }
            if found {
                break;
            }
        }
        if found {
            return Ok(WidthBracket {
                lower: if capped_any { lower } else { level as f64 },
                upper: Some(level as f64),
                capped: capped_any,
            });
        }
        if capped {
            capped_any = true;
        } else if !capped_any {
            lower = (level + 2) as f64;
        }
        level += 2;
    }
    Ok(WidthBracket { lower, upper: None, capped: capped_any })
}
