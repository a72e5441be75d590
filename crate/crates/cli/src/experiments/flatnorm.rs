//! Flat norm of 0-currents on a small two-torus against exhaustive matching.
//!
//! `F(S − T)` only depends on `R = S − T`, and the differences of pairs with
//! `M(S) + M(T) ≤ m` are exactly the chains with `M(R) ≤ m`, so enumerating `R`
//! up to translation covers every pair.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use ymh_core::currents::{flat_norm, flat_norm_lp, Cell, CubicalCurrent};
use ymh_core::lattice::{make_grid, Grid};

use super::{Check, Report};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::OutputDir;
use crate::random;

/// Signed unit points, sorted by site.
type Points = Vec<(usize, i64)>;

fn torus_l1(g: &Grid, a: usize, b: usize) -> f64 {
    (0..2)
        .map(|ax| {
            let d = g.dims()[ax] as i64;
            let k = (g.coord(a, ax) as i64 - g.coord(b, ax) as i64).rem_euclid(d);
            k.min(d - k) as f64 * g.spacing()[ax]
        })
        .sum()
}

/// Exhaustive minimum over partial matchings of positive to negative points:
/// matched pairs cost their lattice distance, unmatched points cost one each.
pub fn matching_distance(g: &Grid, points: &[(usize, i64)]) -> f64 {
    let plus: Vec<usize> = points.iter().filter(|p| p.1 > 0).map(|p| p.0).collect();
    let minus: Vec<usize> = points.iter().filter(|p| p.1 < 0).map(|p| p.0).collect();
    fn go(g: &Grid, i: usize, plus: &[usize], minus: &[usize], used: &mut [bool]) -> f64 {
        if i == plus.len() {
            return used.iter().filter(|&&u| !u).count() as f64;
        }
        let mut best = 1.0 + go(g, i + 1, plus, minus, used);
        for j in 0..minus.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(torus_l1(g, plus[i], minus[j]) + go(g, i + 1, plus, minus, used));
                used[j] = false;
            }
        }
        best
    }
    go(g, 0, &plus, &minus, &mut vec![false; minus.len()])
}

fn canonical(g: &Grid, pts: &Points) -> Points {
    let n = g.dims()[0] as i64;
    let mut best: Option<Points> = None;
    for dx in 0..n {
        for dy in 0..g.dims()[1] as i64 {
            let mut t: Points = pts
                .iter()
                .map(|&(s, m)| (g.site(&[g.coord(s, 0) as i64 + dx, g.coord(s, 1) as i64 + dy]), m))
                .collect();
            t.sort_unstable();
            if best.as_ref().map_or(true, |b| t < *b) {
                best = Some(t);
            }
        }
    }
    best.expect("grid is nonempty")
}

/// Every nonzero 0-chain of mass at most `max_mass`, one per translation class.
pub fn enumerate_chains(g: &Grid, max_mass: i64) -> Vec<Points> {
    let ns = g.num_sites();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    // Multisets of signed sites containing site 0, with one sign per site.
    fn extend(
        g: &Grid,
        ns: usize,
        cur: &mut Points,
        left: i64,
        seen: &mut HashSet<Points>,
        out: &mut Vec<Points>,
    ) {
        let key = canonical(g, cur);
        if seen.insert(key.clone()) {
            out.push(key);
        }
        if left == 0 {
            return;
        }
        let (last_site, last_sign) = *cur.last().expect("starts with site 0");
        for s in last_site..ns {
            for m in [1i64, -1] {
                if s == last_site && m != last_sign {
                    continue;
                }
                if s != last_site && cur.iter().any(|&(t, k)| t == s && k != m) {
                    continue;
                }
                cur.push((s, m));
                extend(g, ns, cur, left - 1, seen, out);
                cur.pop();
            }
        }
    }
    for m in [1i64, -1] {
        let mut cur = vec![(0usize, m)];
        extend(g, ns, &mut cur, max_mass - 1, &mut seen, &mut out);
    }
    out
}

fn to_current(g: &Arc<Grid>, pts: &[(usize, i64)]) -> CubicalCurrent {
    let mut c = CubicalCurrent::zero(g, 0, false);
    for &(s, m) in pts {
        c.add(Cell::new(s, &[]), m);
    }
    c
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub chains: usize,
    pub lp_mismatches: usize,
    pub flow_mismatches: usize,
    pub max_lp_error: f64,
}

pub fn oracle_sweep(cfg: &ExperimentConfig) -> Result<OracleOutcome, CliError> {
    let n = cfg.flatnorm.grid;
    let (g, _) = make_grid(2, &[n, n], &[1.0, 1.0], &[0])?;
    let chains = enumerate_chains(&g, cfg.flatnorm.max_mass);
    let zero = CubicalCurrent::zero(&g, 0, false);
    let rows: Vec<(f64, f64, f64)> = chains
        .par_iter()
        .map(|pts| {
            let c = to_current(&g, pts);
            let brute = matching_distance(&g, pts);
            let lp = flat_norm_lp(&c, &zero)?;
            let lp_value = if lp.integral { lp.value } else { f64::NAN };
            Ok((brute, lp_value, flat_norm(&c, &zero)?.value))
        })
        .collect::<Result<_, ymh_core::Error>>()?;
    // Values are sums of lattice spacings and units; compare in units of h/2.
    let q = |x: f64| (x * 2.0 * n as f64).round() as i64;
    let lp_mismatches = rows.iter().filter(|r| !(r.1.is_finite() && q(r.0) == q(r.1))).count();
    let flow_mismatches = rows.iter().filter(|r| q(r.0) != q(r.2)).count();
    let max_lp_error = rows.iter().map(|r| (r.0 - r.1).abs()).fold(0.0, f64::max);
    Ok(OracleOutcome { chains: chains.len(), lp_mismatches, flow_mismatches, max_lp_error })
}

/// Largest violation of symmetry and the triangle inequality over random triples.
pub fn metric_sweep(cfg: &ExperimentConfig) -> Result<(f64, f64, usize), CliError> {
    let n = cfg.flatnorm.grid;
    let (g, _) = make_grid(2, &[n, n], &[1.0, 1.0], &[0])?;
    let mut rng = random::rng(cfg.seed);
    let chain = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut c = CubicalCurrent::zero(&g, 0, false);
        for _ in 0..rng.gen_range(1..=3) {
            c.add(Cell::new(rng.gen_range(0..g.num_sites()), &[]), rng.gen_range(-2..=2));
        }
        c
    };
    let triples: Vec<[CubicalCurrent; 3]> =
        (0..cfg.flatnorm.triples).map(|_| [chain(&mut rng), chain(&mut rng), chain(&mut rng)]).collect();
    let rows: Vec<(f64, f64, bool)> = triples
        .par_iter()
        .map(|[a, b, c]| {
            let ab = flat_norm(a, b)?.value;
            let ba = flat_norm(b, a)?.value;
            let bc = flat_norm(b, c)?.value;
            let ac = flat_norm(a, c)?.value;
            let aa = flat_norm(a, a)?.value;
            let separated = a == b || ab > 0.0;
            Ok(((ab - ba).abs().max(aa), (ac - ab - bc).max(0.0), separated))
        })
        .collect::<Result<_, ymh_core::Error>>()?;
    let sym = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let tri = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let bad_sep = rows.iter().filter(|r| !r.2).count();
    Ok((sym, tri, bad_sep))
}

pub fn run_experiment(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let o = oracle_sweep(cfg)?;
    let (sym, tri, sep) = metric_sweep(cfg)?;
    let csv = format!(
        "chains,lpMismatches,flowMismatches,maxLpError,triples,maxSymmetryDefect,maxTriangleDefect,separationFailures\n{},{},{},{:.3e},{},{:.3e},{:.3e},{}\n",
        o.chains, o.lp_mismatches, o.flow_mismatches, o.max_lp_error, cfg.flatnorm.triples, sym, tri, sep
    );
    out.write("flatnorm.csv", csv.as_bytes())?;
    let mut report = Report::default();
    report.push(Check::new(
        "lp equals brute force",
        o.lp_mismatches == 0 && o.flow_mismatches == 0,
        format!("{} chains, {} LP and {} flow mismatches", o.chains, o.lp_mismatches, o.flow_mismatches),
    ));
    report.push(Check::new(
        "metric axioms",
        sym <= cfg.tol.metric && tri <= cfg.tol.metric && sep == 0,
        format!("symmetry {sym:.2e}, triangle {tri:.2e}, separation failures {sep}"),
    ));
    Ok(report)
}
