//! Linearly implicit preconditioners for the IMEX scheme.
//!
//! The section update solves `(1 + dt (L_0 + S)) x = r` where `L_0 = D_0^* D_0` is
//! the covariant Laplacian of the background connection. When the flux lives in a
//! single coordinate plane `(j, k)` this operator separates: after Fourier
//! transforms along `k` (and the remaining axis), the background phases become
//! diagonal shifts and the seam links chain the `j`-lines of different `k`-modes
//! into cyclic tridiagonal systems. The one-form update uses the plain lattice
//! Laplacian, which is diagonal in Fourier space.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::lattice::{pairs, Grid};

pub(crate) struct Imex {
    dt: f64,
    s_u: f64,
    s_alpha: f64,
    chain: Option<Chain>,
}

struct Chain {
    j: usize,
    k: usize,
    l: Option<usize>,
    m: i64,
    omega: f64,
}

impl Imex {
    pub(crate) fn new(grid: &Grid, dt: f64, eps: f64) -> Self {
        let nonzero: Vec<usize> = (0..grid.num_pairs()).filter(|&p| grid.flux()[p] != 0).collect();
        let chain = if nonzero.len() == 1 {
            let p = nonzero[0];
            let (j, k) = pairs(grid.n())[p];
            let l = (0..grid.n()).find(|&a| a != j && a != k);
            let m = grid.flux()[p];
            let omega = 2.0 * PI * m as f64 / (grid.lengths()[j] * grid.lengths()[k]);
            Some(Chain { j, k, l, m, omega })
        } else {
            None
        };
        let s = 1.0 / (eps * eps);
        Imex {
            dt,
            s_u: s,
            s_alpha: s,
            chain,
        }
    }

    /// Whether the section solve includes the background phases exactly.
    pub(crate) fn is_covariant(&self, grid: &Grid) -> bool {
        self.chain.is_some() || grid.flux().iter().all(|&m| m == 0)
    }

    pub(crate) fn solve_u(&self, grid: &Grid, r: &mut [Complex64]) {
        let plans = grid.plans();
        match &self.chain {
            None => {
                let (dt, s) = (self.dt, self.s_u);
                plans.apply_multiplier(r, |lam| 1.0 / (1.0 + dt * (lam + s)));
            }
            Some(c) => self.solve_chain(grid, c, r),
        }
    }

    fn solve_chain(&self, grid: &Grid, c: &Chain, r: &mut [Complex64]) {
        let plans = grid.plans();
        let (j, k) = (c.j, c.k);
        let dims = grid.dims();
        let h = grid.spacing();
        let st = grid.strides();
        if let Some(l) = c.l {
            plans.transform_axis(r, l, false);
        }
        plans.transform_axis(r, k, false);

        let nk = dims[k];
        let nj = dims[j];
        let nl = c.l.map(|l| dims[l]).unwrap_or(1);
        let g = gcd(c.m.unsigned_abs() as usize, nk);
        let off = self.dt / (h[j] * h[j]);
        let len = nj * nk / g;
        let mut nodes = Vec::with_capacity(len);
        let mut diag = Vec::with_capacity(len);
        let mut rhs = Vec::with_capacity(len);
        let mut work = CyclicWork::new(len);
        for ql in 0..nl {
            let lam_l = c.l.map(|l| plans.symbol_1d[l][ql]).unwrap_or(0.0);
            let base_l = c.l.map(|l| ql * st[l]).unwrap_or(0);
            for q0 in 0..g {
                nodes.clear();
                diag.clear();
                rhs.clear();
                let mut q = q0;
                loop {
                    let kappa = 2.0 * PI * q as f64 / nk as f64;
                    for i in 0..nj {
                        let idx = base_l + i * st[j] + q * st[k];
                        let phi = -h[k] * c.omega * i as f64 * h[j];
                        let kk = (2.0 - 2.0 * (kappa + phi).cos()) / (h[k] * h[k]);
                        nodes.push(idx);
                        diag.push(1.0 + self.dt * (self.s_u + 2.0 / (h[j] * h[j]) + kk + lam_l));
                        rhs.push(r[idx]);
                    }
                    q = (q as i64 - c.m).rem_euclid(nk as i64) as usize;
                    if q == q0 {
                        break;
                    }
                }
                work.solve(&diag, -off, &mut rhs);
                for (idx, x) in nodes.iter().zip(&rhs) {
                    r[*idx] = *x;
                }
            }
        }

        plans.transform_axis(r, k, true);
        let mut scale = 1.0 / nk as f64;
        if let Some(l) = c.l {
            plans.transform_axis(r, l, true);
            scale /= dims[l] as f64;
        }
        for z in r.iter_mut() {
            *z *= scale;
        }
    }

    /// Solves `(1 + dt (Δ + S)) x = r` componentwise for a one-form.
    pub(crate) fn solve_alpha(&self, grid: &Grid, r: &mut [f64]) {
        let n = grid.n();
        let ns = grid.num_sites();
        let (dt, s) = (self.dt, self.s_alpha);
        let mut comps: Vec<Vec<f64>> = (0..n)
            .map(|c| (0..ns).map(|i| r[i * n + c]).collect())
            .collect();
        let plans = grid.plans();
        let mult = |lam: f64| 1.0 / (1.0 + dt * (lam + s));
        let (a, rest) = comps.split_at_mut(1);
        plans.apply_multiplier_real_pair(&mut a[0], Some(&mut rest[0]), mult);
        if n == 3 {
            plans.apply_multiplier_real_pair(&mut rest[1], None, mult);
        }
        for i in 0..ns {
            for c in 0..n {
                r[i * n + c] = comps[c][i];
            }
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Scratch space for cyclic tridiagonal solves with a constant off-diagonal.
struct CyclicWork {
    bb: Vec<f64>,
    z: Vec<f64>,
    cp: Vec<f64>,
}

impl CyclicWork {
    fn new(len: usize) -> Self {
        CyclicWork {
            bb: vec![0.0; len],
            z: vec![0.0; len],
            cp: vec![0.0; len],
        }
    }

    /// Solves the symmetric cyclic system with diagonal `diag` and all
    /// off-diagonal entries (including the two corners) equal to `off`.
    fn solve(&mut self, diag: &[f64], off: f64, x: &mut [Complex64]) {
        let n = diag.len();
        let gamma = -diag[0];
        self.bb[..n].copy_from_slice(diag);
        self.bb[0] -= gamma;
        self.bb[n - 1] -= off * off / gamma;
        // Factor once, then solve for x and for the correction vector z.
        self.cp[0] = off / self.bb[0];
        for i in 1..n {
            let m = self.bb[i] - off * self.cp[i - 1];
            self.cp[i] = off / m;
            self.bb[i] = m;
        }
        thomas_apply(&self.bb, &self.cp, off, x);
        self.z[..n].iter_mut().for_each(|v| *v = 0.0);
        self.z[0] = gamma;
        self.z[n - 1] = off;
        thomas_apply_real(&self.bb, &self.cp, off, &mut self.z[..n]);
        let zf = 1.0 + self.z[0] + off * self.z[n - 1] / gamma;
        let fact = (x[0] + x[n - 1] * (off / gamma)) / zf;
        for i in 0..n {
            x[i] -= fact * self.z[i];
        }
    }
}

fn thomas_apply(m: &[f64], cp: &[f64], off: f64, x: &mut [Complex64]) {
    let n = x.len();
    x[0] /= m[0];
    for i in 1..n {
        x[i] = (x[i] - x[i - 1] * off) / m[i];
    }
    for i in (0..n - 1).rev() {
        x[i] = x[i] - x[i + 1] * cp[i];
    }
}

fn thomas_apply_real(m: &[f64], cp: &[f64], off: f64, x: &mut [f64]) {
    let n = x.len();
    x[0] /= m[0];
    for i in 1..n {
        x[i] = (x[i] - x[i - 1] * off) / m[i];
    }
    for i in (0..n - 1).rev() {
        x[i] -= x[i + 1] * cp[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_grid, BackgroundConnection};

    fn apply_m(bg: &BackgroundConnection, dt: f64, s: f64, x: &[Complex64]) -> Vec<Complex64> {
        let g = bg.grid();
        let n = g.n();
        let h = g.spacing();
        let ph = bg.link_phase();
        (0..g.num_sites())
            .map(|t| {
                let mut lap = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    let b = g.bwd(t, a);
                    lap += (2.0 * x[t] - ph[t * n + a] * x[g.fwd(t, a)] - ph[b * n + a].conj() * x[b])
                        / (h[a] * h[a]);
                }
                x[t] * (1.0 + dt * s) + lap * dt
            })
            .collect()
    }

    fn check(n: usize, dims: &[usize], lengths: &[f64], flux: &[i64]) {
        let (g, bg) = make_grid(n, dims, lengths, flux).unwrap();
        let im = Imex::new(&g, 0.01, 0.3);
        let r: Vec<Complex64> = (0..g.num_sites())
            .map(|i| Complex64::new((i as f64 * 0.731).sin(), (i as f64 * 0.377).cos()))
            .collect();
        let mut x = r.clone();
        im.solve_u(&g, &mut x);
        let back = apply_m(&bg, 0.01, 1.0 / 0.09, &x);
        let err = back.iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "residual {err}");
    }

    #[test]
    fn chain_solver_inverts_the_background_operator() {
        check(2, &[8, 6], &[1.0, 1.5], &[1]);
        check(2, &[8, 8], &[1.0, 1.0], &[-2]);
        check(2, &[6, 8], &[1.0, 1.0], &[0]);
        check(3, &[6, 4, 5], &[1.0, 1.0, 2.0], &[1, 0, 0]);
        check(3, &[4, 6, 8], &[1.0, 1.0, 1.0], &[0, 0, 3]);
        check(3, &[4, 6, 8], &[1.0, 1.0, 1.0], &[0, 2, 0]);
    }
}
