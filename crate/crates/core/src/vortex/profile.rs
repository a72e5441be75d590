//! Radial profiles of the degree-`k` vortex at unit coupling.
//!
//! With `u = f(r) e^{ikθ}` and `α = a(r) dθ` the first-order equations are
//! `f′ = (k − a) f / r`, `a′ = r (1 − f²) / 2`. Near the origin
//! `f ≈ c r^k (1 − r²/8)` and `a ≈ r²/4 − c² r^{2k+2} / (4(k+1))`; the shooting
//! parameter `c` is bisected between overshooting (`f > 1`) and undershooting
//! (`a > k`) trajectories. Past the radius where the bracketing trajectories
//! separate, `1 − f` and `k − a` continue along the decaying solutions
//! `K_0(r)` and `r K_1(r)` of the linearized system.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use crate::{Error, Result};

const R0: f64 = 1e-4;
const GEOMETRIC_END: f64 = 0.5;
pub const DEFAULT_STEP: f64 = 0.002;
pub const DEFAULT_R_MAX: f64 = 30.0;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub r: f64,
    pub f: f64,
    pub a: f64,
    pub df: f64,
    pub da: f64,
}

/// Vortex profile of degree `k`. Samples are stored for `|k|`; negative degrees
/// share `f` and flip the sign of `a`.
#[derive(Debug, Clone)]
pub struct VortexProfile {
    k: i64,
    r_max: f64,
    samples: Vec<ProfileSample>,
    shooting: f64,
    patch_radius: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileEnergy {
    pub value: f64,
    /// `value / (2π|k|) − 1`, zero for `k = 0`.
    pub defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Overshoot,
    Undershoot,
    Undecided,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Overshoot => "overshoot (f > 1)",
            Outcome::Undershoot => "undershoot (a > k)",
            Outcome::Undecided => "no decision before r_max",
        })
    }
}

fn rhs(k: f64, r: f64, f: f64, a: f64) -> (f64, f64) {
    ((k - a) * f / r, 0.5 * r * (1.0 - f * f))
}

fn mesh(r_max: f64, dr: f64) -> Vec<f64> {
    let q = 1.0 + dr / GEOMETRIC_END;
    let mut r = vec![R0];
    while r.last().unwrap() * q < GEOMETRIC_END {
        r.push(r.last().unwrap() * q);
    }
    let linear = ((r_max - GEOMETRIC_END) / dr).round() as usize;
    let step = (r_max - GEOMETRIC_END) / linear as f64;
    for i in 0..=linear {
        r.push(GEOMETRIC_END + i as f64 * step);
    }
    r
}

struct Shot {
    outcome: Outcome,
    f: Vec<f64>,
    a: Vec<f64>,
}

fn shoot(k: f64, c: f64, mesh: &[f64]) -> Shot {
    let r0 = mesh[0];
    let mut f = c * r0.powf(k) * (1.0 - r0 * r0 / 8.0);
    let mut a = r0 * r0 / 4.0 - c * c * r0.powf(2.0 * k + 2.0) / (4.0 * (k + 1.0));
    let mut fs = vec![f];
    let mut as_ = vec![a];
    for w in mesh.windows(2) {
        let (r, h) = (w[0], w[1] - w[0]);
        let (k1f, k1a) = rhs(k, r, f, a);
        let (k2f, k2a) = rhs(k, r + 0.5 * h, f + 0.5 * h * k1f, a + 0.5 * h * k1a);
        let (k3f, k3a) = rhs(k, r + 0.5 * h, f + 0.5 * h * k2f, a + 0.5 * h * k2a);
        let (k4f, k4a) = rhs(k, r + h, f + h * k3f, a + h * k3a);
        f += h * (k1f + 2.0 * k2f + 2.0 * k3f + k4f) / 6.0;
        a += h * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0;
        fs.push(f);
        as_.push(a);
        if f > 1.0 {
            return Shot { outcome: Outcome::Overshoot, f: fs, a: as_ };
        }
        if a > k || f < 0.0 {
            return Shot { outcome: Outcome::Undershoot, f: fs, a: as_ };
        }
    }
    Shot { outcome: Outcome::Undecided, f: fs, a: as_ }
}

/// `e^z K_ν(z)` for `ν ∈ {0, 1}` by the trapezoid rule on
/// `∫_0^∞ e^{−z(cosh t − 1)} cosh(νt) dt`, which converges geometrically.
fn scaled_bessel_k(nu: f64, z: f64) -> f64 {
    let dt: f64 = 0.02;
    let mut sum = 0.5;
    let mut t = dt;
    loop {
        let e = z * (t.cosh() - 1.0);
        if e > 60.0 {
            break;
        }
        sum += (-e).exp() * (nu * t).cosh();
        t += dt;
    }
    sum * dt
}

impl VortexProfile {
    /// Solves for the degree-`k` profile on `[0, r_max]` with the default mesh step.
    pub fn solve(k: i64, r_max: f64, tol: f64) -> Result<Self> {
        Self::solve_with_step(k, r_max, tol, DEFAULT_STEP)
    }

    pub fn solve_with_step(k: i64, r_max: f64, tol: f64, dr: f64) -> Result<Self> {
        if !(r_max >= 20.0) {
            return Err(Error::InvalidArgument(format!("r_max = {r_max} is below 20")));
        }
        if !(dr > 0.0 && dr <= 0.05) {
            return Err(Error::InvalidArgument(format!("mesh step {dr} is outside (0, 0.05]")));
        }
        if !(tol > 0.0 && tol < 1e-3) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} is outside (0, 1e-3)")));
        }
        let mesh = mesh(r_max, dr);
        if k == 0 {
            let samples = mesh
                .iter()
                .map(|&r| ProfileSample { r, f: 1.0, a: 0.0, df: 0.0, da: 0.0 })
                .collect();
            return Ok(VortexProfile { k, r_max, samples, shooting: 0.0, patch_radius: r_max });
        }
        let kk = k.unsigned_abs() as f64;
        let (mut lo, mut hi) = (1e-3, 10.0);
        let mut lo_shot = shoot(kk, lo, &mesh);
        let mut hi_shot = shoot(kk, hi, &mesh);
        let mut expansions = 0;
        while lo_shot.outcome == Outcome::Overshoot && expansions < 20 {
            lo *= 0.1;
            lo_shot = shoot(kk, lo, &mesh);
            expansions += 1;
        }
        while hi_shot.outcome == Outcome::Undershoot && expansions < 40 {
            hi *= 10.0;
            hi_shot = shoot(kk, hi, &mesh);
            expansions += 1;
        }
        if lo_shot.outcome != Outcome::Undershoot || hi_shot.outcome != Outcome::Overshoot {
            return Err(Error::NoBracket {
                lo,
                hi,
                lo_outcome: lo_shot.outcome.to_string(),
                hi_outcome: hi_shot.outcome.to_string(),
            });
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let s = shoot(kk, mid, &mesh);
            match s.outcome {
                Outcome::Overshoot => {
                    hi = mid;
                    hi_shot = s;
                }
                Outcome::Undershoot => {
                    lo = mid;
                    lo_shot = s;
                }
                Outcome::Undecided => {
                    lo = mid;
                    hi = mid;
                    lo_shot = Shot { outcome: s.outcome, f: s.f.clone(), a: s.a.clone() };
                    hi_shot = s;
                    break;
                }
            }
        }

        // Last node where the bracketing trajectories still agree.
        let len = lo_shot.f.len().min(hi_shot.f.len());
        let mut p = 0;
        while p + 1 < len {
            let i = p + 1;
            let (f, a) = (0.5 * (lo_shot.f[i] + hi_shot.f[i]), 0.5 * (lo_shot.a[i] + hi_shot.a[i]));
            let df = (lo_shot.f[i] - hi_shot.f[i]).abs();
            let da = (lo_shot.a[i] - hi_shot.a[i]).abs();
            if df > 1e-6 * (1.0 - f).abs() || da > 1e-6 * (kk - a).abs() {
                break;
            }
            p = i;
        }
        let mut samples = Vec::with_capacity(mesh.len());
        for i in 0..=p {
            let (f, a) = (0.5 * (lo_shot.f[i] + hi_shot.f[i]), 0.5 * (lo_shot.a[i] + hi_shot.a[i]));
            let (df, da) = rhs(kk, mesh[i], f, a);
            samples.push(ProfileSample { r: mesh[i], f, a, df, da });
        }
        let rp = mesh[p];
        let gp = 1.0 - samples[p].f;
        let bp = kk - samples[p].a;
        let (s0p, s1p) = (scaled_bessel_k(0.0, rp), scaled_bessel_k(1.0, rp));
        for &r in &mesh[p + 1..] {
            let decay = (-(r - rp)).exp();
            let (s0, s1) = (scaled_bessel_k(0.0, r), scaled_bessel_k(1.0, r));
            let g = gp * decay * s0 / s0p;
            let b = bp * r * decay * s1 / (rp * s1p);
            // (K_0)′ = −K_1 and (r K_1)′ = −r K_0.
            let df = gp * decay * s1 / s0p;
            let da = bp * r * decay * s0 / (rp * s1p);
            samples.push(ProfileSample { r, f: 1.0 - g, a: kk - b, df, da });
        }
        let profile = VortexProfile { k, r_max, samples, shooting: 0.5 * (lo + hi), patch_radius: rp };
        let last = profile.samples.last().unwrap();
        if last.f < 1.0 - tol.max(1e-6) || last.a < kk - 1e-5 {
            return Err(Error::InvalidArgument(format!(
                "profile did not converge: f(r_max) = {}, a(r_max) = {}",
                last.f, last.a
            )));
        }
        Ok(profile)
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Coefficient `c` of `f ≈ c r^{|k|}` at the origin.
    pub fn shooting_coefficient(&self) -> f64 {
        self.shooting
    }

    /// Radius past which the asymptotic tail replaces the integrated solution.
    pub fn patch_radius(&self) -> f64 {
        self.patch_radius
    }

    /// Samples for `|k|`.
    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    fn sign(&self) -> f64 {
        if self.k < 0 {
            -1.0
        } else {
            1.0
        }
    }

    /// `(f(r), a(r))`: cubic Hermite between nodes, clamped to the node values,
    /// the series below the first node and `(1, k)` past `r_max`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if self.k == 0 {
            return (1.0, 0.0);
        }
        let kk = self.k.unsigned_abs() as f64;
        let s = &self.samples;
        if r <= s[0].r {
            let c = self.shooting;
            let f = c * r.powf(kk) * (1.0 - r * r / 8.0);
            let a = r * r / 4.0 - c * c * r.powf(2.0 * kk + 2.0) / (4.0 * (kk + 1.0));
            return (f, self.sign() * a);
        }
        if r >= self.r_max {
            return (1.0, self.sign() * kk);
        }
        let i = s.partition_point(|x| x.r <= r) - 1;
        let (p, q) = (&s[i], &s[i + 1]);
        let h = q.r - p.r;
        let t = (r - p.r) / h;
        let herm = |y0: f64, y1: f64, d0: f64, d1: f64| {
            let t2 = t * t;
            let t3 = t2 * t;
            let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * h * d0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * h * d1;
            v.clamp(y0.min(y1), y0.max(y1))
        };
        (herm(p.f, q.f, p.df, q.df), self.sign() * herm(p.a, q.a, p.da, q.da))
    }

    /// Derivatives of the interpolant.
    fn eval_derivative(&self, r: f64) -> (f64, f64) {
        let s = &self.samples;
        let i = s.partition_point(|x| x.r <= r).saturating_sub(1).min(s.len() - 2);
        let (p, q) = (&s[i], &s[i + 1]);
        let h = q.r - p.r;
        let t = (r - p.r) / h;
        let dherm = |y0: f64, y1: f64, d0: f64, d1: f64| {
            let t2 = t * t;
            ((6.0 * t2 - 6.0 * t) * y0 + (6.0 * t2 - 6.0 * t) * -y1) / h
                + (3.0 * t2 - 4.0 * t + 1.0) * d0
                + (3.0 * t2 - 2.0 * t) * d1
        };
        (dherm(p.f, q.f, p.df, q.df), dherm(p.a, q.a, p.da, q.da))
    }

    /// Largest Bogomolny residual `max(|f′ − (k − a)f/r|, |a′/r − (1 − f²)/2|)`
    /// over nodes and interval midpoints.
    pub fn bogomolny_residual(&self) -> f64 {
        if self.k == 0 {
            return 0.0;
        }
        let kk = self.k.unsigned_abs() as f64;
        let mut worst: f64 = 0.0;
        let mut check = |r: f64, f: f64, a: f64, df: f64, da: f64| {
            let (ef, ea) = rhs(kk, r, f, a);
            worst = worst.max((df - ef).abs()).max(((da - ea) / r).abs());
        };
        for (i, s) in self.samples.iter().enumerate() {
            check(s.r, s.f, s.a, s.df, s.da);
            if let Some(q) = self.samples.get(i + 1) {
                let r = 0.5 * (s.r + q.r);
                let (f, a) = self.eval(r);
                let (df, da) = self.eval_derivative(r);
                check(r, f, self.sign() * a, df, da);
            }
        }
        worst
    }

    /// `2π ∫ (f′² + (k − a)² f²/r² + (a′/r)² + (1 − f²)²/4) r dr` by the
    /// trapezoid rule on the mesh.
    pub fn energy(&self) -> ProfileEnergy {
        if self.k == 0 {
            return ProfileEnergy { value: 0.0, defect: 0.0 };
        }
        let kk = self.k.unsigned_abs() as f64;
        let integrand = |s: &ProfileSample| {
            let (r, f, a) = (s.r, s.f, s.a);
            let w = 1.0 - f * f;
            (s.df * s.df + (kk - a).powi(2) * f * f / (r * r) + (s.da / r).powi(2) + 0.25 * w * w) * r
        };
        let s = &self.samples;
        // The integrand vanishes at r = 0.
        let mut total = 0.5 * s[0].r * integrand(&s[0]);
        for w in s.windows(2) {
            total += 0.5 * (w[1].r - w[0].r) * (integrand(&w[0]) + integrand(&w[1]));
        }
        let value = 2.0 * PI * total;
        ProfileEnergy { value, defect: value / (2.0 * PI * kk) - 1.0 }
    }

    /// CSV rows `r, f, a, residual_f, residual_a` at the nodes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,f,a,residual_f,residual_a")?;
        let kk = self.k.unsigned_abs() as f64;
        for s in &self.samples {
            let (ef, ea) = rhs(kk, s.r, s.f, s.a);
            let (rf, ra) = if self.k == 0 { (0.0, 0.0) } else { (s.df - ef, (s.da - ea) / s.r) };
            writeln!(w, "{:.17e},{:.17e},{:.17e},{:.3e},{:.3e}", s.r, s.f, self.sign() * s.a, rf, ra)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_bessel_matches_reference_values() {
        // K_0(1) = 0.42102443824070834, K_1(1) = 0.6019072301972346.
        assert!((scaled_bessel_k(0.0, 1.0) * (-1.0f64).exp() - 0.42102443824070834).abs() < 1e-12);
        assert!((scaled_bessel_k(1.0, 1.0) * (-1.0f64).exp() - 0.6019072301972346).abs() < 1e-12);
        // K_0(10) = 1.778006231616919e-5.
        assert!((scaled_bessel_k(0.0, 10.0) * (-10.0f64).exp() / 1.778006231616919e-5 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degree_one_profile_is_self_dual() {
        let p = VortexProfile::solve(1, DEFAULT_R_MAX, DEFAULT_TOL).unwrap();
        assert!(p.bogomolny_residual() < 1e-8, "{}", p.bogomolny_residual());
        assert!(p.energy().defect.abs() < 5e-3);
    }
}
