//! Spectral Poisson solves, Hodge decomposition of one-forms, Coulomb gauge and
//! the reduction of the harmonic part modulo large gauges.
//!
//! The Hodge Laplacian of the periodic cubical complex acts on each component of
//! a form as the scalar lattice Laplacian, whose Fourier symbol is
//! `Σ_j (4/h_j²) sin²(π q_j / N_j)`.

use std::f64::consts::PI;

use crate::functional::PairState;
use crate::lattice::{d, d_star, gauge_transform, FormField, Gauge};
use crate::reduce::tree_sum;
use crate::{Error, Result};

/// Exact + coexact + harmonic split of a one-form.
#[derive(Debug, Clone)]
pub struct HodgeSplit {
    pub exact: FormField,
    pub coexact: FormField,
    pub harmonic: FormField,
}

impl HodgeSplit {
    /// Constant coefficient of the harmonic part along each axis.
    pub fn harmonic_coefficients(&self) -> Vec<f64> {
        let n = self.harmonic.grid().n();
        (0..n).map(|j| self.harmonic.values()[j]).collect()
    }
}

/// Inverse Laplacian applied componentwise to a form of any degree after removing
/// each component's mean.
pub(crate) fn inverse_laplacian(f: &FormField) -> FormField {
    let g = f.grid().clone();
    let c = f.components();
    let ns = g.num_sites();
    let plans = g.plans();
    let mut comps: Vec<Vec<f64>> = (0..c)
        .map(|k| (0..ns).map(|s| f.values()[s * c + k]).collect())
        .collect();
    let inv = |lam: f64| if lam > 0.0 { 1.0 / lam } else { 0.0 };
    let mut k = 0;
    while k < c {
        let (head, tail) = comps.split_at_mut(k + 1);
        let b = tail.first_mut().map(|v| v.as_mut_slice());
        plans.apply_multiplier_real_pair(&mut head[k], b, inv);
        k += 2;
    }
    FormField::from_fn(&g, f.degree(), |i| comps[i % c][i / c])
}

/// Solves `d*dθ = f` for mean-zero `f`, returning the mean-zero solution.
pub fn poisson_solve(f: &FormField) -> Result<FormField> {
    if f.degree() != 0 {
        return Err(Error::Degree(format!("poisson_solve needs a 0-form, got degree {}", f.degree())));
    }
    let g = f.grid();
    let v = g.cell_volume();
    let mean = v * tree_sum(f.values());
    let scale: f64 = v * f.values().iter().map(|x| x.abs()).sum::<f64>();
    if mean.abs() > 1e-10 * (1.0 + scale) {
        return Err(Error::NonzeroMean { defect: mean });
    }
    Ok(inverse_laplacian(f))
}

/// Per-axis mean of a one-form as a constant one-form.
fn harmonic_part(alpha: &FormField) -> FormField {
    let g = alpha.grid();
    let n = g.n();
    let ns = g.num_sites() as f64;
    let means: Vec<f64> = (0..n)
        .map(|j| {
            let comp: Vec<f64> = alpha.values().iter().skip(j).step_by(n).cloned().collect();
            tree_sum(&comp) / ns
        })
        .collect();
    FormField::from_fn(g, 1, |l| means[l % n])
}

/// `Qλ = −Δ⁻¹ d*λ`, so that `λ + dQλ` is co-closed.
pub fn q_operator(lambda: &FormField) -> Result<FormField> {
    if lambda.degree() != 1 {
        return Err(Error::Degree("Q acts on one-forms".into()));
    }
    let ds = d_star(lambda)?;
    Ok(inverse_laplacian(&ds.scaled(-1.0)))
}

/// Projection onto co-closed forms, `Pλ = λ + dQλ`.
pub fn p_project(lambda: &FormField) -> Result<FormField> {
    let q = q_operator(lambda)?;
    lambda.add_scaled(1.0, &d(&q)?)
}

pub fn hodge_decompose(alpha: &FormField) -> Result<HodgeSplit> {
    if alpha.degree() != 1 {
        return Err(Error::Degree("Hodge decomposition acts on one-forms".into()));
    }
    let harmonic = harmonic_part(alpha);
    let psi = inverse_laplacian(&d_star(alpha)?);
    let exact = d(&psi)?;
    let coexact = alpha
        .add_scaled(-1.0, &exact)?
        .add_scaled(-1.0, &harmonic)?;
    Ok(HodgeSplit {
        exact,
        coexact,
        harmonic,
    })
}

/// Gauge transformation by `θ = Δ⁻¹(−d*α)`, leaving `d*α = 0`.
pub fn coulomb_project(pair: &PairState) -> Result<PairState> {
    let theta = q_operator(&pair.alpha)?;
    gauge_transform(pair, &Gauge::small(theta))
}

/// Nearest integer with ties broken toward the smaller one.
fn nearest_int_low(x: f64) -> i64 {
    (x - 0.5).ceil() as i64
}

/// Coulomb gauge followed by a winding gauge that brings every harmonic
/// coefficient into `[−π/ℓ_j, π/ℓ_j]`.
pub fn normalize_gauge(pair: &PairState) -> Result<PairState> {
    let c = coulomb_project(pair)?;
    let g = c.grid().clone();
    let h = harmonic_part(&c.alpha);
    let w: Vec<i64> = (0..g.n())
        .map(|j| -nearest_int_low(h.values()[j] * g.lengths()[j] / (2.0 * PI)))
        .collect();
    if w.iter().all(|&x| x == 0) {
        return Ok(c);
    }
    gauge_transform(&c, &Gauge::winding(&g, &w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_to_the_smaller_integer() {
        assert_eq!(nearest_int_low(2.5), 2);
        assert_eq!(nearest_int_low(-2.5), -3);
        assert_eq!(nearest_int_low(2.51), 3);
        assert_eq!(nearest_int_low(-0.2), 0);
    }
}
