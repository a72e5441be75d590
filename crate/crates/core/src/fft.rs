//! Multi-dimensional FFTs and the cubical Laplacian symbol.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Plans {
    dims: Vec<usize>,
    strides: Vec<usize>,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
    /// Per axis: `(4/h²) sin²(π q / N)` for `q in 0..N`.
    pub(crate) symbol_1d: Vec<Vec<f64>>,
    /// Scalar Laplacian symbol at every Fourier index (same layout as sites).
    pub(crate) symbol: Vec<f64>,
}

impl Plans {
    pub(crate) fn new(dims: &[usize], spacing: &[f64]) -> Self {
        let mut planner = FftPlanner::new();
        let n = dims.len();
        let mut strides = vec![1; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        let fwd = dims.iter().map(|&d| planner.plan_fft_forward(d)).collect();
        let inv = dims.iter().map(|&d| planner.plan_fft_inverse(d)).collect();
        let symbol_1d: Vec<Vec<f64>> = dims
            .iter()
            .zip(spacing)
            .map(|(&d, &h)| {
                (0..d)
                    .map(|q| {
                        let s = (std::f64::consts::PI * q as f64 / d as f64).sin();
                        4.0 * s * s / (h * h)
                    })
                    .collect()
            })
            .collect();
        let total: usize = dims.iter().product();
        let symbol = (0..total)
            .map(|idx| {
                let mut lam = 0.0;
                for a in 0..n {
                    lam += symbol_1d[a][(idx / strides[a]) % dims[a]];
                }
                lam
            })
            .collect();
        Plans {
            dims: dims.to_vec(),
            strides,
            fwd,
            inv,
            symbol_1d,
            symbol,
        }
    }

    /// Unnormalized transform along one axis.
    pub(crate) fn transform_axis(&self, data: &mut [Complex64], axis: usize, inverse: bool) {
        let len = self.dims[axis];
        let plan = if inverse { &self.inv[axis] } else { &self.fwd[axis] };
        let stride = self.strides[axis];
        if stride == 1 {
            plan.process(data);
            return;
        }
        let block = len * stride;
        let mut buf = vec![Complex64::new(0.0, 0.0); data.len()];
        let mut line = 0;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for i in 0..len {
                    buf[line * len + i] = data[base + i * stride];
                }
                line += 1;
            }
        }
        plan.process(&mut buf);
        line = 0;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for i in 0..len {
                    data[base + i * stride] = buf[line * len + i];
                }
                line += 1;
            }
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        for a in 0..self.dims.len() {
            self.transform_axis(data, a, false);
        }
    }

    /// Inverse transform including the `1/N` normalization.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        for a in 0..self.dims.len() {
            self.transform_axis(data, a, true);
        }
        let scale = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    /// Applies the Fourier multiplier `m(λ)` of the scalar Laplacian to a complex field.
    pub(crate) fn apply_multiplier(&self, data: &mut [Complex64], m: impl Fn(f64) -> f64) {
        self.forward(data);
        for (z, &lam) in data.iter_mut().zip(&self.symbol) {
            *z *= m(lam);
        }
        self.inverse(data);
    }

    /// Applies a real even multiplier to two real fields at once by packing them
    /// into the real and imaginary parts of one complex field.
    pub(crate) fn apply_multiplier_real_pair(
        &self,
        a: &mut [f64],
        b: Option<&mut [f64]>,
        m: impl Fn(f64) -> f64,
    ) {
        let mut z: Vec<Complex64> = match &b {
            Some(b) => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        self.apply_multiplier(&mut z, m);
        for (x, w) in a.iter_mut().zip(&z) {
            *x = w.re;
        }
        if let Some(b) = b {
            for (y, w) in b.iter_mut().zip(&z) {
                *y = w.im;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_round_trip() {
        let dims = [4, 6, 5];
        let p = Plans::new(&dims, &[0.25, 0.2, 0.2]);
        let orig: Vec<Complex64> = (0..120)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut z = orig.clone();
        p.forward(&mut z);
        p.inverse(&mut z);
        for (a, b) in z.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
