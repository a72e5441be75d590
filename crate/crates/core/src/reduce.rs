//! Fixed-order pairwise reductions.
//!
//! Sums are taken over a balanced binary tree whose shape depends only on the
//! input length, so results do not depend on the rayon thread count.

const LEAF: usize = 64;

/// Pairwise sum of `values`.
pub fn tree_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    tree_sum(&values[..mid]) + tree_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n`.
pub fn tree_sum_by(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    fn rec(lo: usize, hi: usize, f: &(impl Fn(usize) -> f64 + Sync)) -> f64 {
        if hi - lo <= LEAF {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, &f)
}

/// Maximum of `values`, or `f64::NEG_INFINITY` for an empty slice. NaN propagates.
pub fn max(values: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &v in values {
        if v.is_nan() {
            return f64::NAN;
        }
        if v > m {
            m = v;
        }
    }
    m
}
