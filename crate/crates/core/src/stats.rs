//! Order-stable reductions.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation; the result depends only on the slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Monte-Carlo mean with its standard error, both from the same sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub seed: u64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64], seed: u64) -> Self {
        let n = xs.len();
        let m = mean(xs);
        let se = if n < 2 {
            0.0
        } else {
            let dev: Vec<f64> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
            libm::sqrt(pairwise_sum(&dev) / (n - 1) as f64 / n as f64)
        };
        // A constant sample has zero spread even if the mean rounds.
        let se = if xs.iter().all(|&x| x == xs[0]) { 0.0 } else { se };
        let value = if n > 0 && se == 0.0 { xs[0] } else { m };
        MeanEstimate { value, std_error: se, n, seed }
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_sample_is_exact() {
        let xs = vec![0.1; 1001];
        let m = MeanEstimate::from_samples(&xs, 0);
        assert_eq!(m.value, 0.1);
        assert_eq!(m.std_error, 0.0);
    }

    #[test]
    fn pairwise_matches_naive_on_small_ints() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((ls_slope(&xs, &ys) - 2.0).abs() < 1e-14);
    }
}
