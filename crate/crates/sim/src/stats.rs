//! Batch means for correlated increments.

use serde::Serialize;

/// Lag-1 autocorrelation target for merged batch means.
pub const LAG1_TARGET: f64 = 0.05;
pub const MIN_BATCHES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchStats {
    pub batch_means: Vec<f64>,
    pub n_batches: usize,
    /// Length of one batch in the unit of the increments (time or events).
    pub batch_len: f64,
    pub lag1: f64,
    pub mean: f64,
    pub mean_se: f64,
    /// `Var(batch sum) / batch_len`, the long-run variance rate.
    pub rate_var: f64,
    pub rate_var_se: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn variance(x: &[f64], m: f64) -> f64 {
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn lag1(x: &[f64]) -> f64 {
    let m = mean(x);
    let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if den == 0.0 {
        return 0.0;
    }
    x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / den
}

impl BatchStats {
    /// Statistics of `sums`, each the total of one batch of length `batch_len`, without merging.
    pub fn from_sums(sums: &[f64], batch_len: f64) -> Self {
        assert!(sums.len() >= 2, "need two batches");
        let k = sums.len() as f64;
        let means: Vec<f64> = sums.iter().map(|s| s / batch_len).collect();
        let m = mean(&means);
        let var_mean = variance(&means, m);
        let rate_var = var_mean * batch_len;
        BatchStats {
            n_batches: sums.len(),
            batch_len,
            lag1: lag1(&means),
            mean: m,
            mean_se: (var_mean / k).sqrt(),
            rate_var,
            // chi-square with k-1 degrees of freedom
            rate_var_se: rate_var * (2.0 / (k - 1.0)).sqrt(),
            batch_means: means,
        }
    }

    /// Doubles the batch length while the lag-1 autocorrelation of the batch means is above
    /// the target and statistically distinguishable from zero, keeping at least `min_batches`.
    pub fn merged(sums: &[f64], batch_len: f64, min_batches: usize) -> Self {
        let mut sums = sums.to_vec();
        let mut len = batch_len;
        loop {
            let st = Self::from_sums(&sums, len);
            let noise = 2.0 / (sums.len() as f64).sqrt();
            if st.lag1 <= LAG1_TARGET.max(noise) || sums.len() / 2 < min_batches {
                return st;
            }
            sums = sums.chunks_exact(2).map(|c| c[0] + c[1]).collect();
            len *= 2.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn iid(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn se_scales_like_inverse_root() {
        let a = BatchStats::from_sums(&iid(400, 1), 1.0);
        let b = BatchStats::from_sums(&iid(6400, 2), 1.0);
        let ratio = a.mean_se / b.mean_se;
        assert!((ratio - 4.0).abs() < 0.5, "{ratio}");
        let r2 = a.rate_var_se / b.rate_var_se;
        assert!((r2 - 4.0).abs() < 0.5, "{r2}");
        assert!((b.rate_var - 1.0).abs() < 4.0 * b.rate_var_se);
    }

    #[test]
    fn merging_removes_correlation() {
        // AR(1) with coefficient 0.9: long-run variance 1/(1-0.9)^2 = 100
        let e = iid(1 << 16, 3);
        let mut x = vec![0.0; e.len()];
        for i in 1..e.len() {
            x[i] = 0.9 * x[i - 1] + e[i];
        }
        let naive = BatchStats::from_sums(&x, 1.0);
        let st = BatchStats::merged(&x, 1.0, MIN_BATCHES);
        assert!(naive.rate_var < 10.0);
        assert!(st.batch_len > 1.0);
        assert!((st.rate_var - 100.0).abs() < 4.0 * st.rate_var_se + 10.0, "{}", st.rate_var);
    }

    #[test]
    fn independent_input_is_left_alone() {
        let st = BatchStats::merged(&iid(1000, 4), 1.0, MIN_BATCHES);
        assert_eq!(st.n_batches, 1000);
    }
}
