//! Transition statistics of the active-site occupation inside avalanches.

use aap_model::{toppling_prob, ModelParams};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::aap::{SimConfig, Simulator};
use crate::SimError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiWalkStats {
    pub n: usize,
    pub p: usize,
    pub q: f64,
    pub avalanches: u64,
    /// `counts[a] = [#(a -> a-1), #(a -> a), #(a -> a+1)]`.
    pub counts: Vec<[u64; 3]>,
}

/// One row of the comparison against the mean-field walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiRow {
    pub a: usize,
    pub trials: u64,
    pub observed: [f64; 3],
    pub predicted: [f64; 3],
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub inside: bool,
}

/// Mean-field probabilities of `a -> a-1, a, a+1`: the next site is occupied with
/// probability `ρ - a/N`, and all `a` particles move on with probability `μ_a`.
pub fn rw_probabilities(m: &ModelParams, a: usize) -> [f64; 3] {
    let occ = m.rho - a as f64 / m.n as f64;
    let mu = toppling_prob(a, m.q).expect("a >= 1");
    [(1.0 - occ) * (1.0 - mu), (1.0 - occ) * mu + occ * (1.0 - mu), occ * mu]
}

/// Wilson score interval for a binomial proportion at two-sided level `level`.
pub fn wilson(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.5 + level / 2.0);
    let n = trials as f64;
    let ph = successes as f64 / n;
    let d = 1.0 + z * z / n;
    let c = (ph + z * z / (2.0 * n)) / d;
    let h = z * (ph * (1.0 - ph) / n + z * z / (4.0 * n * n)).sqrt() / d;
    (c - h, c + h)
}

impl ChiWalkStats {
    pub fn frequencies(&self, a: usize) -> [f64; 3] {
        let tot = self.counts[a].iter().sum::<u64>() as f64;
        self.counts[a].map(|c| c as f64 / tot)
    }

    pub fn compare(&self, m: &ModelParams, a: usize, level: f64) -> ChiRow {
        let trials = self.counts[a].iter().sum::<u64>();
        let predicted = rw_probabilities(m, a);
        let mut row = ChiRow { a, trials, observed: self.frequencies(a), predicted, lower: [0.0; 3], upper: [0.0; 3], inside: true };
        for k in 0..3 {
            let (lo, hi) = wilson(self.counts[a][k], trials, level);
            row.lower[k] = lo;
            row.upper[k] = hi;
            row.inside &= (lo..=hi).contains(&predicted[k]);
        }
        row
    }
}

/// Runs the totally asymmetric process until `n_avalanches` seeding jumps have hit an
/// occupied site, recording active-site transitions for `a <= a_max`.
pub fn chi_walk_stats(m: &ModelParams, n_avalanches: u64, seed: u64, a_max: usize) -> Result<ChiWalkStats, SimError> {
    if m.r != 1.0 {
        return Err(SimError::BadInput(format!("the walk statistics need R = 1 (got {})", m.r)));
    }
    let cfg = SimConfig::default();
    let mut sim = Simulator::new(m, seed, 0, &cfg)?;
    sim.burn_in(cfg.burn_in_events(m));
    sim.record_chi(a_max);
    let mut avalanches = 0;
    while avalanches < n_avalanches {
        if sim.step().steps > 0 {
            avalanches += 1;
        }
    }
    if sim.tainted {
        return Err(SimError::Tainted);
    }
    Ok(ChiWalkStats { n: m.n, p: m.p, q: m.q, avalanches, counts: sim.chi.take().expect("recording on").counts })
}
