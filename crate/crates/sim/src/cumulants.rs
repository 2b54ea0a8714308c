//! Scaled cumulants of `Y_t` and avalanche-size statistics from simulated event streams.

use std::collections::BTreeMap;

use aap_model::{CumulantResult, ModelParams, Source};
use rayon::prelude::*;
use serde::Serialize;

use crate::aap::{SimConfig, Simulator, RNG_ALGORITHM};
use crate::stats::{BatchStats, MIN_BATCHES};
use crate::SimError;

pub const MIN_EVENTS_PER_BATCH: f64 = 1000.0;

/// Running first and second moments of the signed sizes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, s: i64) {
        self.n += 1;
        self.sum += s as f64;
        self.sum_sq += (s * s) as f64;
    }

    fn merge(self, o: Moments) -> Moments {
        Moments { n: self.n + o.n, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn var(&self) -> f64 {
        let m = self.mean();
        (self.sum_sq / self.n as f64 - m * m) * self.n as f64 / (self.n as f64 - 1.0)
    }
}

/// Output of [`estimate_cumulants`]; field names follow the summary schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimCumulants {
    pub n: usize,
    pub p: usize,
    pub q: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub seed: u64,
    pub replicas: u64,
    pub rng: &'static str,
    pub t_max: f64,
    pub n_events: u64,
    /// Integrated current over all replicas, `Σ S`.
    #[serde(rename = "Y")]
    pub y: i64,
    #[serde(rename = "J_hat")]
    pub j_hat: f64,
    #[serde(rename = "J_se")]
    pub j_se: f64,
    #[serde(rename = "Delta_hat")]
    pub delta_hat: f64,
    #[serde(rename = "Delta_se")]
    pub delta_se: f64,
    #[serde(rename = "mean_S")]
    pub mean_s: f64,
    #[serde(rename = "var_S")]
    pub var_s: f64,
    pub n_batches: usize,
    pub batch_time: f64,
    pub lag1: f64,
    pub tainted: bool,
}

impl SimCumulants {
    pub fn to_result(&self) -> CumulantResult {
        CumulantResult {
            n: self.n,
            j: self.j_hat,
            delta: Some(self.delta_hat),
            source: Source::Simulation,
            j_se: Some(self.j_se),
            delta_se: Some(self.delta_se),
        }
    }

    /// `p · mean_S`: the current read off the event clock `n_events / p` instead of `t`.
    pub fn j_from_sizes(&self) -> f64 {
        self.p as f64 * self.mean_s
    }
}

struct Replica {
    y: i64,
    stats: BatchStats,
    moments: Moments,
    tainted: bool,
}

fn run_replica(m: &ModelParams, t_max: f64, n_batches: usize, seed: u64, replica: u64, cfg: &SimConfig) -> Result<Replica, SimError> {
    let mut sim = Simulator::new(m, seed, replica, cfg)?;
    sim.burn_in(cfg.burn_in_events(m));
    let tau = t_max / n_batches as f64;
    let mut sums = vec![0.0; n_batches];
    let mut moments = Moments::default();
    let (mut b, mut y_start) = (0usize, 0i64);
    loop {
        let y_before = sim.state.y;
        let rec = sim.step();
        let t = sim.state.t;
        while b < n_batches && t > (b + 1) as f64 * tau {
            sums[b] = (y_before - y_start) as f64;
            y_start = y_before;
            b += 1;
        }
        if b == n_batches {
            // this event falls beyond t_max
            return Ok(Replica { y: y_before, stats: BatchStats::merged(&sums, tau, MIN_BATCHES), moments, tainted: sim.tainted });
        }
        moments.push(rec.s);
    }
}

/// Single-replica estimate; see [`estimate_cumulants_with`].
pub fn estimate_cumulants(m: &ModelParams, t_max: f64, n_batches: usize, seed: u64) -> Result<SimCumulants, SimError> {
    estimate_cumulants_with(m, t_max, n_batches, seed, 1, &SimConfig::default())
}

/// `J_hat = Y/t`, `Delta_hat` from batch-means variance of the increments, over
/// `replicas` independent streams run in parallel and averaged.
pub fn estimate_cumulants_with(
    m: &ModelParams,
    t_max: f64,
    n_batches: usize,
    seed: u64,
    replicas: u64,
    cfg: &SimConfig,
) -> Result<SimCumulants, SimError> {
    let per_batch = m.p as f64 * t_max / n_batches as f64;
    if n_batches < MIN_BATCHES || per_batch < MIN_EVENTS_PER_BATCH || replicas == 0 {
        return Err(SimError::InsufficientBatches { n_batches, events_per_batch: per_batch, replicas });
    }
    let reps: Vec<Replica> = (0..replicas)
        .into_par_iter()
        .map(|r| run_replica(m, t_max, n_batches, seed, r, cfg))
        .collect::<Result<_, _>>()?;
    let k = replicas as f64;
    let mean_of = |f: &dyn Fn(&Replica) -> f64| reps.iter().map(f).sum::<f64>() / k;
    let pooled_se = |f: &dyn Fn(&Replica) -> f64| reps.iter().map(|r| f(r).powi(2)).sum::<f64>().sqrt() / k;
    let moments = reps.iter().fold(Moments::default(), |a, r| a.merge(r.moments));
    let y: i64 = reps.iter().map(|r| r.y).sum();
    Ok(SimCumulants {
        n: m.n,
        p: m.p,
        q: m.q,
        r: m.r,
        l: m.l,
        seed,
        replicas,
        rng: RNG_ALGORITHM,
        t_max,
        n_events: moments.n,
        y,
        j_hat: y as f64 / (k * t_max),
        j_se: pooled_se(&|r| r.stats.mean_se),
        delta_hat: mean_of(&|r| r.stats.rate_var),
        delta_se: pooled_se(&|r| r.stats.rate_var_se),
        mean_s: moments.mean(),
        var_s: moments.var(),
        n_batches: reps.iter().map(|r| r.stats.n_batches).min().unwrap_or(0),
        batch_time: reps.iter().map(|r| r.stats.batch_len).fold(0.0, f64::max),
        lag1: reps.iter().map(|r| r.stats.lag1).fold(f64::NEG_INFINITY, f64::max),
        tainted: reps.iter().any(|r| r.tainted),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeStats {
    pub n_events: u64,
    #[serde(rename = "mean_S")]
    pub mean_s: f64,
    /// Batch-means standard error; sizes of successive events are correlated.
    #[serde(rename = "mean_S_se")]
    pub mean_s_se: f64,
    #[serde(rename = "var_S")]
    pub var_s: f64,
    /// Second moment `E S²`.
    #[serde(rename = "mean_S2")]
    pub mean_s2: f64,
    #[serde(rename = "mean_S2_se")]
    pub mean_s2_se: f64,
    pub histogram: BTreeMap<i64, u64>,
    pub tainted: bool,
}

/// Event-indexed statistics of the signed avalanche size after the default burn-in.
pub fn avalanche_size_stats(m: &ModelParams, n_events: u64, seed: u64) -> Result<SizeStats, SimError> {
    avalanche_size_stats_with(m, n_events, seed, &SimConfig::default())
}

pub fn avalanche_size_stats_with(m: &ModelParams, n_events: u64, seed: u64, cfg: &SimConfig) -> Result<SizeStats, SimError> {
    let n_batches = 100u64;
    if n_events < n_batches * 10 {
        return Err(SimError::BadInput(format!("need at least {} events", n_batches * 10)));
    }
    let mut sim = Simulator::new(m, seed, 0, cfg)?;
    sim.burn_in(cfg.burn_in_events(m));
    let per = n_events / n_batches;
    let mut hist = BTreeMap::new();
    let mut moments = Moments::default();
    let (mut sums, mut sums_sq) = (Vec::with_capacity(n_batches as usize), Vec::with_capacity(n_batches as usize));
    for _ in 0..n_batches {
        let (mut a, mut b) = (0.0, 0.0);
        for _ in 0..per {
            let s = sim.step().s;
            *hist.entry(s).or_insert(0) += 1;
            moments.push(s);
            a += s as f64;
            b += (s * s) as f64;
        }
        sums.push(a);
        sums_sq.push(b);
    }
    let first = BatchStats::merged(&sums, per as f64, MIN_BATCHES);
    let second = BatchStats::merged(&sums_sq, per as f64, MIN_BATCHES);
    Ok(SizeStats {
        n_events: moments.n,
        mean_s: moments.mean(),
        mean_s_se: first.mean_se,
        var_s: moments.var(),
        mean_s2: moments.sum_sq / moments.n as f64,
        mean_s2_se: second.mean_se,
        histogram: hist,
        tainted: sim.tainted,
    })
}
