//! Discrete-time AAP: simulation, product-form stationary weights and the exact balance solve.
//!
//! Each time step either resolves one toppling of the active site or, with no active site,
//! lets one particle jump (total probability `δ`).

use std::collections::HashMap;

use aap_model::{left_of, right_of, ModelParams, TopplingTable};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::ring::Ring;
use crate::stats::{BatchStats, MIN_BATCHES};
use crate::SimError;

pub const BALANCE_STATE_CAP: usize = 4000;

/// Occupation of the discrete-time model: a stable background plus at most one active site.
#[derive(Debug, Clone, PartialEq)]
pub struct DaapState {
    pub background: Ring,
    pub active: Option<(usize, usize)>,
    pub delta: f64,
}

impl DaapState {
    pub fn occupation(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.background.len()).map(|s| self.background.occupied(s) as usize).collect();
        if let Some((s, c)) = self.active {
            v[s] += c;
        }
        v
    }
}

fn check_delta(delta: f64) -> Result<(), SimError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(SimError::BadDelta(delta))
    }
}

/// One-site weights `f(0..=p)` with `f(0) = f(1) = 1`.
pub fn daap_weights(m: &ModelParams, delta: f64, mu: &TopplingTable) -> Vec<f64> {
    let mut f = vec![1.0; m.p + 1];
    if m.p >= 2 {
        f[2] = delta / m.p as f64 * (m.r + m.l * mu.mu(2)) / (1.0 - mu.mu(2));
        for n in 2..m.p {
            f[n + 1] = f[n] * mu.mu(n) / (1.0 - mu.mu(n + 1));
        }
    }
    f
}

/// `C(a, b) / C(N, p)`, zero outside the support.
fn rel_binom(a: i64, b: i64, m: &ModelParams) -> f64 {
    if b < 0 || b > a || a < 0 {
        return 0.0;
    }
    (ln_binomial(a as u64, b as u64) - ln_binomial(m.n as u64, m.p as u64)).exp()
}

/// Closed forms under the product measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaapExact {
    pub delta: f64,
    /// `Z_d / C(N, p)`.
    pub z_rel: f64,
    /// Mean signed jumps per time step.
    pub current: f64,
    /// `P(n_i = k)` for `k = 0..=p`.
    pub site_marginal: Vec<f64>,
}

pub fn daap_exact(m: &ModelParams, delta: f64, mu: &TopplingTable) -> Result<DaapExact, SimError> {
    check_delta(delta)?;
    let f = daap_weights(m, delta, mu);
    let (n, p) = (m.n as i64, m.p as i64);
    let nf = m.n as f64;
    let active: Vec<f64> = (0..=p).map(|k| if k < 2 { 0.0 } else { f[k as usize] * rel_binom(n - 1, p - k, m) }).collect();
    let z = 1.0 + nf * active.iter().sum::<f64>();
    let dp = delta / m.p as f64;
    // jumps out of singly occupied sites, split by the left neighbour
    let quiet = dp * (m.r * m.p as f64 - m.l * nf * rel_binom(n - 2, p - 1, m) + m.l * mu.mu(2) * nf * rel_binom(n - 2, p - 2, m));
    let busy: f64 = (2..=m.p).map(|k| nf * active[k] * (k as f64 - 1.0 + mu.mu(k))).sum();
    let mut marg = vec![0.0; m.p + 1];
    for (k, v) in marg.iter_mut().enumerate().skip(2) {
        *v = f[k] * rel_binom(n - 1, p - k as i64, m) / z;
    }
    let others: f64 = (2..=p).map(|k| f[k as usize] * rel_binom(n - 2, p - k - 1, m)).sum();
    if m.p >= 1 {
        marg[1] = (rel_binom(n - 1, p - 1, m) + (nf - 1.0) * others) / z;
    }
    marg[0] = 1.0 - marg[1..].iter().sum::<f64>();
    Ok(DaapExact { delta, z_rel: z, current: (quiet + busy) / z, site_marginal: marg })
}

/// One step of the chain; returns the signed number of jumps.
pub fn daap_step<R: Rng>(st: &mut DaapState, m: &ModelParams, mu: &TopplingTable, rng: &mut R) -> i64 {
    let n = m.n;
    let ring = &mut st.background;
    if let Some((site, c)) = st.active {
        let moved = if rng.gen::<f64>() < mu.mu(c) { c } else { c - 1 };
        if moved < c {
            ring.add(site);
        }
        let next = right_of(site, n);
        let here = ring.occupied(next);
        if here {
            ring.remove(next);
        }
        let arrived = moved + here as usize;
        if arrived == 1 {
            ring.add(next);
            st.active = None;
        } else {
            st.active = Some((next, arrived));
        }
        return moved as i64;
    }
    if rng.gen::<f64>() >= st.delta {
        return 0;
    }
    let site = ring.particle(rng.gen_range(0..m.p));
    if rng.gen::<f64>() < m.r {
        let dest = right_of(site, n);
        ring.remove(site);
        if ring.occupied(dest) {
            ring.remove(dest);
            st.active = Some((dest, 2));
        } else {
            ring.add(dest);
        }
        1
    } else {
        let dest = left_of(site, n);
        if !ring.occupied(dest) {
            ring.remove(site);
            ring.add(dest);
            -1
        } else if rng.gen::<f64>() < mu.mu(2) {
            // the pair at `dest` moves on together onto `site`
            ring.remove(dest);
            ring.remove(site);
            st.active = Some((site, 2));
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaapRun {
    pub delta: f64,
    pub steps: u64,
    /// Fraction of site-steps with occupation `k`, `k = 0..=p`.
    pub occupancy: Vec<f64>,
    #[serde(rename = "J_daap_hat")]
    pub j_daap_hat: f64,
    #[serde(rename = "J_daap_se")]
    pub j_daap_se: f64,
}

/// Simulates `horizon` time steps from a uniform configuration without active site.
pub fn simulate_daap(m: &ModelParams, delta: f64, horizon: u64, seed: u64) -> Result<DaapRun, SimError> {
    check_delta(delta)?;
    let n_batches = 200u64;
    if horizon < n_batches * 100 {
        return Err(SimError::BadInput(format!("horizon must be at least {}", n_batches * 100)));
    }
    let mu = m.toppling_table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = DaapState { background: Ring::uniform(m.n, m.p, &mut rng), active: None, delta };
    let burn = 10 * (m.n * m.p) as u64 * (1.0 / delta).ceil() as u64;
    for _ in 0..burn {
        daap_step(&mut st, m, &mu, &mut rng);
    }
    let per = horizon / n_batches;
    let mut occ = vec![0u64; m.p + 1];
    let mut sums = Vec::with_capacity(n_batches as usize);
    for _ in 0..n_batches {
        let mut j = 0i64;
        for _ in 0..per {
            j += daap_step(&mut st, m, &mu, &mut rng);
            match st.active {
                None => {
                    occ[1] += m.p as u64;
                    occ[0] += (m.n - m.p) as u64;
                }
                Some((_, c)) => {
                    occ[c] += 1;
                    occ[1] += (m.p - c) as u64;
                    occ[0] += (m.n - 1 - (m.p - c)) as u64;
                }
            }
        }
        sums.push(j as f64);
    }
    let steps = per * n_batches;
    let stats = BatchStats::merged(&sums, per as f64, MIN_BATCHES);
    let total = (steps * m.n as u64) as f64;
    Ok(DaapRun {
        delta,
        steps,
        occupancy: occ.iter().map(|&c| c as f64 / total).collect(),
        j_daap_hat: stats.mean,
        j_daap_se: stats.mean_se,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaapBalance {
    pub states: Vec<Vec<usize>>,
    pub stationary: Vec<f64>,
    pub product: Vec<f64>,
    pub total_variation: f64,
    /// Current of the solved chain, from one-step expectations.
    pub current: f64,
}

fn daap_states(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn choose(free: &[usize], k: usize, v: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(v.clone());
            return;
        }
        for (i, &s) in free.iter().enumerate() {
            if free.len() - i < k {
                break;
            }
            v[s] = 1;
            choose(&free[i + 1..], k - 1, v, out);
            v[s] = 0;
        }
    }
    let mut out = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    choose(&all, p, &mut vec![0; n], &mut out);
    for s in 0..n {
        let free: Vec<usize> = (0..n).filter(|&x| x != s).collect();
        for c in 2..=p {
            let mut v = vec![0; n];
            v[s] = c;
            choose(&free, p - c, &mut v, &mut out);
        }
    }
    out
}

/// Solves `π P = π` on the full state space and compares with the product measure.
pub fn daap_balance(m: &ModelParams, delta: f64) -> Result<DaapBalance, SimError> {
    check_delta(delta)?;
    let mu = m.toppling_table();
    let (n, p) = (m.n, m.p);
    let states = daap_states(n, p);
    if states.len() > BALANCE_STATE_CAP {
        return Err(SimError::BadInput(format!("{} states exceed the cap {BALANCE_STATE_CAP}", states.len())));
    }
    let index: HashMap<&Vec<usize>, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let k = states.len();
    let mut tr = DMatrix::<f64>::zeros(k, k);
    let mut flux = vec![0.0; k];
    let dp = delta / p as f64;
    for (i, s) in states.iter().enumerate() {
        let mut go = |t: Vec<usize>, pr: f64, jumps: f64| {
            tr[(i, index[&t])] += pr;
            flux[i] += pr * jumps;
        };
        if let Some(a) = (0..n).find(|&x| s[x] > 1) {
            let c = s[a];
            for (moved, pr) in [(c, mu.mu(c)), (c - 1, 1.0 - mu.mu(c))] {
                let mut t = s.clone();
                t[a] -= moved;
                t[right_of(a, n)] += moved;
                go(t, pr, moved as f64);
            }
            continue;
        }
        go(s.clone(), 1.0 - delta, 0.0);
        for x in (0..n).filter(|&x| s[x] == 1) {
            let (r, l) = (right_of(x, n), left_of(x, n));
            let mut t = s.clone();
            t[x] = 0;
            t[r] += 1;
            go(t, m.r * dp, 1.0);
            if s[l] == 0 {
                let mut t = s.clone();
                t[x] = 0;
                t[l] = 1;
                go(t, m.l * dp, -1.0);
            } else {
                let mut t = s.clone();
                t[l] = 0;
                t[x] = 2;
                go(t, m.l * dp * mu.mu(2), 1.0);
                go(s.clone(), m.l * dp * (1.0 - mu.mu(2)), 0.0);
            }
        }
    }
    // (P^T - I) π = 0 with the last equation replaced by normalisation
    let mut a = tr.transpose() - DMatrix::identity(k, k);
    a.row_mut(k - 1).fill(1.0);
    let mut rhs = DVector::zeros(k);
    rhs[k - 1] = 1.0;
    let pi = a.lu().solve(&rhs).ok_or_else(|| SimError::BadInput("singular balance system".into()))?;
    let f = daap_weights(m, delta, &mu);
    let raw: Vec<f64> = states.iter().map(|s| s.iter().map(|&x| f[x]).product()).collect();
    let z: f64 = raw.iter().sum();
    let product: Vec<f64> = raw.iter().map(|w| w / z).collect();
    let tv = 0.5 * pi.iter().zip(&product).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let current = pi.iter().zip(&flux).map(|(a, b)| a * b).sum();
    Ok(DaapBalance { states, stationary: pi.iter().copied().collect(), product, total_variation: tv, current })
}

/// `p·J_DAAP/δ` along a δ ladder, and its extrapolations to `δ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaapLimit {
    pub deltas: Vec<f64>,
    pub scaled: Vec<f64>,
    /// Linear Richardson extrapolation from the two smallest δ.
    pub linear: f64,
    /// Polynomial extrapolation through all points.
    pub polynomial: f64,
    /// Successive difference ratios; 2 for an exactly linear trend with halving δ.
    pub difference_ratios: Vec<f64>,
}

pub fn daap_limit(m: &ModelParams, deltas: &[f64]) -> Result<DaapLimit, SimError> {
    if deltas.len() < 2 {
        return Err(SimError::BadInput("need at least two values of delta".into()));
    }
    let mu = m.toppling_table();
    let scaled = deltas
        .iter()
        .map(|&d| daap_exact(m, d, &mu).map(|e| m.p as f64 * e.current / d))
        .collect::<Result<Vec<_>, _>>()?;
    let k = deltas.len();
    let (d1, d2) = (deltas[k - 2], deltas[k - 1]);
    let linear = (d1 * scaled[k - 1] - d2 * scaled[k - 2]) / (d1 - d2);
    // Lagrange interpolation evaluated at zero
    let polynomial = (0..k)
        .map(|i| {
            let w: f64 = (0..k).filter(|&j| j != i).map(|j| deltas[j] / (deltas[j] - deltas[i])).product();
            w * scaled[i]
        })
        .sum();
    let diffs: Vec<f64> = scaled.windows(2).map(|w| w[1] - w[0]).collect();
    let difference_ratios = diffs.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(DaapLimit { deltas: deltas.to_vec(), scaled, linear, polynomial, difference_ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_space_size() {
        // C(4,2) stable states plus 4 sites x one active pair
        assert_eq!(daap_states(4, 2).len(), 6 + 4);
        // C(5,3) + 5·(C(4,1) + 1)
        assert_eq!(daap_states(5, 3).len(), 10 + 5 * 5);
        for s in daap_states(6, 4) {
            assert_eq!(s.iter().sum::<usize>(), 4);
            assert!(s.iter().filter(|&&x| x > 1).count() <= 1);
        }
    }

    #[test]
    fn f_two_display() {
        let m = ModelParams::new(4, 2, -0.5, 0.7).unwrap();
        let mu = m.toppling_table();
        let f = daap_weights(&m, 0.1, &mu);
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 1.0);
        assert!((f[2] - 0.1 / 2.0 * (0.7 + 0.3 * 0.5) / 0.5).abs() < 1e-16);
    }

    #[test]
    fn marginal_is_a_distribution() {
        let m = ModelParams::new(9, 6, -0.3, 0.4).unwrap();
        let e = daap_exact(&m, 0.2, &m.toppling_table()).unwrap();
        assert!(e.site_marginal.iter().all(|&x| x >= 0.0));
        let mean: f64 = e.site_marginal.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
        assert!((mean - 6.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn delta_must_be_a_probability() {
        let m = ModelParams::new(4, 2, -0.5, 1.0).unwrap();
        assert!(matches!(daap_balance(&m, 1.0), Err(SimError::BadDelta(_))));
        assert!(matches!(simulate_daap(&m, 0.0, 100_000, 1), Err(SimError::BadDelta(_))));
    }
}
