//! Continuous-time event loop with instant avalanches.

use aap_model::{left_of, right_of, ModelParams, StableConfig, TopplingTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::ring::Ring;
use crate::SimError;

pub const RNG_ALGORITHM: &str = "ChaCha8";
pub const DEFAULT_AVALANCHE_CAP: u64 = 1_000_000;

/// One seeding jump and whatever avalanche it set off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvalancheRecord {
    /// Signed number of particle jumps, left jumps negative.
    pub s: i64,
    pub steps: u64,
    pub chi_max: u32,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub avalanche_cap: u64,
    /// `None` means `10·N·p` events.
    pub burn_in: Option<u64>,
    /// Reflect the lattice: avalanches run to the left and site `s` maps to `N-1-s`.
    pub mirrored: bool,
    /// Replaces the integrable toppling table when set.
    pub table: Option<TopplingTable>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { avalanche_cap: DEFAULT_AVALANCHE_CAP, burn_in: None, mirrored: false, table: None }
    }
}

impl SimConfig {
    pub fn burn_in_events(&self, m: &ModelParams) -> u64 {
        self.burn_in.unwrap_or(10 * (m.n * m.p) as u64)
    }
}

/// Counts of active-site transitions `a -> a-1, a, a+1`; a return to a single
/// particle ends the avalanche and is booked as the corresponding step down or sideways.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChiCounts {
    pub counts: Vec<[u64; 3]>,
}

impl ChiCounts {
    pub fn new(a_max: usize) -> Self {
        ChiCounts { counts: vec![[0; 3]; a_max + 1] }
    }

    #[inline]
    fn record(&mut self, a: usize, b: usize) {
        if let Some(c) = self.counts.get_mut(a) {
            c[b + 1 - a] += 1;
        }
    }

    pub fn total(&self, a: usize) -> u64 {
        self.counts[a].iter().sum()
    }
}

/// State of one replica: configuration, clock, integrated current and RNG.
#[derive(Debug, Clone)]
pub struct SimState {
    pub ring: Ring,
    pub t: f64,
    pub y: i64,
    pub rng: ChaCha8Rng,
    pub event_count: u64,
}

impl SimState {
    pub fn config(&self) -> StableConfig {
        self.ring.config()
    }
}

#[derive(Debug, Clone)]
pub struct Simulator {
    pub params: ModelParams,
    pub state: SimState,
    pub tainted: bool,
    pub chi: Option<ChiCounts>,
    mu: Vec<f64>,
    clock: Exp<f64>,
    cap: u64,
    mirrored: bool,
    /// Rate of jumps in the avalanche direction.
    forward_rate: f64,
}

impl Simulator {
    /// Fresh replica `replica` of stream `seed`, started from a uniform configuration.
    pub fn new(params: &ModelParams, seed: u64, replica: u64, cfg: &SimConfig) -> Result<Self, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        let ring = Ring::uniform(params.n, params.p, &mut rng);
        let ring = if cfg.mirrored { ring.mirrored() } else { ring };
        Self::with_ring(params, ring, rng, cfg)
    }

    pub fn with_ring(params: &ModelParams, ring: Ring, rng: ChaCha8Rng, cfg: &SimConfig) -> Result<Self, SimError> {
        if ring.len() != params.n || ring.particles() != params.p {
            return Err(SimError::BadInput(format!("ring has {} sites and {} particles", ring.len(), ring.particles())));
        }
        let table = cfg.table.clone().unwrap_or_else(|| params.toppling_table());
        table.validate()?;
        if table.max_n() < params.p {
            return Err(SimError::BadInput(format!("toppling table stops at n = {}", table.max_n())));
        }
        let mu = (0..=params.p).map(|n| if n == 0 { 0.0 } else { table.mu(n) }).collect();
        Ok(Simulator {
            params: *params,
            state: SimState { ring, t: 0.0, y: 0, rng, event_count: 0 },
            tainted: false,
            chi: None,
            mu,
            clock: Exp::new(params.p as f64).expect("p > 0"),
            cap: cfg.avalanche_cap,
            mirrored: cfg.mirrored,
            forward_rate: if cfg.mirrored { params.l } else { params.r },
        })
    }

    pub fn record_chi(&mut self, a_max: usize) {
        self.chi = Some(ChiCounts::new(a_max));
    }

    #[inline]
    fn fwd(&self, s: usize) -> usize {
        if self.mirrored {
            left_of(s, self.params.n)
        } else {
            right_of(s, self.params.n)
        }
    }

    #[inline]
    fn back(&self, s: usize) -> usize {
        if self.mirrored {
            right_of(s, self.params.n)
        } else {
            left_of(s, self.params.n)
        }
    }

    /// Runs `events` events without touching the statistics, then resets `t` and `Y`.
    pub fn burn_in(&mut self, events: u64) {
        for _ in 0..events {
            self.step();
        }
        self.state.t = 0.0;
        self.state.y = 0;
        self.state.event_count = 0;
    }

    /// One exponential(p) waiting time, one uniformly chosen particle, one jump.
    pub fn step(&mut self) -> AvalancheRecord {
        let st = &mut self.state;
        st.t += self.clock.sample(&mut st.rng);
        st.event_count += 1;
        let k = st.rng.gen_range(0..self.params.p);
        let forward = st.rng.gen::<f64>() < self.forward_rate;
        let site = st.ring.particle(k);
        let dest = if forward { self.fwd(site) } else { self.back(site) };
        let mut jumps: i64 = if forward { 1 } else { -1 };
        self.state.ring.remove(site);
        let mut rec = AvalancheRecord { s: 0, steps: 0, chi_max: 1, truncated: false };
        if !self.state.ring.occupied(dest) {
            self.state.ring.add(dest);
        } else {
            self.state.ring.remove(dest);
            let (moved, steps, chi_max, truncated) = self.avalanche(dest);
            jumps += moved as i64;
            rec.steps = steps;
            rec.chi_max = chi_max;
            rec.truncated = truncated;
            self.tainted |= truncated;
        }
        rec.s = if self.mirrored { -jumps } else { jumps };
        self.state.y += rec.s;
        debug_assert_eq!(self.state.ring.particles(), self.params.p);
        rec
    }

    /// Topples from `site` holding two particles until a single particle lands on an empty site.
    fn avalanche(&mut self, mut site: usize) -> (u64, u64, u32, bool) {
        let mut c = 2usize;
        let mut moved_total = 0u64;
        let mut steps = 0u64;
        let mut chi_max = 2usize;
        loop {
            if steps == self.cap {
                // park the remaining particles on the first empty sites ahead
                let mut left = c;
                loop {
                    if !self.state.ring.occupied(site) {
                        self.state.ring.add(site);
                        left -= 1;
                    }
                    if left == 0 {
                        break;
                    }
                    moved_total += left as u64;
                    site = self.fwd(site);
                }
                return (moved_total, steps, chi_max as u32, true);
            }
            steps += 1;
            let moved = if self.state.rng.gen::<f64>() < self.mu[c] { c } else { c - 1 };
            if moved < c {
                self.state.ring.add(site);
            }
            moved_total += moved as u64;
            let next = self.fwd(site);
            let here = self.state.ring.occupied(next);
            if here {
                self.state.ring.remove(next);
            }
            let arrived = moved + here as usize;
            if let Some(chi) = self.chi.as_mut() {
                chi.record(c, arrived);
            }
            if arrived == 1 {
                self.state.ring.add(next);
                return (moved_total, steps, chi_max as u32, false);
            }
            c = arrived;
            chi_max = chi_max.max(c);
            site = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(n: usize, p: usize, q: f64, r: f64, seed: u64) -> Simulator {
        Simulator::new(&ModelParams::new(n, p, q, r).unwrap(), seed, 0, &SimConfig::default()).unwrap()
    }

    #[test]
    fn conservation_and_record_shape() {
        let mut s = sim(12, 7, -0.5, 0.6, 1);
        let mut y = 0;
        for _ in 0..20_000 {
            let r = s.step();
            y += r.s;
            assert_eq!(s.state.ring.particles(), 7);
            assert!(r.chi_max as usize <= 7);
            assert_eq!(r.chi_max == 1, r.steps == 0);
        }
        assert!(s.state.ring.check());
        assert_eq!(y, s.state.y);
        assert!(!s.tainted);
    }

    #[test]
    fn single_particle_moves_by_one() {
        let mut s = sim(5, 1, -0.5, 0.3, 2);
        for _ in 0..1000 {
            let r = s.step();
            assert_eq!(r.s.abs(), 1);
            assert_eq!(r.steps, 0);
        }
    }

    #[test]
    fn cap_taints_but_conserves() {
        let mut s = sim(8, 6, -0.5, 1.0, 3);
        s.cap = 1;
        let mut y = 0;
        let hit = (0..2000).map(|_| s.step()).inspect(|r| y += r.s).filter(|r| r.truncated).count();
        assert!(hit > 0 && s.tainted);
        assert_eq!(s.state.ring.particles(), 6);
        assert!(s.state.ring.check());
        assert_eq!(y, s.state.y);
    }

    #[test]
    fn same_seed_same_stream() {
        let (mut a, mut b) = (sim(10, 5, -0.3, 0.8, 9), sim(10, 5, -0.3, 0.8, 9));
        for _ in 0..5000 {
            assert_eq!(a.step(), b.step());
        }
        assert_eq!(a.state.t, b.state.t);
        let mut c = Simulator::new(&a.params, 9, 1, &SimConfig::default()).unwrap();
        let differs = (0..100).any(|_| c.step() != b.step());
        assert!(differs, "replica streams must differ");
    }

    #[test]
    fn broken_table_rejected() {
        let cfg = SimConfig { table: Some(TopplingTable::from_values(&[0.0, 1.0, 0.2])), ..Default::default() };
        let m = ModelParams::new(6, 3, -0.5, 1.0).unwrap();
        assert!(matches!(Simulator::new(&m, 1, 0, &cfg), Err(SimError::Param(_))));
    }
}
