//! Exact avalanche resolution over the finite set of unstable configurations.

use std::collections::HashMap;

use aap_model::{left_of, right_of, stable_masks, StableConfig, TopplingTable, UnstableConfig};
use nalgebra::DMatrix;

use crate::OracleError;

/// Where a single toppling (or a seeding jump) leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Stable(usize),
    Unstable(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct Branch {
    pub prob: f64,
    /// Particles carried one step to the right.
    pub moved: u32,
    pub target: Target,
}

/// Jump direction of the particle that seeds an avalanche.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn sign(self) -> i32 {
        match self {
            Direction::Right => 1,
            Direction::Left => -1,
        }
    }
}

/// Key of an unstable state: background mask, active site, active count.
type Key = (u64, usize, usize);

/// Result of a jump: `Ok` with the new stable mask, or `Err` with the avalanche's first state.
fn seed_key(n: usize, mask: u64, site: usize, dir: Direction) -> Result<u64, Key> {
    debug_assert!(mask & bit(site) != 0);
    let dest = match dir {
        Direction::Right => right_of(site, n),
        Direction::Left => left_of(site, n),
    };
    let without = mask & !bit(site);
    if without & bit(dest) == 0 {
        Ok(without | bit(dest))
    } else {
        Err((without & !bit(dest), dest, 2))
    }
}

/// The avalanche state graph for one `(N, p, μ)`; every unstable state has two outgoing branches.
#[derive(Debug, Clone)]
pub struct AvalancheGraph {
    pub n: usize,
    pub p: usize,
    pub stable: Vec<u64>,
    pub unstable: Vec<UnstableConfig>,
    pub branches: Vec<[Branch; 2]>,
    keys: Vec<Key>,
    index: HashMap<Key, usize>,
}

fn bit(site: usize) -> u64 {
    1u64 << site
}

impl AvalancheGraph {
    pub fn build(n: usize, p: usize, mu: &TopplingTable, stable_cap: usize, unstable_cap: usize) -> Result<Self, OracleError> {
        if n > 63 {
            return Err(OracleError::Cap { what: "ring size", size: n, cap: 63 });
        }
        let stable = stable_masks(n, p);
        if stable.len() > stable_cap {
            return Err(OracleError::Cap { what: "stable configurations", size: stable.len(), cap: stable_cap });
        }
        if mu.max_n() < p {
            return Err(OracleError::Cap { what: "toppling table length", size: mu.max_n(), cap: p });
        }
        let mut g = AvalancheGraph { n, p, stable, unstable: Vec::new(), branches: Vec::new(), keys: Vec::new(), index: HashMap::new() };
        // every avalanche starts from a jump onto an occupied neighbour
        let mut frontier = Vec::new();
        for mask in g.stable.clone() {
            for site in (0..n).filter(|&i| mask & bit(i) != 0) {
                for dir in [Direction::Right, Direction::Left] {
                    if let Err(key) = seed_key(n, mask, site, dir) {
                        if !g.index.contains_key(&key) {
                            frontier.push(g.intern(key));
                        }
                    }
                }
            }
        }
        while let Some(u) = frontier.pop() {
            if g.unstable.len() > unstable_cap {
                return Err(OracleError::Cap { what: "unstable configurations", size: g.unstable.len(), cap: unstable_cap });
            }
            let UnstableConfig { active_site: s, active_count: c, .. } = g.unstable[u];
            let bg = g.background(u);
            let mut out = [Branch { prob: 0.0, moved: 0, target: Target::Stable(0) }; 2];
            let m = mu.mu(c);
            for (slot, (moved, prob)) in [(c, m), (c - 1, 1.0 - m)].into_iter().enumerate() {
                let left_behind = c - moved;
                let mut rest = bg;
                if left_behind == 1 {
                    rest |= bit(s);
                }
                let next = right_of(s, n);
                let arrived = moved + ((rest >> next) & 1) as usize;
                rest &= !bit(next);
                let target = if arrived == 1 {
                    Target::Stable(g.stable_index(rest | bit(next)))
                } else {
                    let key = (rest, next, arrived);
                    match g.index.get(&key) {
                        Some(&v) => Target::Unstable(v),
                        None => {
                            let v = g.intern(key);
                            frontier.push(v);
                            Target::Unstable(v)
                        }
                    }
                };
                out[slot] = Branch { prob, moved: moved as u32, target };
            }
            g.branches[u] = out;
        }
        Ok(g)
    }

    fn intern(&mut self, key: Key) -> usize {
        let (bg, s, c) = key;
        let id = self.unstable.len();
        self.unstable.push(UnstableConfig {
            background: StableConfig::from_mask(self.n, bg).occupation,
            active_site: s,
            active_count: c,
        });
        self.branches.push([Branch { prob: 0.0, moved: 0, target: Target::Stable(0) }; 2]);
        self.keys.push(key);
        self.index.insert(key, id);
        id
    }

    fn background(&self, u: usize) -> u64 {
        self.keys[u].0
    }

    pub fn stable_index(&self, mask: u64) -> usize {
        self.stable.binary_search(&mask).expect("mask is a stable configuration")
    }

    /// Outcome of particle at `site` of `config` jumping in `dir`: either a direct move
    /// or the first unstable state of an avalanche.
    pub fn seed(&self, config: usize, site: usize, dir: Direction) -> Target {
        match seed_key(self.n, self.stable[config], site, dir) {
            Ok(mask) => Target::Stable(self.stable_index(mask)),
            Err(key) => Target::Unstable(self.index[&key]),
        }
    }

    /// Dense transfer matrix `M(γ)` and absorption matrix `A(γ)`, each entry carrying
    /// `prob · moved^k · e^{γ moved}` for `k = power`.
    pub fn weighted(&self, gamma: f64, power: i32) -> (DMatrix<f64>, DMatrix<f64>) {
        let (u, s) = (self.unstable.len(), self.stable.len());
        let mut m = DMatrix::zeros(u, u);
        let mut a = DMatrix::zeros(u, s);
        for (i, br) in self.branches.iter().enumerate() {
            for b in br {
                let mv = b.moved as f64;
                let w = b.prob * (gamma * mv).exp() * mv.powi(power);
                match b.target {
                    Target::Unstable(j) => m[(i, j)] += w,
                    Target::Stable(j) => a[(i, j)] += w,
                }
            }
        }
        (m, a)
    }
}

/// Spectral radius of the weighted transfer operator `M(γ)`.
///
/// Power iteration runs on `I + M`, which is aperiodic even when avalanches cycle the
/// ring, and whose Perron root is `1 + ρ(M)` because `M` is nonnegative.
pub fn spectral_radius(graph: &AvalancheGraph, gamma: f64) -> f64 {
    let n = graph.unstable.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    for it in 0..200_000 {
        let mut w = v.clone();
        for (i, br) in graph.branches.iter().enumerate() {
            for b in br {
                if let Target::Unstable(j) = b.target {
                    w[j] += b.prob * (gamma * b.moved as f64).exp() * v[i];
                }
            }
        }
        let norm: f64 = w.iter().sum();
        for (x, y) in v.iter_mut().zip(&w) {
            *x = y / norm;
        }
        if it > 10 && (norm - est).abs() <= 1e-14 * norm {
            return norm - 1.0;
        }
        est = norm;
    }
    est - 1.0
}

/// Absorption weights `X(γ) = (I - M(γ))^{-1} A(γ)` together with their first two
/// γ-derivatives. The derivatives are exact, not finite differences.
#[derive(Debug, Clone)]
pub struct AvalancheResolvent {
    pub gamma: f64,
    pub radius: f64,
    pub x: DMatrix<f64>,
    pub dx: DMatrix<f64>,
    pub d2x: DMatrix<f64>,
}

impl AvalancheResolvent {
    pub fn solve(graph: &AvalancheGraph, gamma: f64) -> Result<Self, OracleError> {
        let radius = spectral_radius(graph, gamma);
        if radius >= 1.0 - 1e-12 {
            return Err(OracleError::NotConvergent { gamma, radius });
        }
        let (m, a) = graph.weighted(gamma, 0);
        let u = m.nrows();
        if u == 0 {
            let z = DMatrix::zeros(0, graph.stable.len());
            return Ok(AvalancheResolvent { gamma, radius, x: z.clone(), dx: z.clone(), d2x: z });
        }
        let lu = (DMatrix::identity(u, u) - &m).lu();
        let x = lu.solve(&a).ok_or(OracleError::Singular)?;
        let (m1, a1) = graph.weighted(gamma, 1);
        let (m2, a2) = graph.weighted(gamma, 2);
        let dx = lu.solve(&(&a1 + &m1 * &x)).ok_or(OracleError::Singular)?;
        let d2x = lu.solve(&(&a2 + &m1 * &dx * 2.0 + &m2 * &x)).ok_or(OracleError::Singular)?;
        Ok(AvalancheResolvent { gamma, radius, x, dx, d2x })
    }
}

/// `resolve_avalanche`: weights of the final stable configurations after the particle at
/// `site` jumps in `dir`, including the `e^{±γ}` of the seeding jump.
pub fn resolve_avalanche(
    graph: &AvalancheGraph,
    res: &AvalancheResolvent,
    config: usize,
    site: usize,
    dir: Direction,
) -> Vec<(usize, f64)> {
    let g = (res.gamma * dir.sign() as f64).exp();
    match graph.seed(config, site, dir) {
        Target::Stable(t) => vec![(t, g)],
        Target::Unstable(u) => res
            .x
            .row(u)
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(t, &w)| (t, g * w))
            .collect(),
    }
}

/// Mean signed displacement `E[Y]` produced by one seeding jump, at `γ = 0`.
pub fn expected_displacement(graph: &AvalancheGraph, res0: &AvalancheResolvent, config: usize, site: usize, dir: Direction) -> f64 {
    let sign = dir.sign() as f64;
    match graph.seed(config, site, dir) {
        Target::Stable(_) => sign,
        Target::Unstable(u) => sign * res0.x.row(u).sum() + res0.dx.row(u).sum(),
    }
}
