//! Ring occupation states. Stable states hold at most one particle per site;
//! unstable ones carry a single active site whose particles are counted apart
//! from the background.

/// A stable configuration. `occupation[i]` is true when site `i` holds a particle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StableConfig {
    pub occupation: Vec<bool>,
}

impl StableConfig {
    pub fn from_mask(n: usize, mask: u64) -> Self {
        StableConfig { occupation: (0..n).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn mask(&self) -> u64 {
        assert!(self.occupation.len() <= 64, "mask form needs N <= 64");
        self.occupation.iter().enumerate().fold(0, |m, (i, &b)| m | (b as u64) << i)
    }

    pub fn particle_count(&self) -> usize {
        self.occupation.iter().filter(|&&b| b).count()
    }

    pub fn len(&self) -> usize {
        self.occupation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupation.is_empty()
    }
}

/// Configuration in the middle of an avalanche.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnstableConfig {
    pub background: Vec<bool>,
    pub active_site: usize,
    pub active_count: usize,
}

impl UnstableConfig {
    /// Checks the representation invariants against the total particle number `p`.
    pub fn is_valid(&self, p: usize) -> bool {
        let bg = self.background.iter().filter(|&&b| b).count();
        self.active_site < self.background.len()
            && !self.background[self.active_site]
            && self.active_count >= 2
            && bg + self.active_count == p
    }
}

/// All `C(n, p)` stable configurations as bit masks, in increasing order.
pub fn stable_masks(n: usize, p: usize) -> Vec<u64> {
    assert!(n <= 63, "stable_masks needs N <= 63");
    if p > n {
        return Vec::new();
    }
    if p == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    // Gosper's hack walks the fixed-popcount masks in order
    let mut m: u64 = (1u64 << p) - 1;
    let limit = 1u64 << n;
    while m < limit {
        out.push(m);
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}
