//! Occupation of the ring with O(1) uniform particle lookup.

use aap_model::StableConfig;
use rand::seq::index::sample;
use rand::Rng;

const EMPTY: u32 = u32::MAX;

/// Occupied sites plus a dense list of particle positions; `slot[site]` points into `pos`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    n: usize,
    pos: Vec<u32>,
    slot: Vec<u32>,
}

impl Ring {
    pub fn from_sites(n: usize, sites: impl IntoIterator<Item = usize>) -> Self {
        let mut r = Ring { n, pos: Vec::new(), slot: vec![EMPTY; n] };
        for s in sites {
            assert!(!r.occupied(s), "site {s} listed twice");
            r.add(s);
        }
        r
    }

    /// Uniform draw from the `C(n, p)` configurations, i.e. the stationary law.
    pub fn uniform<R: Rng>(n: usize, p: usize, rng: &mut R) -> Self {
        let mut sites = sample(rng, n, p).into_vec();
        sites.sort_unstable();
        Self::from_sites(n, sites)
    }

    #[inline]
    pub fn occupied(&self, site: usize) -> bool {
        self.slot[site] != EMPTY
    }

    #[inline]
    pub fn particle(&self, k: usize) -> usize {
        self.pos[k] as usize
    }

    #[inline]
    pub fn add(&mut self, site: usize) {
        debug_assert!(!self.occupied(site));
        self.slot[site] = self.pos.len() as u32;
        self.pos.push(site as u32);
    }

    #[inline]
    pub fn remove(&mut self, site: usize) {
        let k = self.slot[site] as usize;
        let last = self.pos.pop().expect("remove from empty ring");
        if k < self.pos.len() {
            self.pos[k] = last;
            self.slot[last as usize] = k as u32;
        }
        self.slot[site] = EMPTY;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn particles(&self) -> usize {
        self.pos.len()
    }

    /// Consistency of the two index maps.
    pub fn check(&self) -> bool {
        self.pos.iter().enumerate().all(|(k, &s)| self.slot[s as usize] == k as u32)
            && self.slot.iter().filter(|&&k| k != EMPTY).count() == self.pos.len()
    }

    pub fn config(&self) -> StableConfig {
        StableConfig { occupation: (0..self.n).map(|s| self.occupied(s)).collect() }
    }

    /// Bit mask of the occupation, for rings of at most 64 sites.
    pub fn mask(&self) -> u64 {
        assert!(self.n <= 64);
        self.pos.iter().fold(0, |m, &s| m | 1 << s)
    }

    /// The reflected ring `s -> n-1-s`, keeping particle order so that indexed draws line up.
    pub fn mirrored(&self) -> Self {
        let mut r = Ring { n: self.n, pos: Vec::with_capacity(self.pos.len()), slot: vec![EMPTY; self.n] };
        for &s in &self.pos {
            r.add(self.n - 1 - s as usize);
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn add_remove_keeps_maps() {
        let mut r = Ring::from_sites(6, [0, 2, 5]);
        r.remove(0);
        assert!(r.check());
        r.add(1);
        r.remove(5);
        assert!(r.check());
        assert_eq!(r.particles(), 2);
        assert_eq!(r.mask(), 0b110);
    }

    #[test]
    fn uniform_has_p_particles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Ring::uniform(20, 7, &mut rng);
        assert_eq!(r.particles(), 7);
        assert!(r.check());
        assert_eq!(r.mirrored().mirrored(), r);
    }
}
