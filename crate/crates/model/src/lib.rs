//! Parameters and state representations for the asymmetric avalanche process (AAP)
//! on a ring of `N` sites carrying `p` particles.
//!
//! Sites are 0-based and wrap modulo `N`. Everything here is immutable once built,
//! so the types can be shared freely between worker threads.

use thiserror::Error;

mod config;

pub use config::{stable_masks, StableConfig, UnstableConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("N must be at least 2 (got {0})")]
    RingTooSmall(usize),
    #[error("p must be at least 1")]
    NoParticles,
    #[error("p exceeds N ({p} > {n})")]
    PExceedsN { p: usize, n: usize },
    #[error("q out of range: need -1 < q < 0 (got {0})")]
    QOutOfRange(f64),
    #[error("R out of range: need 0 <= R <= 1 (got {0})")]
    ROutOfRange(f64),
    #[error("L must equal 1 - R (got R = {r}, L = {l})")]
    RatesNotNormalized { r: f64, l: f64 },
    #[error("toppling index n must be at least 1 (got {0})")]
    ToppleIndex(usize),
    #[error("mu_{n} = {mu} is not an admissible toppling probability (need 0 <= mu < 1, mu_1 = 0)")]
    BadToppling { n: usize, mu: f64 },
}

/// Full parameterisation of the process. Build through [`ModelParams::new`] or
/// [`validate`]; the derived densities are filled in there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub p: usize,
    pub q: f64,
    pub r: f64,
    pub l: f64,
    pub rho: f64,
    pub rho_c: f64,
}

impl ModelParams {
    /// Validated parameters with `L = 1 - R`.
    pub fn new(n: usize, p: usize, q: f64, r: f64) -> Result<Self, ParamError> {
        validate(n, p, q, r, None)
    }

    /// `Rρ_c + L(1-ρ_c)`, the amplitude shared by all large-N formulas.
    pub fn k_factor(&self) -> f64 {
        self.r * self.rho_c + self.l * (1.0 - self.rho_c)
    }

    /// Crossover variable `β = √N (ρ_c - ρ) / √(ρ_c(1-ρ_c))` at the actual integer density.
    pub fn beta(&self) -> f64 {
        let n = self.n as f64;
        n.sqrt() * (self.rho_c - self.rho) / (self.rho_c * (1.0 - self.rho_c)).sqrt()
    }

    pub fn with_rates(&self, r: f64) -> Result<Self, ParamError> {
        Self::new(self.n, self.p, self.q, r)
    }

    pub fn toppling_table(&self) -> TopplingTable {
        TopplingTable::integrable(self.p, self.q)
    }
}

/// Checks every invariant and fills `rho`, `rho_c`. When `l` is given it must be `1 - r`
/// (to within rounding); the stored value is always recomputed from `r`.
pub fn validate(n: usize, p: usize, q: f64, r: f64, l: Option<f64>) -> Result<ModelParams, ParamError> {
    if n < 2 {
        return Err(ParamError::RingTooSmall(n));
    }
    if p == 0 {
        return Err(ParamError::NoParticles);
    }
    if p > n {
        return Err(ParamError::PExceedsN { p, n });
    }
    let rho_c = critical_density(q)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(ParamError::ROutOfRange(r));
    }
    if let Some(l) = l {
        if !l.is_finite() || (r + l - 1.0).abs() > 1e-12 {
            return Err(ParamError::RatesNotNormalized { r, l });
        }
    }
    Ok(ModelParams { n, p, q, r, l: 1.0 - r, rho: p as f64 / n as f64, rho_c })
}

fn check_q(q: f64) -> Result<(), ParamError> {
    // NaN fails both comparisons and is rejected here too
    if q > -1.0 && q < 0.0 {
        Ok(())
    } else {
        Err(ParamError::QOutOfRange(q))
    }
}

/// Integrable toppling probability `μ_n = 1 - (1-q^n)/(1-q)`.
pub fn toppling_prob(n: usize, q: f64) -> Result<f64, ParamError> {
    check_q(q)?;
    if n == 0 {
        return Err(ParamError::ToppleIndex(n));
    }
    Ok(mu_unchecked(n, q))
}

// -q (1 - q^{n-1}) / (1 - q); this form has no cancellation at n = 1
fn mu_unchecked(n: usize, q: f64) -> f64 {
    -q * (1.0 - q.powi(n as i32 - 1)) / (1.0 - q)
}

/// `ρ_c = 1/(1-q)`.
pub fn critical_density(q: f64) -> Result<f64, ParamError> {
    check_q(q)?;
    Ok(1.0 / (1.0 - q))
}

/// `μ_n` for `n = 1..=max_n`, indexed directly by `n` (slot 0 is unused and zero).
#[derive(Debug, Clone, PartialEq)]
pub struct TopplingTable {
    mu: Vec<f64>,
}

impl TopplingTable {
    pub fn integrable(max_n: usize, q: f64) -> Self {
        let mut mu = vec![0.0; max_n.max(1) + 1];
        for (n, m) in mu.iter_mut().enumerate().skip(1) {
            *m = mu_unchecked(n, q);
        }
        TopplingTable { mu }
    }

    /// Arbitrary table, e.g. for fault injection. `values[0]` is `μ_1`.
    pub fn from_values(values: &[f64]) -> Self {
        let mut mu = Vec::with_capacity(values.len() + 1);
        mu.push(0.0);
        mu.extend_from_slice(values);
        TopplingTable { mu }
    }

    #[inline]
    pub fn mu(&self, n: usize) -> f64 {
        self.mu[n]
    }

    pub fn max_n(&self) -> usize {
        self.mu.len() - 1
    }

    /// Every entry a probability below one, and `μ_1 = 0`.
    pub fn validate(&self) -> Result<(), ParamError> {
        for n in 1..=self.max_n() {
            let mu = self.mu[n];
            let ok = if n == 1 { mu == 0.0 } else { (0.0..1.0).contains(&mu) };
            if !ok {
                return Err(ParamError::BadToppling { n, mu });
            }
        }
        Ok(())
    }
}

/// Where a cumulant estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Exact,
    Oracle,
    Simulation,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Exact => "exact",
            Source::Oracle => "oracle",
            Source::Simulation => "simulation",
        }
    }
}

/// First two scaled cumulants of the integrated current, `J = c_1` and `Δ = c_2`.
/// Per-site versions are `J/N` and `Δ/N²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantResult {
    pub n: usize,
    pub j: f64,
    pub delta: Option<f64>,
    pub source: Source,
    pub j_se: Option<f64>,
    pub delta_se: Option<f64>,
}

impl CumulantResult {
    pub fn j_per_site(&self) -> f64 {
        self.j / self.n as f64
    }

    pub fn delta_per_site(&self) -> Option<f64> {
        self.delta.map(|d| d / (self.n as f64 * self.n as f64))
    }
}

#[inline]
pub fn right_of(site: usize, n: usize) -> usize {
    if site + 1 == n {
        0
    } else {
        site + 1
    }
}

#[inline]
pub fn left_of(site: usize, n: usize) -> usize {
    if site == 0 {
        n - 1
    } else {
        site - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn toppling_examples() {
        assert_eq!(toppling_prob(1, -0.5).unwrap(), 0.0);
        assert!((toppling_prob(2, -0.5).unwrap() - 0.5).abs() < 1e-15);
        // mu_3 = -q(1+q)
        assert!((toppling_prob(3, -0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(toppling_prob(0, -0.5).is_err());
        assert!(toppling_prob(2, 0.2).is_err());
        assert!(toppling_prob(2, -1.0).is_err());
    }

    #[test]
    fn critical_density_examples() {
        assert!((critical_density(-0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((critical_density(-1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!((critical_density(-1.0 + 1e-12).unwrap() - 0.5).abs() < 1e-11);
        assert!(critical_density(0.0).is_err());
        assert!(critical_density(f64::NAN).is_err());
    }

    #[test]
    fn validate_examples() {
        let m = validate(4, 2, -0.5, 1.0, Some(0.0)).unwrap();
        assert_eq!(m.rho, 0.5);
        assert!((m.rho_c - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(validate(4, 5, -0.5, 1.0, None).unwrap_err().to_string(), "p exceeds N (5 > 4)");
        assert!(validate(4, 2, 0.3, 1.0, None).unwrap_err().to_string().starts_with("q out of range"));
        assert_eq!(validate(1, 1, -0.5, 1.0, None).unwrap_err(), ParamError::RingTooSmall(1));
        assert_eq!(validate(4, 0, -0.5, 1.0, None).unwrap_err(), ParamError::NoParticles);
        assert!(matches!(validate(4, 2, -0.5, 1.2, None), Err(ParamError::ROutOfRange(_))));
        assert!(matches!(validate(4, 2, -0.5, 0.3, Some(0.3)), Err(ParamError::RatesNotNormalized { .. })));
    }

    #[test]
    fn table_matches_function() {
        let t = TopplingTable::integrable(10, -0.3);
        for n in 1..=10 {
            assert_eq!(t.mu(n), toppling_prob(n, -0.3).unwrap());
        }
        assert_eq!(t.max_n(), 10);
        assert!(t.validate().is_ok());
        assert_eq!(TopplingTable::from_values(&[0.0, 1.0]).validate(), Err(ParamError::BadToppling { n: 2, mu: 1.0 }));
        assert!(TopplingTable::from_values(&[0.1, 0.5]).validate().is_err());
    }

    #[test]
    fn ring_neighbours() {
        assert_eq!(right_of(3, 4), 0);
        assert_eq!(left_of(0, 4), 3);
        assert_eq!(right_of(1, 4), 2);
    }

    proptest! {
        #[test]
        fn mu_in_unit_interval(n in 1usize..200, q in -0.999f64..-0.001) {
            let mu = toppling_prob(n, q).unwrap();
            prop_assert!((0.0..1.0).contains(&mu));
            if n >= 2 {
                prop_assert!(mu > 0.0);
            }
        }

        #[test]
        fn mu_tends_to_one_minus_rho_c(q in -0.9f64..-0.01) {
            let gap = (toppling_prob(60, q).unwrap() - (1.0 - critical_density(q).unwrap())).abs();
            prop_assert!(gap <= q.abs().powi(60) + 1e-15);
        }

        #[test]
        fn rho_c_in_range(q in -0.9999f64..-0.0001) {
            let rc = critical_density(q).unwrap();
            prop_assert!(rc > 0.5 && rc < 1.0);
        }

        #[test]
        fn valid_params_roundtrip(n in 2usize..100, frac in 0.0f64..1.0, q in -0.99f64..-0.01, r in 0.0f64..=1.0) {
            let p = 1 + ((n - 1) as f64 * frac) as usize;
            let m = ModelParams::new(n, p, q, r).unwrap();
            prop_assert!((m.r + m.l - 1.0).abs() < 1e-15);
            prop_assert!(m.rho > 0.0 && m.rho <= 1.0);
        }
    }
}
