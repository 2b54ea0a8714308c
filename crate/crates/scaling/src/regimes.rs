//! Large-`N` asymptotics of `j_N = J/N` and `Δ^j_N = Δ/N²` below, at and above `ρ_c`,
//! plus the crossover forms that interpolate between them.

use std::f64::consts::PI;

use aap_model::{critical_density, ModelParams};
use serde::Serialize;

use crate::functions::{f_beta, g_beta, rel_entropy};
use crate::ScalingError;

/// Half-width of the crossover window in units of `N^{-1/2}`.
pub const DEFAULT_WINDOW: f64 = 5.0;

const SERIES_RTOL: f64 = 1e-12;
const SERIES_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Sub,
    Critical,
    Super,
    Crossover,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Sub => "sub",
            Regime::Critical => "critical",
            Regime::Super => "super",
            Regime::Crossover => "crossover",
        }
    }
}

/// How to pick the formula. `Auto` routes `|ρ - ρ_c| < window·N^{-1/2}` to the crossover form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Auto { window: f64 },
    Force(Regime),
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Auto { window: DEFAULT_WINDOW }
    }
}

/// An asymptotic value `sign · e^{log_value}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeResult {
    pub regime: Regime,
    pub log_value: f64,
    pub sign: f64,
    /// Power of `N` in front, not counting `e^{N·exponential_rate}`.
    pub leading_order: f64,
    pub exponential_rate: f64,
    /// Power of `N` of the first neglected relative correction.
    pub correction_order: f64,
}

impl RegimeResult {
    fn from_value(regime: Regime, v: f64, leading_order: f64, correction_order: f64) -> Self {
        RegimeResult { regime, log_value: v.abs().ln(), sign: v.signum(), leading_order, exponential_rate: 0.0, correction_order }
    }

    /// May be infinite when the value lies beyond the double range.
    pub fn value(&self) -> f64 {
        self.sign * self.log_value.exp()
    }
}

/// `K = Rρ_c + L(1-ρ_c)`.
pub fn k_factor(q: f64, r: f64, l: f64) -> Result<f64, ScalingError> {
    let rc = critical_density(q)?;
    Ok(r * rc + l * (1.0 - rc))
}

/// `β = √N (ρ_c - ρ)/√(ρ_c(1-ρ_c))`.
pub fn beta_of(n: usize, rho: f64, q: f64) -> Result<f64, ScalingError> {
    let rc = critical_density(q)?;
    Ok((n as f64).sqrt() * (rc - rho) / (rc * (1.0 - rc)).sqrt())
}

/// Ratio `r = -q²ρ/(1-ρ)` of the regular-part series.
pub fn series_ratio(rho: f64, q: f64) -> f64 {
    -q * q * rho / (1.0 - rho)
}

fn check_rho(rho: f64) -> Result<(), ScalingError> {
    if (0.0..1.0).contains(&rho) {
        Ok(())
    } else {
        Err(ScalingError::Domain(format!("need 0 <= rho < 1 (got {rho})")))
    }
}

/// `Σ_{k>=1} w(k) r^k / (1 - q^k)` for a polynomial weight `w` of degree at most three.
fn regular_series(rho: f64, q: f64, w: impl Fn(f64) -> f64) -> Result<f64, ScalingError> {
    let r = series_ratio(rho, q);
    if r.abs() >= 1.0 {
        return Err(ScalingError::Divergent(r.abs()));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    // beyond k0 the cubic weight can no longer outgrow |r|^k
    let k0 = 1.0 / ((1.0 / r.abs()).powf(1.0 / 3.0) - 1.0);
    let (mut sum, mut rk, mut qk) = (0.0, 1.0, 1.0);
    for k in 1..=SERIES_CAP {
        let kf = k as f64;
        rk *= r;
        qk *= q;
        let term = w(kf) * rk / (1.0 - qk);
        sum += term;
        if kf > k0 && term.abs() <= SERIES_RTOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(ScalingError::TermCap(SERIES_CAP))
}

/// Regular part of the subcritical current,
/// `K/(ρ_c(1-ρ_c)) Σ k r^k/(1-q^k) - Lρ(1-ρ)/ρ_c`.
pub fn j_regular(rho: f64, q: f64, r: f64, l: f64) -> Result<f64, ScalingError> {
    check_rho(rho)?;
    let rc = critical_density(q)?;
    let k = k_factor(q, r, l)?;
    let s = regular_series(rho, q, |k| k)?;
    Ok(k / (rc * (1.0 - rc)) * s - l * rho * (1.0 - rho) / rc)
}

/// Regular part of the `N^{-1/2}` amplitude of `Δ^j_N`, i.e. `(√π/4) A^{3/2}` times the
/// second derivative of [`j_regular`] in `ρ`, with `A = ρ(1-ρ)`.
pub fn delta_regular(rho: f64, q: f64, r: f64, l: f64) -> Result<f64, ScalingError> {
    check_rho(rho)?;
    let a = rho * (1.0 - rho);
    if a == 0.0 {
        return Ok(0.0);
    }
    let rc = critical_density(q)?;
    let k = k_factor(q, r, l)?;
    // (r^k)'' = k(k - 1 + 2ρ) r^k / A²
    let s = regular_series(rho, q, |k| k * k * (k - 1.0 + 2.0 * rho))?;
    Ok(PI.sqrt() * k / (4.0 * a.sqrt() * rc * (1.0 - rc)) * s + PI.sqrt() * a.powf(1.5) * l / (2.0 * rc))
}

fn check_sub(rho: f64, rc: f64) -> Result<(), ScalingError> {
    if rho < rc {
        Ok(())
    } else {
        Err(ScalingError::Domain(format!("subcritical formula needs rho < rho_c (got {rho} >= {rc})")))
    }
}

/// `j_∞(ρ) = ρ(1-ρ)K/(ρ-ρ_c)² + j_reg(ρ)`.
pub fn subcritical_current(rho: f64, q: f64, r: f64, l: f64) -> Result<f64, ScalingError> {
    let rc = critical_density(q)?;
    check_sub(rho, rc)?;
    let k = k_factor(q, r, l)?;
    Ok(rho * (1.0 - rho) * k / (rho - rc).powi(2) + j_regular(rho, q, r, l)?)
}

/// Coefficient of `N^{-1/2}` in the subcritical `Δ^j_N`.
pub fn subcritical_diffusion_amplitude(rho: f64, q: f64, r: f64, l: f64) -> Result<f64, ScalingError> {
    let rc = critical_density(q)?;
    check_sub(rho, rc)?;
    let k = k_factor(q, r, l)?;
    let a = rho * (1.0 - rho);
    let poly = 2.0 * rc - rc * rc + rho - 2.0 * rc * rho;
    let divergent = PI.sqrt() * k * a.powf(1.5) * poly / (2.0 * (rho - rc).powi(4));
    Ok(divergent + delta_regular(rho, q, r, l)?)
}

/// The `O(N^{-1/2})` relative correction `(1-2ρ_c)/(6√(Nρ_c(1-ρ_c))) β(F(β)(β²-3) - 1)`.
pub fn crossover_current_correction(n: usize, beta: f64, q: f64) -> Result<f64, ScalingError> {
    let rc = critical_density(q)?;
    let f = f_beta(beta)?;
    Ok((1.0 - 2.0 * rc) / (6.0 * (n as f64 * rc * (1.0 - rc)).sqrt()) * beta * (f * (beta * beta - 3.0) - 1.0))
}

/// `j_N ≈ NK (F(β) + correction)`.
pub fn crossover_current(n: usize, beta: f64, q: f64, r: f64, l: f64) -> Result<f64, ScalingError> {
    let k = k_factor(q, r, l)?;
    Ok(n as f64 * k * (f_beta(beta)? + crossover_current_correction(n, beta, q)?))
}

/// `Δ^j_N ≈ N^{3/2} K √(ρ_c(1-ρ_c)) G(β)`.
pub fn crossover_diffusion(n: usize, beta: f64, q: f64, r: f64, l: f64) -> Result<f64, ScalingError> {
    let rc = critical_density(q)?;
    let k = k_factor(q, r, l)?;
    Ok((n as f64).powf(1.5) * k * (rc * (1.0 - rc)).sqrt() * g_beta(beta)?)
}

fn resolve(m: &ModelParams, mode: Mode) -> Result<Regime, ScalingError> {
    let (rho, rc) = (m.rho, m.rho_c);
    let regime = match mode {
        Mode::Auto { .. } if rho == rc => Regime::Critical,
        Mode::Auto { window } if (rho - rc).abs() < window / (m.n as f64).sqrt() => Regime::Crossover,
        Mode::Auto { .. } if rho < rc => Regime::Sub,
        Mode::Auto { .. } => Regime::Super,
        Mode::Force(r) => r,
    };
    match regime {
        Regime::Sub if rho >= rc => Err(ScalingError::Domain(format!("rho = {rho} is not below rho_c = {rc}"))),
        Regime::Super if rho <= rc => Err(ScalingError::Domain(format!("rho = {rho} is not above rho_c = {rc}"))),
        _ => Ok(regime),
    }
}

/// `ln` of the supercritical prefactor without the powers of `N`.
fn super_log_prefactor(m: &ModelParams, diffusion: bool) -> f64 {
    let (rho, rc, k) = (m.rho, m.rho_c, m.k_factor());
    let a = rho * (1.0 - rho);
    let pre = if diffusion {
        4.0 * PI * (rho - rc) * k * a / (rc * (1.0 - rc))
    } else {
        (2.0 * PI * a).sqrt() * (rho - rc) * k / (rc * (1.0 - rc))
    };
    pre.ln()
}

pub fn asymptotic_current(m: &ModelParams) -> Result<RegimeResult, ScalingError> {
    asymptotic_current_with(m, Mode::default())
}

/// Leading large-`N` form of `j_N` for the regime selected by `mode`.
pub fn asymptotic_current_with(m: &ModelParams, mode: Mode) -> Result<RegimeResult, ScalingError> {
    let n = m.n as f64;
    Ok(match resolve(m, mode)? {
        Regime::Sub => RegimeResult::from_value(Regime::Sub, subcritical_current(m.rho, m.q, m.r, m.l)?, 0.0, -1.0),
        Regime::Critical => RegimeResult::from_value(Regime::Critical, n * m.k_factor(), 1.0, -0.5),
        Regime::Crossover => {
            RegimeResult::from_value(Regime::Crossover, crossover_current(m.n, m.beta(), m.q, m.r, m.l)?, 1.0, -1.0)
        }
        Regime::Super => {
            let s = rel_entropy(m.rho, m.rho_c)?;
            RegimeResult {
                regime: Regime::Super,
                log_value: 1.5 * n.ln() + n * s + super_log_prefactor(m, false),
                sign: 1.0,
                leading_order: 1.5,
                exponential_rate: s,
                correction_order: -1.0,
            }
        }
    })
}

pub fn asymptotic_diffusion(m: &ModelParams) -> Result<RegimeResult, ScalingError> {
    asymptotic_diffusion_with(m, Mode::default())
}

/// Leading large-`N` form of `Δ^j_N` for the regime selected by `mode`.
pub fn asymptotic_diffusion_with(m: &ModelParams, mode: Mode) -> Result<RegimeResult, ScalingError> {
    let n = m.n as f64;
    Ok(match resolve(m, mode)? {
        Regime::Sub => {
            let amp = subcritical_diffusion_amplitude(m.rho, m.q, m.r, m.l)?;
            RegimeResult::from_value(Regime::Sub, amp / n.sqrt(), -0.5, -0.5)
        }
        Regime::Critical => {
            let v = n.powf(1.5) * m.k_factor() * (PI * m.rho_c * (1.0 - m.rho_c)).sqrt();
            RegimeResult::from_value(Regime::Critical, v, 1.5, -0.5)
        }
        Regime::Crossover => {
            RegimeResult::from_value(Regime::Crossover, crossover_diffusion(m.n, m.beta(), m.q, m.r, m.l)?, 1.5, -0.5)
        }
        Regime::Super => {
            let s = rel_entropy(m.rho, m.rho_c)?;
            RegimeResult {
                regime: Regime::Super,
                log_value: 2.0 * n.ln() + 2.0 * n * s + super_log_prefactor(m, true),
                sign: 1.0,
                leading_order: 2.0,
                exponential_rate: 2.0 * s,
                correction_order: -1.0,
            }
        }
    })
}
