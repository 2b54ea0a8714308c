//! Consistency of the subcritical asymptotics with the KPZ relations
//! `Δ^j_N ≈ (√π/4) A^{3/2} |λ| N^{-1/2}` and `b = -Aλ/2`, where `A = ρ(1-ρ)`,
//! `λ = j_∞''(ρ)` and `j_N ≈ j_∞ + b/N`.

use std::f64::consts::PI;

use aap_exact::float;
use aap_model::ModelParams;
use serde::Serialize;

use crate::regimes::{subcritical_current, subcritical_diffusion_amplitude};
use crate::ScalingError;

const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpzCheck {
    pub rho: f64,
    pub a: f64,
    pub lambda: f64,
    /// `(√π/4) A^{3/2} |λ|`.
    pub kpz_amplitude: f64,
    /// Closed-form coefficient of `N^{-1/2}` in the subcritical `Δ^j_N`.
    pub closed_amplitude: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteSizeCheck {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub lambda: f64,
    pub b_estimate: f64,
    pub b_predicted: f64,
    pub residual: f64,
}

/// `j_∞''(ρ)` by central differences at `h` and `h/2`, Richardson-combined.
fn curvature(rho: f64, q: f64, r: f64, l: f64) -> Result<f64, ScalingError> {
    let j = |x: f64| subcritical_current(x, q, r, l);
    let j0 = j(rho)?;
    let d2 = |h: f64| -> Result<f64, ScalingError> { Ok((j(rho + h)? - 2.0 * j0 + j(rho - h)?) / (h * h)) };
    let (coarse, fine) = (d2(FD_STEP)?, d2(FD_STEP / 2.0)?);
    Ok((4.0 * fine - coarse) / 3.0)
}

fn relative(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / y.abs().max(x.abs())
    }
}

/// Compares the closed-form subcritical diffusion amplitude against `(√π/4) A^{3/2} |λ|`.
pub fn kpz_invariant_check(rho: f64, q: f64, r: f64, l: f64) -> Result<KpzCheck, ScalingError> {
    if rho < FD_STEP {
        return Err(ScalingError::Domain(format!("rho = {rho} leaves no room for the difference stencil")));
    }
    let a = rho * (1.0 - rho);
    let lambda = curvature(rho, q, r, l)?;
    let kpz_amplitude = PI.sqrt() / 4.0 * a.powf(1.5) * lambda.abs();
    let closed_amplitude = subcritical_diffusion_amplitude(rho, q, r, l)?;
    Ok(KpzCheck { rho, a, lambda, kpz_amplitude, closed_amplitude, residual: relative(closed_amplitude, kpz_amplitude) })
}

/// Estimates `b` from exact currents on rings `N`, `2N`, `4N` at fixed density `p/N` and
/// compares with `-Aλ/2`. With `b_k = kN (j_{kN} - j_∞) = b + c/(kN) + d/(kN)²`, the two
/// correction orders are removed by Richardson extrapolation.
pub fn kpz_finite_size_check(n: usize, p: usize, q: f64, r: f64) -> Result<FiniteSizeCheck, ScalingError> {
    let m = ModelParams::new(n, p, q, r)?;
    let j_inf = subcritical_current(m.rho, q, m.r, m.l)?;
    let b_k = |k: usize| -> Result<f64, ScalingError> {
        let mk = ModelParams::new(k * n, k * p, q, r)?;
        Ok(float::current(&mk)?.current - (k * n) as f64 * j_inf)
    };
    let (b1, b2, b4) = (b_k(1)?, b_k(2)?, b_k(4)?);
    let b_estimate = (8.0 * b4 - 6.0 * b2 + b1) / 3.0;
    let lambda = curvature(m.rho, q, m.r, m.l)?;
    let b_predicted = -m.rho * (1.0 - m.rho) * lambda / 2.0;
    Ok(FiniteSizeCheck { n, p, rho: m.rho, lambda, b_estimate, b_predicted, residual: relative(b_estimate, b_predicted) })
}
