//! Quadrature for `A_1` and `A_2`.
//!
//! With `h(z) = 1 - √(π/2) β erfcx((z+β)/√2)` the recursion collapses to
//!
//! `A_1(α) = ∫_0^α h`,
//! `A_2(α) = 2 ∫_0^α [A_1(z) h(z) + ∫_z^∞ h(y)² e^{((z+β)² - (y+β)²)/2} dy] dz`,
//!
//! the second after exchanging the order of the two inner integrals.

use std::cell::Cell;
use std::f64::consts::PI;

use aap_scaling::erfcx;
use serde::{Deserialize, Serialize};

use crate::OuError;

const TAIL_LENGTH: f64 = 40.0;
const PANEL: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VasicekParams {
    pub alpha: f64,
    pub beta: f64,
}

impl VasicekParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, OuError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(OuError::Alpha(alpha));
        }
        if !beta.is_finite() {
            return Err(OuError::BadInput(format!("beta must be finite (got {beta})")));
        }
        Ok(VasicekParams { alpha, beta })
    }
}

/// Output record; the Monte Carlo fields are filled by the caller when available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaMoments {
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    pub quad_error: f64,
    #[serde(rename = "mc_A1")]
    pub mc_a1: Option<f64>,
    #[serde(rename = "mc_A2")]
    pub mc_a2: Option<f64>,
    pub mc_se: Option<[f64; 2]>,
    pub n_paths: Option<u64>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    value: f64,
    error: f64,
}

fn de(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Acc {
    let o = quadrature::double_exponential::integrate(f, a, b, abs_tol);
    Acc { value: o.integral, error: o.error_estimate }
}

struct Kernel {
    beta: f64,
}

impl Kernel {
    fn h(&self, z: f64) -> f64 {
        1.0 - (PI / 2.0).sqrt() * self.beta * erfcx((z + self.beta) / std::f64::consts::SQRT_2)
    }

    fn a1(&self, alpha: f64, abs_tol: f64) -> Acc {
        de(|z| self.h(z), 0.0, alpha, abs_tol)
    }

    /// `∫_z^∞ h(y)² e^{((z+β)² - (y+β)²)/2} dy` over panels; past `max(z, -β) + 40` the
    /// Gaussian factor is below any double.
    fn tail(&self, z: f64, abs_tol: f64) -> Acc {
        let b = self.beta;
        let end = z.max(-b) + TAIL_LENGTH;
        let f = |y: f64| self.h(y).powi(2) * (((z + b).powi(2) - (y + b).powi(2)) / 2.0).exp();
        let panels = ((end - z) / PANEL).ceil() as usize;
        let w = (end - z) / panels as f64;
        let mut acc = Acc::default();
        for k in 0..panels {
            let a = z + k as f64 * w;
            let p = de(f, a, a + w, abs_tol / panels as f64);
            acc.value += p.value;
            acc.error += p.error;
        }
        acc
    }

    /// The bracket in the `A_2` integrand, with its accumulated error.
    fn a2_integrand(&self, z: f64, abs_tol: f64) -> Acc {
        let a1 = self.a1(z, abs_tol);
        let t = self.tail(z, abs_tol);
        let hz = self.h(z);
        Acc { value: a1.value * hz + t.value, error: a1.error * hz.abs() + t.error }
    }
}

/// `A_n(α)` for `n ∈ {1, 2}` with relative tolerance `tol`; returns `(value, error estimate)`.
pub fn area_moment(n: u8, alpha: f64, beta: f64, tol: f64) -> Result<(f64, f64), OuError> {
    let p = VasicekParams::new(alpha, beta)?;
    if !(tol > 0.0) {
        return Err(OuError::BadInput(format!("tol must be positive (got {tol})")));
    }
    let k = Kernel { beta: p.beta };
    let acc = match n {
        1 => {
            let scale = alpha * k.h(0.0).abs().max(k.h(alpha).abs());
            k.a1(alpha, 1e-3 * tol * scale)
        }
        2 => {
            let scale = alpha * k.a2_integrand(0.0, 1e-16).value.abs();
            let inner_tol = 1e-4 * tol * scale / alpha;
            let inner_err = Cell::new(0.0f64);
            let outer = de(
                |z| {
                    let v = k.a2_integrand(z, inner_tol);
                    inner_err.set(inner_err.get().max(v.error));
                    v.value
                },
                0.0,
                alpha,
                1e-3 * tol * scale,
            );
            Acc { value: 2.0 * outer.value, error: 2.0 * (outer.error + alpha * inner_err.get()) }
        }
        _ => return Err(OuError::BadInput(format!("only A_1 and A_2 are available (got n = {n})"))),
    };
    if !acc.value.is_finite() || acc.error > tol * acc.value.abs() {
        return Err(OuError::Quadrature { n, tol, error: acc.error });
    }
    Ok((acc.value, acc.error))
}

/// Both moments at `(α, β)`.
pub fn area_moments(alpha: f64, beta: f64, tol: f64) -> Result<AreaMoments, OuError> {
    let (a1, e1) = area_moment(1, alpha, beta, tol)?;
    let (a2, e2) = area_moment(2, alpha, beta, tol)?;
    Ok(AreaMoments { alpha, beta, a1, a2, quad_error: e1.max(e2), mc_a1: None, mc_a2: None, mc_se: None, n_paths: None, dt: None })
}
