//! Simulated avalanche sizes against the small-`α` area moments,
//! `E S ≈ N F(β)` and `E S² ≈ N^{5/2} √(ρ_c(1-ρ_c)) J(β)`.

use aap_exact::float;
use aap_model::ModelParams;
use aap_scaling::{f_beta, j_beta};
use aap_sim::avalanche_size_stats;
use serde::Serialize;

use crate::OuError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeRecord {
    pub n: usize,
    pub p: usize,
    pub q: f64,
    pub beta: f64,
    pub n_events: u64,
    pub seed: u64,
    #[serde(rename = "mean_S")]
    pub mean_s: f64,
    #[serde(rename = "mean_S2")]
    pub mean_s2: f64,
    #[serde(rename = "var_S")]
    pub var_s: f64,
    /// `mean_S / (N F(β))`.
    pub ratio_mean: f64,
    pub ratio_mean_se: f64,
    /// `mean_S² / (N^{5/2} √(ρ_c(1-ρ_c)) J(β))`.
    pub ratio_second: f64,
    pub ratio_second_se: f64,
    /// `var_S / (Δ/p)` with the exact `Δ`; below one when successive avalanches are
    /// positively correlated.
    pub var_over_delta: f64,
    pub tainted: bool,
}

/// Runs the simulator at `m` (which must have `R = 1`) and compares with the scaling forms.
pub fn avalanche_scaling_bridge(m: &ModelParams, n_events: u64, seed: u64) -> Result<BridgeRecord, OuError> {
    if m.r != 1.0 {
        return Err(OuError::BadInput(format!("the bridge is defined for R = 1 (got {})", m.r)));
    }
    let beta = m.beta();
    let n = m.n as f64;
    let s = avalanche_size_stats(m, n_events, seed)?;
    let norm1 = n * f_beta(beta)?;
    let norm2 = n.powf(2.5) * (m.rho_c * (1.0 - m.rho_c)).sqrt() * j_beta(beta)?;
    let delta = float::diffusion(m, 1e-12).map_err(aap_scaling::ScalingError::from)?.delta;
    Ok(BridgeRecord {
        n: m.n,
        p: m.p,
        q: m.q,
        beta,
        n_events: s.n_events,
        seed,
        mean_s: s.mean_s,
        mean_s2: s.mean_s2,
        var_s: s.var_s,
        ratio_mean: s.mean_s / norm1,
        ratio_mean_se: s.mean_s_se / norm1,
        ratio_second: s.mean_s2 / norm2,
        ratio_second_se: s.mean_s2_se / norm2,
        var_over_delta: s.var_s / (delta / m.p as f64),
        tainted: s.tainted,
    })
}
