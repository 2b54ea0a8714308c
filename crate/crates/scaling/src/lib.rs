//! Scaling functions `F`, `G`, `J` of the crossover variable `β` and the large-`N`
//! behaviour of the current and diffusion coefficient in all three density regimes.
//!
//! Conventions: `j_N = J/N` and `Δ^j_N = Δ/N²`, with `J`, `Δ` the ring-level cumulants.

use aap_exact::ExactError;
use aap_model::ParamError;
use thiserror::Error;

pub mod curves;
pub mod functions;
pub mod kpz;
pub mod regimes;

pub use curves::{scaling_curve, write_curve_csv, write_regime_csv, CurveRow, RegimeRow};
pub use functions::{erfcx, f_beta, g_beta, j_beta, rel_entropy, F_BETA_MIN};
pub use kpz::{kpz_finite_size_check, kpz_invariant_check, FiniteSizeCheck, KpzCheck};
pub use regimes::{
    asymptotic_current, asymptotic_current_with, asymptotic_diffusion, asymptotic_diffusion_with, beta_of, crossover_current,
    crossover_current_correction, crossover_diffusion, delta_regular, j_regular, k_factor, series_ratio, subcritical_current,
    subcritical_diffusion_amplitude, Mode, Regime, RegimeResult, DEFAULT_WINDOW,
};

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("F(beta) overflows a double for beta = {0} (need beta >= -38)")]
    Overflow(f64),
    #[error("tail quadrature for J({beta}) did not reach tolerance (error estimate {error:e})")]
    Quadrature { beta: f64, error: f64 },
    #[error("regular-part series diverges: |r| = {0} >= 1")]
    Divergent(f64),
    #[error("series did not converge within {0} terms")]
    TermCap(usize),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}
