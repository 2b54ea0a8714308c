//! Area under a drifted Ornstein-Uhlenbeck path `dX = -(β+X)dt + √2 dW` started at
//! `X_0 = α > 0` until it first hits zero.
//!
//! The first two moments come from quadrature, checked by an Euler-Maruyama Monte Carlo,
//! and for small `α` they reduce to `α F(β)` and `α J(β)`.

use aap_model::ParamError;
use aap_scaling::ScalingError;
use aap_sim::SimError;
use thiserror::Error;

pub mod bridge;
pub mod mc;
pub mod quad;

pub use bridge::{avalanche_scaling_bridge, BridgeRecord};
pub use mc::{area_mc, area_mc_with, McOptions, McResult};
pub use quad::{area_moment, area_moments, AreaMoments, VasicekParams};

#[derive(Debug, Error)]
pub enum OuError {
    #[error("alpha must be positive (got {0})")]
    Alpha(f64),
    #[error("{0}")]
    BadInput(String),
    #[error("quadrature for A_{n} missed tolerance {tol:e} (error estimate {error:e})")]
    Quadrature { n: u8, tol: f64, error: f64 },
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Param(#[from] ParamError),
}
