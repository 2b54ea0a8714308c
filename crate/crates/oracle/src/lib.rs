//! Brute-force ground truth for small rings: the γ-deformed generator over stable
//! configurations with avalanches resolved exactly, its Perron root, and the T-Q
//! polynomial identities in exact arithmetic.

use thiserror::Error;

pub mod avalanche;
pub mod generator;
pub mod tq;

pub use avalanche::{resolve_avalanche, AvalancheGraph, AvalancheResolvent, Direction};
pub use generator::{lambda_of_gamma, DeformedGenerator, FdCumulants, Oracle};
pub use tq::{verify_tq, Poly, TQCheck};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{what} ({size}) exceeds the cap {cap}")]
    Cap { what: &'static str, size: usize, cap: usize },
    #[error("avalanche weights diverge at gamma = {gamma}: transfer spectral radius {radius:.6} >= 1")]
    NotConvergent { gamma: f64, radius: f64 },
    #[error("step h = {h} outside the gamma window |h| <= {window}")]
    GammaWindow { h: f64, window: f64 },
    #[error("singular linear system")]
    Singular,
    #[error("eigenvalue computation failed")]
    Eigen,
    #[error("T-Q system has rank {rank} < {unknowns}")]
    TqSingular { rank: usize, unknowns: usize },
    #[error("T-Q check needs 1 <= p <= N and -1 < q < 0")]
    TqInput,
}
