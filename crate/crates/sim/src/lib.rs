//! Monte Carlo for the asymmetric avalanche process on a ring, plus its discrete-time variant.
//!
//! Randomness comes from ChaCha8 with one stream per replica, so runs are reproducible
//! from `(seed, replica)` alone.

use aap_model::ParamError;
use thiserror::Error;

pub mod aap;
pub mod chi;
pub mod cumulants;
pub mod daap;
pub mod ring;
pub mod stats;

pub use aap::{AvalancheRecord, ChiCounts, SimConfig, SimState, Simulator, DEFAULT_AVALANCHE_CAP, RNG_ALGORITHM};
pub use chi::{chi_walk_stats, rw_probabilities, wilson, ChiRow, ChiWalkStats};
pub use cumulants::{avalanche_size_stats, avalanche_size_stats_with, estimate_cumulants, estimate_cumulants_with, SimCumulants, SizeStats};
pub use daap::{daap_balance, daap_exact, daap_limit, daap_weights, simulate_daap, DaapBalance, DaapExact, DaapLimit, DaapRun, DaapState};
pub use ring::Ring;
pub use stats::BatchStats;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("insufficient batches: {n_batches} batches of ~{events_per_batch:.0} events over {replicas} replicas (need >= 50 batches of >= 1000 events)")]
    InsufficientBatches { n_batches: usize, events_per_batch: f64, replicas: u64 },
    #[error("delta must lie in (0, 1) (got {0})")]
    BadDelta(f64),
    #[error("an avalanche hit the step cap; the run is tainted")]
    Tainted,
    #[error("{0}")]
    BadInput(String),
}
