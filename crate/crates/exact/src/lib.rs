//! Exact first and second scaled cumulants of the integrated current.
//!
//! Two backends share the same formulas:
//! * [`formulas`] generic over the scalar; with `BigRational` it is the ground truth.
//! * [`float`] a cancellation-free `f64` evaluation that scales to `N` in the thousands.

use thiserror::Error;

pub mod float;
pub mod formulas;
pub mod series;

pub use float::{DiffusionReport, FloatCurrent};
pub use formulas::{parse_rational, ExactInput, RationalInput};
pub use series::{contour_moment, g_series, PartitionData, Scalar, TruncatedSeries};

/// Jump direction feeding an avalanche.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("series truncated at order {order}, but p = {p} needs order >= p")]
    Truncation { order: usize, p: usize },
    #[error("diffusion series did not reach relative tolerance {tol:e} within {cap} terms (last ratio {last:e})")]
    NotConverged { tol: f64, cap: usize, last: f64 },
    #[error("floating-point overflow while evaluating {0}")]
    Overflow(&'static str),
    #[error(transparent)]
    Param(#[from] aap_model::ParamError),
}
