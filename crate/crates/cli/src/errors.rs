//! Library errors mapped onto the two failure classes the exit code distinguishes.

use aap_exact::ExactError;
use aap_model::ParamError;
use aap_oracle::OracleError;
use aap_ou::OuError;
use aap_scaling::ScalingError;
use aap_sim::SimError;

use crate::CliError;

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        let field = match e {
            ParamError::RingTooSmall(_) => "N",
            ParamError::NoParticles | ParamError::PExceedsN { .. } => "p",
            ParamError::QOutOfRange(_) => "q",
            ParamError::ROutOfRange(_) => "R",
            ParamError::RatesNotNormalized { .. } => "L",
            ParamError::ToppleIndex(_) | ParamError::BadToppling { .. } => "mu",
        };
        CliError::config(field, e.to_string())
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::Param(p) => p.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Cap { .. } => CliError::config("N", e.to_string()),
            OracleError::GammaWindow { .. } => CliError::config("h", e.to_string()),
            OracleError::TqInput => CliError::config("p", e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Param(p) => p.into(),
            SimError::InsufficientBatches { .. } => CliError::config("t-max", e.to_string()),
            SimError::BadDelta(_) => CliError::config("delta", e.to_string()),
            SimError::BadInput(m) => CliError::config("simulate", m),
            SimError::Tainted => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ScalingError> for CliError {
    fn from(e: ScalingError) -> Self {
        match e {
            ScalingError::Param(p) => p.into(),
            ScalingError::Exact(x) => x.into(),
            ScalingError::Domain(m) => CliError::config("beta", m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<OuError> for CliError {
    fn from(e: OuError) -> Self {
        match e {
            OuError::Alpha(_) => CliError::config("alpha", e.to_string()),
            OuError::BadInput(m) => {
                let field = ["dt", "paths", "tol", "beta", "R"].into_iter().find(|k| m.contains(k)).unwrap_or("ou");
                CliError::config(if field == "paths" { "n-paths" } else { field }, m)
            }
            OuError::Quadrature { .. } => CliError::Numerical(e.to_string()),
            OuError::Scaling(s) => s.into(),
            OuError::Sim(s) => s.into(),
            OuError::Param(p) => p.into(),
        }
    }
}
