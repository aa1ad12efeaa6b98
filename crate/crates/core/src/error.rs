use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Function oracles only answer queries with `‖y‖₂ ≤ 1`.
    #[error("query has norm {0} > 1; function oracles are only defined on the unit ball")]
    OutsideUnitBall(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("estimated gradient norm {norm:.3e} is below 1/(4κ) = {bound:.3e} after {attempts} attempts")]
    DegenerateGradient {
        norm: f64,
        bound: f64,
        attempts: usize,
    },
    #[error("epigraph cut stayed vertical after all retries")]
    VerticalCut,
    #[error("inconsistent oracle answers: {0}")]
    Inconsistency(String),
    #[error("iteration budget of {0} exhausted without a feasible point")]
    MaxItersExhausted(usize),
    #[error("ellipsoid shape matrix is not positive definite at iteration {0}")]
    IndefiniteShape(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("voter `{voter}` cannot combine {kind} answers")]
    IncompatibleVoter {
        voter: &'static str,
        kind: &'static str,
    },
    #[error("{context}: {source}")]
    Chain {
        context: String,
        source: Box<OracleError>,
    },
}

impl OracleError {
    /// Short machine-readable label, used in result files as `error:<kind>`.
    pub fn kind(&self) -> &'static str {
        match self {
            OracleError::Geometry(_) => "geometry",
            OracleError::InvalidParameter(_) => "invalid_parameter",
            OracleError::OutsideUnitBall(_) => "outside_unit_ball",
            OracleError::Precondition(_) => "precondition",
            OracleError::DegenerateGradient { .. } => "degenerate_gradient",
            OracleError::VerticalCut => "vertical_cut",
            OracleError::Inconsistency(_) => "inconsistency",
            OracleError::MaxItersExhausted(_) => "max_iters",
            OracleError::IndefiniteShape(_) => "indefinite_shape",
            OracleError::Unsupported(_) => "unsupported",
            OracleError::IncompatibleVoter { .. } => "incompatible_voter",
            OracleError::Chain { source, .. } => source.kind(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        OracleError::Chain {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips chain context down to the originating error.
    pub fn root(&self) -> &OracleError {
        match self {
            OracleError::Chain { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> OracleError {
    OracleError::InvalidParameter(msg.into())
}
