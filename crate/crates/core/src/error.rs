use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = CarlesonError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CarlesonError {
    #[error("invalid circle: {0}")]
    InvalidCircle(String),
    #[error("invalid circular domain: {0}")]
    InvalidDomain(String),
    #[error("degenerate Möbius map (normalized |ad - bc| = {det:e})")]
    DegenerateMobius { det: f64 },
    #[error("invalid conformal map: {0}")]
    InvalidMap(String),
    #[error("invalid Carleson square: {0}")]
    InvalidSquare(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid boundary partition: {0}")]
    InvalidPartition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid open set: {0}")]
    InvalidOpenSet(String),
    #[error("map has a pole at {z}")]
    PoleHit { z: Complex64 },
    #[error("atom {index} at {z} lies outside the domain")]
    AtomOutsideDomain { index: usize, z: Complex64 },
    #[error("atom {index} at {z} lies in no component of the open set")]
    AtomInNoComponent { index: usize, z: Complex64 },
    #[error("exhaustive oracle limited to {limit} atoms, got {count}")]
    TooManyAtoms { count: usize, limit: usize },
    #[error("evaluation point {z} lies on the boundary")]
    EvaluationPointOnBoundary { z: Complex64 },
    #[error("evaluation point {z} lies outside the domain")]
    EvaluationPointOutsideDomain { z: Complex64 },
    #[error("boundary quadrature did not converge (relative error estimate {estimate:e})")]
    PoleTooCloseToBoundary { estimate: f64 },
    #[error("Newton inversion did not converge for target {target} (residual {residual:e})")]
    NoConvergence { target: Complex64, residual: f64 },
}

impl CarlesonError {
    /// Numeric failures (as opposed to invalid input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            CarlesonError::PoleTooCloseToBoundary { .. } | CarlesonError::NoConvergence { .. }
        )
    }
}
