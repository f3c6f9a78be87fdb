use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("degenerate spherical triangle: {0}")]
    DegenerateTriangle(String),

    #[error("invalid spherical polygon: {0}")]
    InvalidPolygon(String),

    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("invalid solid angle: {0}")]
    InvalidSolidAngle(String),

    #[error("expected a trihedral angle, got {0} edges")]
    NotTrihedral(usize),

    #[error("octahedron construction failed: {0}")]
    ConstructionFailed(String),

    #[error("triangle is not non-special (classified {0})")]
    NotNonSpecial(String),

    #[error("deformation path step {step} classified {tag}")]
    PathVerificationFailed { step: usize, tag: String },

    #[error("degenerate polytope: {0}")]
    Degenerate(String),

    #[error("inconsistent polytope data: {0}")]
    Inconsistent(String),

    #[error("smoothing radius {epsilon} must lie in (0, inradius = {inradius})")]
    EpsilonOutOfRange { epsilon: f64, inradius: f64 },

    #[error("no converged solution among {seeds} seeds")]
    NoSolutionFound { seeds: usize },

    #[error("inscription failed: {0}")]
    InscriptionFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
