use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("total dimension overflows the addressable range")]
    ShapeTooLarge,
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("party index {site} out of range for {parties} parties")]
    SiteOutOfRange { site: usize, parties: usize },
    #[error("party subset must be nonempty and proper, got {0:?}")]
    InvalidSubset(Vec<usize>),
    #[error("expected {expected} amplitudes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("degenerate see-saw iterate: contraction vanished at party {site}")]
    DegenerateIterate { site: usize },
    #[error("state is a product state (lambda = {lambda}); no ascent direction exists")]
    ProductState { lambda: f64 },
    #[error("spectral cut is degenerate: eigenvalues {upper} and {lower} coincide")]
    DegenerateCut { upper: f64, lower: f64 },
    #[error("invalid projector: {0}")]
    InvalidProjector(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
}

pub type Result<T> = std::result::Result<T, Error>;
