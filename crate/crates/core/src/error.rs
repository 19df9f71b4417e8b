use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid similitude: {0}")]
    InvalidSimilitude(String),

    #[error("invalid iterated function system: {0}")]
    InvalidIfs(String),

    #[error("level {level} needs {segments} segments, above the cap of {cap}")]
    LevelOverflow {
        level: usize,
        segments: u128,
        cap: usize,
    },

    #[error("polygon is not convex: {0}")]
    NonConvexPolygon(String),

    #[error("boundary edges {first} and {second} intersect near ({x}, {y})")]
    SelfIntersection {
        first: usize,
        second: usize,
        x: f64,
        y: f64,
    },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("unknown boundary tag {0:?}")]
    UnknownTag(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("fixed-point iteration diverged at iterate {iteration}: correction norms {norms:?}")]
    Divergence { iteration: usize, norms: Vec<f64> },

    #[error("nonlinear coefficient degenerates: |1 - alpha u| = {value:e} at step {step}")]
    Degeneracy { step: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Innermost error, looking through [`Error::Level`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Level { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn at_level(level: usize) -> impl FnOnce(Error) -> Error {
        move |e| Error::Level {
            level,
            source: Box::new(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
