use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("invalid immersion: {0}")]
    InvalidImmersion(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point {u:?} is outside the chart domain")]
    OutOfDomain { u: Vec<f64> },
    #[error("immersion is singular at {u:?} (singular value ratio {ratio:.3e})")]
    RankDeficient { u: Vec<f64>, ratio: f64 },
    #[error("vector is not normal to the submanifold (tangential norm {tangential_norm:.3e})")]
    NotNormal { tangential_norm: f64 },
    #[error("direction has norm {norm}, expected a unit vector")]
    NotUnit { norm: f64 },
    #[error("vector field vanishes (norm {norm:.3e})")]
    VanishingField { norm: f64 },
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("every sampled point is singular or outside the domain")]
    AllSingular,
    #[error("unsupported configuration: {0}")]
    Degenerate(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("unknown catalog manifold `{0}`")]
    UnknownManifold(String),
}

impl Error {
    /// True for failures caused by bad input rather than by the numerics of
    /// a well-formed immersion.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::InvalidImmersion(_)
                | Error::DimensionMismatch { .. }
                | Error::UnknownManifold(_)
                | Error::MissingInput(_)
                | Error::NotUnit { .. }
                | Error::NotNormal { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
