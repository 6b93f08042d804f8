use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which side of a saturated/nested comparison an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelRole {
    Saturated,
    Nested,
}

impl fmt::Display for ModelRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelRole::Saturated => f.write_str("saturated"),
            ModelRole::Nested => f.write_str("nested"),
        }
    }
}

/// One row of an iteration trace carried by convergence failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub step_norm: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("matrix is singular at pivot {index} (pivot {pivot:.3e} <= tolerance {tolerance:.3e})")]
    Singular {
        index: usize,
        pivot: f64,
        tolerance: f64,
    },

    #[error("{method} did not converge after {iterations} iterations")]
    Convergence {
        method: &'static str,
        iterations: usize,
        trace: Vec<IterationRecord>,
    },

    #[error("working weights underflowed for {} observation(s) (separation or extreme fitted mean), first at row {}", observations.len(), observations.first().copied().unwrap_or(0))]
    Separation { observations: Vec<usize> },

    #[error("estimates diverge (monotone likelihood) after {iterations} iterations, |beta| = {beta_norm:.3e}")]
    Divergence { iterations: usize, beta_norm: f64 },

    #[error("series is constant; autocovariance is degenerate")]
    DegenerateSeries,

    #[error("{role} model: {source}")]
    InModel {
        role: ModelRole,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn in_model(role: ModelRole) -> impl FnOnce(Error) -> Error {
        move |source| Error::InModel {
            role,
            source: Box::new(source),
        }
    }

    /// The innermost error, looking through [`Error::InModel`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::InModel { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for malformed-argument errors, as opposed to numerical failures.
    pub fn is_input(&self) -> bool {
        matches!(self.root(), Error::Input(_))
    }
}
