use thiserror::Error;

/// Everything that can go wrong inside the lab.
///
/// Each variant maps onto one of the process exit codes used by the
/// command-line front end (see [`LabError::exit_code`]).
#[derive(Debug, Error)]
pub enum LabError {
    #[error("cannot parse `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what}: size {actual} exceeds the cap of {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error(
        "solver did not converge after {iterations} iterations (best bracket [{lower}, {upper}])"
    )]
    NonConvergence {
        lower: f64,
        upper: f64,
        iterations: usize,
    },

    #[error("experiment `{experiment}`: {failed} of {total} instances violated the property")]
    PropertyViolation {
        experiment: String,
        failed: usize,
        total: usize,
    },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 0 ok, 2 input error, 3 cap exceeded, 4 property violated; 1 for
    /// everything else (solver trouble).
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Parse { .. }
            | LabError::InvalidInput(_)
            | LabError::Hypothesis(_)
            | LabError::Io(_)
            | LabError::Json(_) => 2,
            LabError::CapExceeded { .. } => 3,
            LabError::PropertyViolation { .. } => 4,
            LabError::NonConvergence { .. } | LabError::Solver(_) | LabError::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
