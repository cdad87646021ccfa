use thiserror::Error;

/// Errors produced by the library.
///
/// The variants split into two families: input problems (malformed or
/// inconsistent instances) and compute problems (the instance is well formed
/// but falls outside what an operation can handle). See [`Error::is_input`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid mdp: {field}: {reason}")]
    InvalidMdp { field: String, reason: String },

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid boolean expression: {0}")]
    InvalidExpr(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mdp already carries a dummy state or action")]
    AlreadyAugmented,

    #[error("optimality models were solved under different criteria ({x} vs {y})")]
    ModeMismatch { x: String, y: String },

    #[error("value iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error(
        "induced chain has {classes} recurrent classes reachable from the initial distribution"
    )]
    Multichain { classes: usize },

    #[error("action map is not invertible on supported action {action_x} at state {state_x}")]
    NonInjectiveG { state_x: usize, action_x: usize },

    #[error("optimal-relevant action {action_y} has no preimage under psi")]
    EmptyPreimage { action_y: usize },

    #[error("enumeration needs {candidates} candidates, cap is {cap}")]
    CapExceeded { candidates: f64, cap: u64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

impl Error {
    pub(crate) fn mdp(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidMdp {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed or inconsistent inputs.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidMdp { .. }
                | Error::InvalidPolicy(_)
                | Error::DimensionMismatch(_)
                | Error::InvalidExpr(_)
                | Error::InvalidConfig(_)
                | Error::AlreadyAugmented
                | Error::ModeMismatch { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
