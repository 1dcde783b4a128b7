use peergrid_qp::QpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{field}: expected length {expected}, got {got}")]
    Dimension {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Constraint families that can make a subproblem infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintFamily {
    Comfort,
    Battery,
    Balance,
    ActiveInjection,
    ReactiveInjection,
    Voltage,
    TradeBalance,
    Unknown,
}

impl std::fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstraintFamily::Comfort => "comfort band",
            ConstraintFamily::Battery => "battery level",
            ConstraintFamily::Balance => "energy balance",
            ConstraintFamily::ActiveInjection => "active injection bounds",
            ConstraintFamily::ReactiveInjection => "reactive injection bounds",
            ConstraintFamily::Voltage => "voltage band",
            ConstraintFamily::TradeBalance => "trade balance",
            ConstraintFamily::Unknown => "unidentified constraints",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("{context} is infeasible; binding family: {family}")]
    Infeasible {
        context: String,
        family: ConstraintFamily,
    },
    #[error("{context}: solver stopped after {iterations} iterations")]
    NotConverged { context: String, iterations: usize },
    #[error("residuals requested before the first iteration")]
    NoIteration,
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
