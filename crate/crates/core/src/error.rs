use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("row index {index} out of range for a matrix with {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("portion vector is not in the interior of the admissible set (min HPR = {min_hpr})")]
    NotInterior { min_hpr: f64 },

    #[error("portion vector is outside the admissible set (min HPR = {min_hpr})")]
    Inadmissible { min_hpr: f64 },

    #[error("enumeration needs {required} items but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("linear program failed: {0}")]
    Solver(String),
}

impl RiskError {
    /// Domain and budget errors are raised by valid inputs evaluated at an
    /// unsupported point; everything else is a validation error.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            RiskError::NotInterior { .. }
                | RiskError::Inadmissible { .. }
                | RiskError::BudgetExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, RiskError>;
