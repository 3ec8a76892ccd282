use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("problem has no variables")]
    NoVariables,
    #[error("constraint {constraint} references undeclared variable {var}")]
    UnknownVariable { constraint: usize, var: usize },
    #[error("objective references undeclared variable {0}")]
    UnknownObjectiveVariable(usize),
    #[error("variable {var} has invalid bounds [{lo}, {hi}]")]
    InvalidBounds { var: usize, lo: f64, hi: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
}
