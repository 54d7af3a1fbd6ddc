use thiserror::Error;

use crate::distributions::PartitionFailure;
use crate::sumstruct::BadConfiguration;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration budget exceeded: {what} needs {required}, cap is {cap}")]
    BudgetExceeded {
        what: &'static str,
        required: u64,
        cap: u64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("anti-concentrated partition: {0}")]
    Partition(PartitionFailure),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coordinate overflow while scaling to a common lattice")]
    Overflow,

    #[error("no strictly separating hyperplane: {0}")]
    Infeasible(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("sum hypergraph contains a K(2,...,2): {0}")]
    BadConfiguration(Box<BadConfiguration>),

    #[error("{location}: {message}")]
    Parse { location: String, message: String },
}
