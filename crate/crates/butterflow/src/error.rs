//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed network: {0}")]
    MalformedNetwork(String),

    #[error("operation {operation} is not supported for variant {variant}")]
    UnsupportedVariant { operation: String, variant: String },

    #[error("rate pair ({r1}, {r2}) is infeasible: violates {constraint}")]
    InfeasibleRate {
        r1: String,
        r2: String,
        constraint: String,
    },

    /// No secure scheme exists on the split butterfly; its secure rate region
    /// is the origin alone.
    #[error("no positive-rate secure scheme exists for butterfly1; the secure rate region is {{(0, 0)}}")]
    SecureButterfly1,

    #[error("audit needs {needed} enumeration states, exceeding the budget of {budget}")]
    AuditBudgetExceeded { needed: u128, budget: u64 },

    #[error("field and packet mismatch: {0}")]
    FieldMismatch(String),

    #[error("rate region is unbounded; vertex enumeration requires a bounded region")]
    UnboundedRegion,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
