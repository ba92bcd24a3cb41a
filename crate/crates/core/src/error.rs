use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("{what} = {value} is out of range ({range})")]
    OutOfRange {
        what: &'static str,
        value: i64,
        range: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("group of order {required} exceeds the enumeration budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("elements belong to different bases")]
    BasisMismatch,

    #[error("atom {0} is not part of the basis alphabet")]
    UnknownAtom(String),

    #[error("unbound name `{0}`")]
    UnboundName(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("invalid group spec: {0}")]
    Spec(String),

    #[error("subgroup is not normal")]
    NotNormal,

    #[error("no normal-form basis is available for p = {prime}, class {class}")]
    BasisUnavailable { prime: u64, class: usize },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
