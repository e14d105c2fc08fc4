use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },

    #[error("jet shape mismatch: ({lhs_vars} vars, order {lhs_order}) vs ({rhs_vars} vars, order {rhs_order})")]
    ShapeMismatch {
        lhs_vars: usize,
        lhs_order: usize,
        rhs_vars: usize,
        rhs_order: usize,
    },

    #[error("derivative order {requested} exceeds available order {available}")]
    OrderOverflow { requested: usize, available: usize },

    #[error("domain error in `{function}`: argument {argument} ({context})")]
    Domain {
        function: &'static str,
        argument: f64,
        context: String,
    },

    #[error("lex error at byte {position}: {message}")]
    Lex { position: usize, message: String },

    #[error("parse error at byte {position}: expected {expected}, found {found}")]
    Parse {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("variable `{name}` is not allowed by the partition")]
    PartitionViolation { name: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("point is not of corank one (numerical rank {rank} of {dim})")]
    NotCorankOne { rank: usize, dim: usize },

    #[error("chart degenerate: {0}")]
    ChartDegenerate(String),

    #[error("Newton iteration diverged: {0}")]
    NewtonDiverged(String),

    #[error("division breaks down: {0}")]
    Phi1Vanishes(String),

    #[error("point lies outside the sheet: p1 - k1 = {gap}")]
    OutsideSheet { gap: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
