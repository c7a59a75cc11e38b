use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("map is not isometric where required (residual {residual:e})")]
    NotIsometric { residual: f64 },

    #[error("Kraus operators are not complete (residual {residual:e})")]
    Incomplete { residual: f64 },

    #[error("identity is not in the span of the selected pair products (residual {residual:e})")]
    IdentityNotInSpan { residual: f64 },

    #[error("at least {needed} parties required, got {got}")]
    TooFewParties { needed: usize, got: usize },

    #[error("party index {party} out of range for {parties} parties")]
    PartyOutOfRange { party: usize, parties: usize },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("protocol node {node} is not a complete measurement (residual {residual:e})")]
    ProtocolIncomplete { node: usize, residual: f64 },

    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
