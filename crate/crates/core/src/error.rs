use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e}, slack {slack:.3e})")]
    NotPsd { min_eigenvalue: f64, slack: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("{what} is numerically singular (condition estimate {condition:.3e})")]
    Singular { what: &'static str, condition: f64 },

    #[error("point outside the admissible domain: {0}")]
    OutsideDomain(String),

    #[error("tuple does not commute (commutator norm {commutator:.3e})")]
    NotCommuting { commutator: f64 },

    #[error("margin violated: {0}")]
    Margin(String),

    #[error("kernel identity violated (residual {residual:.3e})")]
    KernelIdentity { residual: f64 },

    #[error("Agler identities violated by the samples (residual {residual:.3e})")]
    AglerIdentity { residual: f64 },

    #[error("rank collapse: {0}")]
    RankCollapse(String),

    #[error("series tail bound {tail:.3e} too large to decide")]
    TailTooLarge { tail: f64 },

    #[error("invalid involution (residual {residual:.3e})")]
    InvalidInvolution { residual: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures caused by numerical conditioning rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure
                | Error::Singular { .. }
                | Error::RankCollapse(_)
                | Error::TailTooLarge { .. }
                | Error::KernelIdentity { .. }
                | Error::AglerIdentity { .. }
        )
    }
}
