use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sigma_x and sigma_y must be finite and positive (got sigma_x={sigma_x}, sigma_y={sigma_y})")]
    NonPositiveSigma { sigma_x: f64, sigma_y: f64 },

    #[error("correlation tau must lie in the closed unit disc (|tau| = {modulus})")]
    TauOutOfUnitDisc { modulus: f64 },

    #[error("complex tau is only allowed for the complex-general ensemble (Im tau = {imag})")]
    ComplexTauInRealKind { imag: f64 },

    #[error("real/imaginary split must lie strictly inside (0, 1), got {0}")]
    InvalidSplit(f64),

    #[error("matrix dimensions must be positive, got {n}x{p}")]
    InvalidDims { n: usize, p: usize },

    #[error("dimension ratio alpha must be finite and positive, got {0}")]
    InvalidAlpha(f64),

    #[error("pseudo-inverse support is undefined at alpha = 1")]
    AlphaOneUnsupported,

    #[error("lambda must be nonzero")]
    LambdaZero,

    #[error("empty matrix ({rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,

    #[error("density window is degenerate")]
    DegenerateWindow,

    #[error("input is empty")]
    EmptyInput,

    #[error("invalid complex literal {0:?}")]
    ComplexParse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
