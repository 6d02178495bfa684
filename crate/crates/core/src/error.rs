use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Each variant maps onto one of the process exit codes used by the CLI:
/// input problems, numerical certification failures, or a mathematical
/// condition that rules the requested construction out.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch { what: String, expected: usize, got: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("generic rank of M(λ) is {rank}, expected {expected}; algebra is outside the supported class")]
    RankDeficient { rank: usize, expected: usize },

    #[error("degenerate fiber at λ = {lambda:?}: |det B(λ)| = {value:e} below {epsilon:e}")]
    DegenerateFiber { lambda: Vec<f64>, value: f64, epsilon: f64 },

    #[error("density condition violated: lattice volume {volume} > 1")]
    DensityViolated { volume: f64 },

    #[error("no packing fundamental cell found within {limit} candidate bases")]
    PieceOverflow { limit: usize },

    #[error("certification did not converge within depth {depth}: value lies in [{lower}, {upper}]")]
    NonConvergence { depth: u32, lower: f64, upper: f64 },

    #[error("sample grid misaligned: {0}")]
    MisalignedGrid(String),

    #[error("zero-norm input: {0}")]
    ZeroNorm(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DensityViolated { .. } | Error::RankDeficient { .. } => 2,
            Error::NonConvergence { .. } | Error::PieceOverflow { .. } => 4,
            Error::DegenerateFiber { .. } | Error::ZeroNorm(_) => 4,
            Error::Precondition(_) => 2,
            _ => 3,
        }
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Malformed(_) => "malformed",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::IndexOutOfRange(_) => "index_out_of_range",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::DegenerateFiber { .. } => "degenerate_fiber",
            Error::DensityViolated { .. } => "density_violated",
            Error::PieceOverflow { .. } => "piece_overflow",
            Error::NonConvergence { .. } => "non_convergence",
            Error::MisalignedGrid(_) => "misaligned_grid",
            Error::ZeroNorm(_) => "zero_norm",
            Error::Precondition(_) => "precondition",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
