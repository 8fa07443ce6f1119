use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |m[i][j] - conj(m[j][i])| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary: max |(u u^dagger - I)[i][j]| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps (dimension {dim})")]
    ConvergenceFailure { dim: usize, iterations: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("support would leave the line at position {position} (horizon {horizon})")]
    BoundaryOverflow { position: i64, horizon: usize },

    #[error("numerical corruption at step {step}: invariant drift {drift:e} exceeds {limit:e}")]
    NumericalCorruption { step: usize, drift: f64, limit: f64 },

    #[error("standard deviation is not defined on a cycle")]
    CycleUnsupported,

    #[error("distributions live on different lattices")]
    LatticeMismatch,

    #[error("empty distribution series")]
    EmptySeries,

    #[error("epsilon must lie in (0, 2), got {0}")]
    InvalidEpsilon(f64),

    #[error("invalid resource mode: {0}")]
    InvalidMode(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

impl Error {
    /// True for failures of the numerical core (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::NonFinite { .. }
                | Error::ConvergenceFailure { .. }
                | Error::BoundaryOverflow { .. }
                | Error::NumericalCorruption { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
