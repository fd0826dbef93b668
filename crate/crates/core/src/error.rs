use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mode index {mode} out of range for {n_modes} modes")]
    InvalidMode { mode: usize, n_modes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty subspace: {0}")]
    EmptySubspace(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("near-degenerate denominator between U eigenstates {n} and {m}: gap {gap:.3e} meV")]
    NearDegenerate { n: usize, m: usize, gap: f64 },

    #[error("operator is not block diagonal over charge configurations (largest off-block element {0:.3e})")]
    NotBlockDiagonal(f64),

    #[error("timestep {timestep:.3e} s exceeds the limit {limit:.3e} s")]
    TimestepTooCoarse { timestep: f64, limit: f64 },

    #[error("spin index {index} out of range for {n_spins} spins")]
    SpinIndex { index: usize, n_spins: usize },

    #[error("edge ({0}, {1}) is not in the connectivity graph")]
    EdgeNotInGraph(usize, usize),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),
}

impl Error {
    /// True for errors caused by the numerical regime rather than malformed input.
    pub fn is_numerical_regime(&self) -> bool {
        matches!(
            self,
            Error::NearDegenerate { .. } | Error::RegimeViolation(_) | Error::TimestepTooCoarse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
