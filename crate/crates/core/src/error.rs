use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("observable is not dichotomic (|A^2 - I| = {deviation:.3e})")]
    NotDichotomic { deviation: f64 },

    #[error("probability {value} outside [0, 1]")]
    Probability { value: f64 },

    #[error("CHSH value {value} exceeds the Tsirelson bound 2*sqrt(2)")]
    UnphysicalViolation { value: f64 },

    #[error("standard-scenario bound undefined: Q + S/(2 sqrt 2) = {value} outside [0, 1]")]
    StandardBoundUndefined { value: f64 },

    #[error("no sign change of the key rate on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("estimation undefined: no samples for setting pair {0}")]
    EstimationUndefined(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigen solver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("verification failed: {0}")]
    Verification(String),
}
