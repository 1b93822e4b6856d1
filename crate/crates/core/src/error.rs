use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("rotation velocity {theta_dot} violates the positivity bound {bound} (maximum allowed rotation velocity)")]
    WilliamsonViolation { theta_dot: f64, bound: f64 },

    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("principal matrix logarithm unavailable: {0}")]
    LogBranchFailure(String),

    #[error("Fock truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("revival overlap {0:e} is too small to define a phase")]
    DegenerateOverlap(f64),

    #[error("truncation did not converge: {0}")]
    NonConvergence(String),

    #[error("dimension mismatch: expected nmax {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

impl Error {
    /// True for errors that describe physically invalid or infeasible input.
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::WilliamsonViolation { .. }
                | Error::InfeasibleDesign(_)
                | Error::DegenerateDesign(_)
                | Error::LogBranchFailure(_)
                | Error::DegenerateOverlap(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
