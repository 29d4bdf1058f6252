use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("coupling matrix is near-singular (condition estimate {condition:e})")]
    NearSingular { condition: f64 },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("all amplitudes vanish")]
    ZeroVector,

    #[error("time step {step} exceeds the stability bound {bound}")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("lattice phase {xi} rad is a pole of the closed-form solution")]
    SingularPhase { xi: f64 },

    #[error("no lattice phase satisfies the boundary condition")]
    NoSolution,

    #[error("populations are not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("segment has no sites")]
    EmptySegment,

    #[error("all population sits on the interface site")]
    DegenerateDenominator,

    #[error("B_D - 1/N keeps a constant sign on the bracket [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("scaling fit did not converge (best residual {residual:e})")]
    FitDiverged { residual: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
