use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max residual {residual:e})")]
    NonHermitian { residual: f64 },

    #[error("{routine} failed to converge")]
    ConvergenceFailure { routine: &'static str },

    #[error("tensor product dimension {dim} exceeds the cap of {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("analytic derivative requested for a family without a phase generator")]
    DerivativeUnavailable,

    #[error("excited-state amplitude vanishes near t = {t} (zero bracketed by [{}, {}])", bracket.0, bracket.1)]
    AmplitudeVanished { t: f64, bracket: (f64, f64) },

    #[error("reduced state is not positive (min eigenvalue {min_eigenvalue:e})")]
    PositivityViolation { min_eigenvalue: f64 },

    #[error("transfer matrix is not diagonalizable (|K| = {k_abs:e}, |d| = {d_abs:e})")]
    DegenerateK { k_abs: f64, d_abs: f64 },

    #[error("operator is not unitary (max residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("not a mixed-unitary channel: {reason}")]
    NotAChannel { reason: String },

    #[error("basis is not orthonormal (max residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("weight {weight} of unitary {index} rounds to zero copies out of {n}")]
    InfeasibleRounding { index: usize, weight: f64, n: usize },

    #[error("integration step too large: {reason}")]
    StepTooLarge { reason: String },

    #[error("pulse period {period} is not a multiple of the step {dt}")]
    GridMisalignment { period: f64, dt: f64 },

    #[error("norm drifted by {drift:e} at t = {t}")]
    NormDrift { t: f64, drift: f64 },

    #[error("kick must be diagonal in the qubit basis and flip the sign of the raising operator")]
    UnsupportedKick,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
