use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {dim}: must be at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation inadequate: need dimension >= {required}, have {dim}")]
    TruncationInadequate { required: usize, dim: usize },

    #[error("population {tail:.3e} beyond the truncation-safe region exceeds {limit:.1e}")]
    TruncationLeak { tail: f64, limit: f64 },

    #[error("invalid device parameter `{field}` = {value}")]
    InvalidParams { field: &'static str, value: f64 },

    #[error("dipole field evaluated at the source point")]
    Singularity,

    #[error("finite-difference step {step:.3e} m is below 1e-12 m")]
    OracleConfig { step: f64 },

    #[error("finite-difference estimate of {quantity} is ill-conditioned (h vs h/2 spread {spread:.3e})")]
    OracleIllConditioned { quantity: &'static str, spread: f64 },

    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),

    #[error("unstable drive: Omega_p / Delta_a = {ratio} is not in [0, 1)")]
    UnstableDrive { ratio: f64 },

    #[error("invalid rate `{name}` = {value}")]
    InvalidRate { name: &'static str, value: f64 },

    #[error("step size collapsed to {dt:.3e} at t = {t:.6e}")]
    Stiffness { t: f64, dt: f64 },

    #[error("state integrity violated at t = {t:.6e}: {what} = {value:.3e}")]
    Integrity { t: f64, what: &'static str, value: f64 },

    #[error("steady state is not unique: Liouvillian kernel has dimension {kernel_dim}")]
    NonUniqueSteadyState { kernel_dim: usize },

    #[error("kernel steady-state solve limited to dimension {max}, got {dim}")]
    KernelTooLarge { dim: usize, max: usize },

    #[error("singular matrix in linear solve")]
    SingularMatrix,

    #[error("no convergence: {0}")]
    NotConverged(String),
}
