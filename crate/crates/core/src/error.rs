use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants fall into three groups: shape problems, violated input
/// invariants, and numerical failures. [`Error::kind`] reports the group.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("{what} is not Hermitian (max |M - M^dag| = {defect:e})")]
    NotHermitian { what: &'static str, defect: f64 },

    #[error("trace mismatch: rho00 = {rho00}, 1 - Tr R = {expected}")]
    TraceMismatch { rho00: f64, expected: f64 },

    #[error("{what} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive {
        what: &'static str,
        min_eigenvalue: f64,
    },

    #[error("{what} eigenvalue {max_eigenvalue} exceeds 1")]
    AboveUnity {
        what: &'static str,
        max_eigenvalue: f64,
    },

    #[error("pure state not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("value {value:e} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("mode index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("mode index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("index sets do not partition 1..={n}")]
    NotAPartition { n: usize },

    #[error(
        "quantum operation increases trace (max eigenvalue of sum K^dag K = {max_eigenvalue})"
    )]
    TraceIncreasing { max_eigenvalue: f64 },

    #[error("instrument is not trace preserving (max |sum K^dag K - I| = {defect:e})")]
    NotTracePreserving { defect: f64 },

    #[error("state is not strictly one-particle")]
    NotStrictlyOneParticle,

    #[error("coherence block psi is nonzero (norm {norm:e})")]
    NonzeroCoherence { norm: f64 },

    #[error("off-diagonal block P_I R P_J is nonzero (max entry {max_entry:e})")]
    OffDiagonalBlock { max_entry: f64 },

    #[error("decay rate must be positive, got {0}")]
    NonPositiveRate(f64),

    #[error("negative rate sample gamma({t}) = {value}")]
    NegativeRate { t: f64, value: f64 },

    #[error("time {0} is negative")]
    NegativeTime(f64),

    #[error("time grid is not strictly increasing at position {0}")]
    UnsortedGrid(usize),

    #[error("symmetry class violated: {0}")]
    Symmetry(String),

    #[error("invalid boson cutoff {0} (need >= 2)")]
    InvalidCutoff(usize),

    #[error("full-space dimension {dim} exceeds the oracle limit {limit} ({stage})")]
    DimensionGuard {
        stage: String,
        dim: usize,
        limit: usize,
    },

    #[error("eigendecomposition did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("step size underflow at t = {t} (h = {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("propagator norm {norm} exceeds 1 at t = {t}")]
    ContractionViolated { t: f64, norm: f64 },

    #[error("boson truncation leakage {leaked:e} above the error threshold")]
    TruncationLeakage { leaked: f64 },

    #[error("quadrature did not reach tolerance on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
}

/// Coarse classification used by the command line front end for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoConvergence { .. }
            | Error::StepUnderflow { .. }
            | Error::ContractionViolated { .. }
            | Error::TruncationLeakage { .. }
            | Error::Quadrature { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
