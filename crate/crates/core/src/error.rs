use thiserror::Error;

/// Broad category of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// A physical or structural precondition on the inputs was violated.
    Precondition,
    /// A numerical monitor tripped during a computation.
    Numerical,
    /// Reading or writing an artifact failed.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{module}: invalid parameter `{param}`: {reason}")]
    InvalidParameter {
        module: &'static str,
        param: &'static str,
        reason: String,
    },

    #[error("states: packet support [{lo:.4}, {hi:.4}] leaves the grid domain [{x_min:.4}, {x_max:.4}]")]
    SupportOverflow { lo: f64, hi: f64, x_min: f64, x_max: f64 },

    #[error("states: {what} cannot be resolved on this grid: {reason}")]
    Resolution { what: &'static str, reason: String },

    #[error("{module}: operands live on different grids or time stamps")]
    GridMismatch { module: &'static str },

    #[error("states: all contributions cancel (norm {norm:.3e})")]
    Cancellation { norm: f64 },

    #[error("{module}: input is not normalized (integral {norm:.12})")]
    NotNormalized { module: &'static str, norm: f64 },

    #[error("wigner: purity {purity:.9} is below the pure-state gate {gate}")]
    Impure { purity: f64, gate: f64 },

    #[error("wigner: anchor density {density:.3e} is numerically empty")]
    EmptyAnchor { density: f64 },

    #[error("wigner: power iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("{module}: time step must be positive, got {dt}")]
    NonpositiveStep { module: &'static str, dt: f64 },

    #[error("dynamics: spectral content beyond 80% of Nyquist is {fraction:.3e}")]
    BandwidthOverflow { fraction: f64 },

    #[error("dynamics: cumulative norm drift {drift:.3e} exceeds {limit:.1e}")]
    NormDrift { drift: f64, limit: f64 },

    #[error("dynamics: boundary density {mass:.3e} exceeds the hard limit {limit:.1e}")]
    BoundaryOverflow { mass: f64, limit: f64 },

    #[error("{module}: imaginary residue {residue:.3e} exceeds {limit:.1e}")]
    RealnessViolation {
        module: &'static str,
        residue: f64,
        limit: f64,
    },

    #[error("dynamics: RK4 norm growth {growth:.3e} per step indicates instability")]
    Stiffness { growth: f64 },

    #[error("observables: polynomial degree {degree} exceeds the supported maximum 4")]
    DegreeTooHigh { degree: u32 },

    #[error("tomography: angle {theta} outside [0, pi)")]
    AngleOutOfRange { theta: f64 },

    #[error("tomography: at least {required} frames required, got {count}")]
    TooFewFrames { count: usize, required: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("io: malformed field file: {0}")]
    Format(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::BandwidthOverflow { .. }
            | Error::NormDrift { .. }
            | Error::BoundaryOverflow { .. }
            | Error::RealnessViolation { .. }
            | Error::Stiffness { .. }
            | Error::NonConvergence { .. } => ErrorKind::Numerical,
            Error::Io(_) | Error::Format(_) => ErrorKind::Io,
            _ => ErrorKind::Precondition,
        }
    }

    pub(crate) fn param(module: &'static str, param: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            module,
            param,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
