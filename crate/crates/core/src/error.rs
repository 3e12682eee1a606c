use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("form degree overflow: {p} + {q} exceeds dimension {n}")]
    DegreeOverflow { p: usize, q: usize, n: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field does not decay inside the box: boundary magnitude {boundary:.3e} exceeds {limit:.1e} of the peak")]
    DecayViolation { boundary: f64, limit: f64 },

    #[error("need at least {required} time slices, got {got}")]
    TooFewTimeSlices { required: usize, got: usize },

    #[error("kernel is singular at the origin")]
    SingularPoint,

    #[error("form is not closed: |dg| = {residual:.3e} exceeds {limit:.3e}")]
    NotClosed { residual: f64, limit: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("time step {dt:.3e} exceeds the explicit stability limit {limit:.3e}")]
    StabilityViolation { dt: f64, limit: f64 },

    #[error("radial mesh too short: R = {radius} but the grid needs {required}")]
    MeshTooShort { radius: f64, required: f64 },

    #[error("no sign change of the matching functional in kappa range [{lo:e}, {hi:e}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("non-finite sample in a field")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("not a field file: magic {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported field file version {found}")]
    UnsupportedVersion { found: u32 },

    #[error("field file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
