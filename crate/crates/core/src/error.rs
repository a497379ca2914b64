use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |A - A^H| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (max |U^H U - I| = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigensolve(String),

    #[error("waveform {0} has no analytic Fourier modes; use the numeric path")]
    UnsupportedWaveform(String),

    #[error("{samples} samples alias Fourier modes up to |m| = {m_max} (need at least {required})")]
    Aliasing {
        samples: usize,
        m_max: usize,
        required: usize,
    },

    #[error("dressed basis does not belong to these Fourier modes")]
    BasisMismatch,

    #[error(
        "Sambe truncation insufficient: found {found} modes in the first zone, expected {expected} (l_max = {l_max})"
    )]
    TruncationInsufficient {
        found: usize,
        expected: usize,
        l_max: usize,
    },

    #[error("propagator drifted from unitarity by {residual:e} with {steps} steps; increase the step count")]
    StepCount { steps: usize, residual: f64 },

    #[error("time grid too short: {0}")]
    GridTooShort(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("sweep failed at {failed} of {total} points; first error: {first}")]
    SweepFailed {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
