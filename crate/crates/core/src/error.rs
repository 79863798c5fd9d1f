use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("deformation {deformation} is non-physical at n = {n}: f²(n) = {f_squared}")]
    NonPhysicalDeformation {
        deformation: String,
        n: usize,
        f_squared: f64,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid Hilbert layout: {0}")]
    InvalidLayout(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (max |H - H†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("operation requires a {expected} deformation, got {found}")]
    WrongDeformation { expected: &'static str, found: String },

    #[error("operation requires model {expected}, got {found}")]
    WrongModel { expected: &'static str, found: String },

    #[error("RWA bound has a pole: 2χ(16χω_c² − Ω₀²) = {denominator:e}")]
    Pole { denominator: f64 },

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("Fock cutoff {cutoff} too small (need at least {required}, truncated mass {tail:e})")]
    CutoffTooSmall {
        cutoff: usize,
        required: usize,
        tail: f64,
    },

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error(
        "time grid under-sampled: step {step:e} exceeds {max_step:e} \
         (max frequency {max_frequency:e})"
    )]
    UnderSampled {
        step: f64,
        max_step: f64,
        max_frequency: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("eigenvalues did not converge with Fock cutoff up to {cutoff}")]
    NoConvergence { cutoff: usize },
}
