use thiserror::Error;

/// Errors produced by the scattering engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    /// H(x;k) has a simple pole at k = 0.
    #[error("k = 0 is a pole of the finite-k Hamiltonian; use the zero-energy/low-energy routines")]
    ZeroWavenumber,

    #[error("spectral singularity: |M22| = {0:e} is below the threshold")]
    SpectralSingularity(f64),

    #[error("half-line reflection denominator vanishes: |M21 - gamma M22| = {0:e}")]
    HalfLineSingularity(f64),

    #[error("b1 = 0 and b2 = 0 together contradict a1 b2 - a2 b1 = 1")]
    Contradiction,

    #[error("recursion out of sequence: {0}")]
    Sequencing(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
