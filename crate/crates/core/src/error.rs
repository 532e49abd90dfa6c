use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("plane-wave cutoff {cutoff} too small for {bands} bands (need at most {max})")]
    CutoffTooSmall { cutoff: usize, bands: usize, max: usize },

    #[error("band {band} is (nearly) degenerate at quasimomentum index {q}; Wannier phase is ill-defined")]
    DegenerateBand { band: usize, q: usize },

    #[error("Wannier function has imaginary part {imag:e} (band {band})")]
    NotReal { band: usize, imag: f64 },

    #[error("quadrature not converged: doubling the grid changed an entry by {change:e}")]
    Quadrature { change: f64 },

    #[error("Fock space dimension {dim} exceeds limit {limit}")]
    DimensionLimit { dim: u128, limit: usize },

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("norm drift {drift:e} at t = {time} exceeds tolerance {tolerance:e}")]
    NormDrift { time: f64, drift: f64, tolerance: f64 },

    #[error("site {site} density {density:e} is below the singularity threshold")]
    EmptySite { site: usize, density: f64 },

    #[error("mode frame not orthonormal at site {site} (deviation {deviation:e})")]
    FrameNotOrthonormal { site: usize, deviation: f64 },

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateBand { .. }
                | Error::NotReal { .. }
                | Error::Quadrature { .. }
                | Error::NotConverged { .. }
                | Error::NormDrift { .. }
                | Error::EmptySite { .. }
                | Error::FrameNotOrthonormal { .. }
        )
    }
}
