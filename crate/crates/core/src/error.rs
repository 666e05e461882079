use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants split into two families: domain errors (the inputs lie outside
/// the region where a formula is defined, e.g. a supercritical boson density)
/// and everything else. The CLI maps the first family to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: dimension {n} exceeds the cap of {cap}")]
    DimensionTooLarge { what: &'static str, n: usize, cap: usize },

    #[error("fugacity {z} outside the admissible domain {domain}")]
    FugacityOutOfDomain { z: f64, domain: String },

    #[error("supercritical density: normalized density {rho_hat} is not below the supremum {sup}")]
    Supercritical { rho_hat: f64, sup: f64 },

    #[error("invalid density {0}; densities must be finite and nonnegative")]
    InvalidDensity(f64),

    #[error("factor 1 - z*alpha*g vanishes (|.| = {0:e})")]
    Singularity(f64),

    #[error("contour radius {r} violates r*alpha*g0 < 1 (alpha = {alpha}, g0 = {g0})")]
    ContourRadius { r: f64, alpha: f64, g0: f64 },

    #[error("series outside its convergence domain: |z*alpha|*g0 = {0}")]
    SeriesDivergent(f64),

    #[error("support of the test function escapes the box [-{half}, {half}]")]
    SupportEscapesBox { half: f64 },

    #[error("well of width {width} does not fit in a box of side {l}")]
    WellExceedsBox { width: f64, l: f64 },

    #[error("particle number {n} unreachable: sup of the mean count on the fugacity domain is {sup}")]
    UnreachableN { n: f64, sup: f64 },

    #[error("degenerate variance {0:e}")]
    DegenerateVariance(f64),

    #[error("{0} diverges")]
    Divergent(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by parameters outside a formula's domain.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::FugacityOutOfDomain { .. }
                | Error::Supercritical { .. }
                | Error::InvalidDensity(_)
                | Error::Singularity(_)
                | Error::ContourRadius { .. }
                | Error::SeriesDivergent(_)
                | Error::SupportEscapesBox { .. }
                | Error::WellExceedsBox { .. }
                | Error::UnreachableN { .. }
                | Error::DegenerateVariance(_)
                | Error::Divergent(_)
                | Error::Domain(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
