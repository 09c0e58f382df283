use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    /// A perturbation factor blows up because `1 - f(r)` is not positive.
    #[error("singular factor {factor} at r = {r}: 1 - f = {one_minus_f:e}")]
    SingularFactor {
        factor: &'static str,
        r: f64,
        one_minus_f: f64,
    },

    #[error("invalid lattice configuration: {0}")]
    InvalidLattice(String),

    #[error("K(eps) is not positive definite at eps = {eps}: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { eps: f64, min_eigenvalue: f64 },

    #[error("matrix is not symmetric positive definite: eigenvalue {0:e}")]
    NotSpd(f64),

    #[error("partial trace failed: {0}")]
    Reduction(String),

    #[error("reduced eigenvalue {0} outside [0, 1)")]
    SpectralDomain(f64),

    #[error("degenerate sweep: |dS/deps| = {0:e} is too small to form a temperature")]
    DegenerateSweep(f64),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("oracle grid too coarse: norm deviates from 1 by {0:e}")]
    GridTooCoarse(f64),

    #[error("no partition produced a valid sweep: {0}")]
    NoValidSweeps(String),

    #[error("invalid configuration:\n{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse grouping used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidMetric(_) | Error::InvalidLattice(_) | Error::Config(_) => {
                ErrorClass::Config
            }
            Error::Io(_) | Error::Json(_) => ErrorClass::Io,
            _ => ErrorClass::Numerical,
        }
    }

    /// Short machine-readable tag for structured error output.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidMetric(_) => "invalid_metric",
            Error::SingularFactor { .. } => "singular_factor",
            Error::InvalidLattice(_) => "invalid_lattice",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::NotSpd(_) => "not_spd",
            Error::Reduction(_) => "reduction",
            Error::SpectralDomain(_) => "spectral_domain",
            Error::DegenerateSweep(_) => "degenerate_sweep",
            Error::Fit(_) => "fit",
            Error::GridTooCoarse(_) => "grid_too_coarse",
            Error::NoValidSweeps(_) => "no_valid_sweeps",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
