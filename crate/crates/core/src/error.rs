use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hop probability p = {0} is outside the admissible band 0 < p <= 1/2")]
    InadmissibleStencil(String),

    #[error("invalid lattice field: {0}")]
    InvalidField(String),

    #[error("{operation} requires {expected} topology")]
    WrongTopology {
        operation: &'static str,
        expected: &'static str,
    },

    #[error("invalid expansion order: {0}")]
    InvalidOrder(String),

    #[error("{0}")]
    UnsupportedLevel(String),

    #[error("invalid scales: {0}")]
    InvalidScales(String),

    #[error("invalid PDE coefficients: {0}")]
    InvalidPde(String),

    #[error("parabolic model (c_tt = 0) has no finite signal speed: it transmits information at an infinite speed")]
    InfiniteSpeed,

    #[error("ill-posed growth: mode k = {wavenumber} has growth rate {rate:.6e} > 0 (stable only for k <= {threshold:.6})")]
    IllPosedGrowth {
        wavenumber: f64,
        rate: f64,
        threshold: f64,
    },

    #[error("model has c_tt > 0 but no initial rate u_t(x, 0) was supplied and no closure rule was selected")]
    MissingInitialRate,

    #[error("explicit scheme unstable: D*dt/dx^2 = {0} exceeds 1/2")]
    StabilityViolation(String),

    #[error("front not detected: threshold {0:e} is never crossed outside the initial support")]
    FrontNotDetected(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid continuum field: {0}")]
    InvalidGrid(String),

    #[error("invalid study configuration: {0}")]
    InvalidStudy(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures produced by the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllPosedGrowth { .. }
                | Error::StabilityViolation(_)
                | Error::FrontNotDetected(_)
                | Error::InfiniteSpeed
        )
    }
}
