use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid photon cutoff {0}: at least one photon per mode is required")]
    InvalidCutoff(usize),

    #[error("unknown mode label `{0}`")]
    UnknownMode(String),

    #[error("unknown atomic level `{0}`")]
    UnknownLevel(String),

    #[error("occupation {occupation} exceeds cutoff {n_max}")]
    OccupationOutOfRange { occupation: usize, n_max: usize },

    #[error("basis index {index} outside [0, {dim})")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mixing angle undefined: all relevant couplings vanish at t = {t}")]
    UndefinedAngle { t: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("jump requested at t = {t} but every jump channel has zero weight")]
    VanishingJumpWeights { t: f64 },

    #[error("conditional fidelity undefined: success-sector weight {weight:e} below 1e-12")]
    UndefinedFidelity { weight: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in output column `{0}`")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
