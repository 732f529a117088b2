use thiserror::Error;

/// Errors raised anywhere in the harvester pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("InvalidDesign: {0}")]
    InvalidDesign(String),

    #[error("SingularMaterial: {0}")]
    SingularMaterial(String),

    #[error("InvalidRefinement: {0}")]
    InvalidRefinement(String),

    #[error("ConstraintError: {0}")]
    Constraint(String),

    #[error("NoPiezo: {0}")]
    NoPiezo(String),

    #[error("EigenFailure: {0}")]
    EigenFailure(String),

    #[error("SingularSystem at omega = {omega} rad/s")]
    SingularSystem { omega: f64 },

    #[error("NoPeak: power FRF is monotone on [{lo}, {hi}] rad/s")]
    NoPeak { lo: f64, hi: f64 },

    #[error("StepSizeUnderflow at t = {t} s (h = {h:e}, steps = {steps}, rejected = {rejected})")]
    StepSizeUnderflow {
        t: f64,
        h: f64,
        steps: usize,
        rejected: usize,
    },

    #[error("EmptyRecord: {0}")]
    EmptyRecord(String),

    #[error("AllParticlesFailed: every particle failed to evaluate ({0})")]
    AllParticlesFailed(String),

    #[error("DegenerateFeatures: {0}")]
    DegenerateFeatures(String),

    #[error("InvalidInput: {0}")]
    InvalidInput(String),

    #[error("Config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDesign(_)
                | Error::InvalidRefinement(_)
                | Error::NoPiezo(_)
                | Error::EmptyRecord(_)
                | Error::InvalidInput(_)
                | Error::Config(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::SingularMaterial(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
