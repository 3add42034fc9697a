use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no real root of the exponent at q = {q} (branch point at {xi_star})")]
    Branch { q: f64, xi_star: f64 },

    #[error("model assumption violated: {0}")]
    Assumption(String),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("degenerate normalization: H(0, x) = {0}")]
    DegenerateNormalization(f64),

    #[error("ill-conditioned expansion fit: residual {residual:e} against constant {constant:e}")]
    IllConditionedFit { residual: f64, constant: f64 },

    #[error("expansion fit too close to the pole at alpha = {pole} (alpha = {alpha}, pole moves by {shift:e} over the offsets)")]
    FitNearPole { alpha: f64, pole: f64, shift: f64 },

    #[error("transform inversion failed at t = {t}: estimates {first:e} and {second:e} disagree")]
    Inversion { t: f64, first: f64, second: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no surviving paths at t = {t} out of {paths}")]
    InsufficientSurvivors { t: f64, paths: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
