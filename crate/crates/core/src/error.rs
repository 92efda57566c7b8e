use thiserror::Error;

/// Errors surfaced by the model, the numerical oracles and the scan front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("state is not in X-form: {0}")]
    NotXForm(String),

    #[error("step control could not reach tolerance {tol:e} (last estimate {reached:e} with {steps} steps)")]
    StepControl { tol: f64, reached: f64, steps: usize },

    #[error("trajectory step dt = {dt} failed the convergence self-check: {detail}")]
    DtConvergence { dt: f64, detail: String },

    #[error("invalid scan spec: {0}")]
    InvalidSpec(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
