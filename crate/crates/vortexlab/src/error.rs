use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid resolution {n} is below the minimum of {min} interior nodes per axis")]
    GridTooCoarse { n: usize, min: usize },

    #[error("array shape {rows}x{cols} does not match the {n}x{n} grid")]
    ShapeMismatch { rows: usize, cols: usize, n: usize },

    #[error("field contains a non-finite value at node ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("grids differ: {left} vs {right} interior nodes per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid {name} = {value}: {requirement}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("blow-up at t = {t:.6e}: max spectral coefficient {max_coeff:.3e} exceeds limit {limit:.3e}")]
    Blowup { t: f64, max_coeff: f64, limit: f64 },

    #[error("step limit {max_steps} reached at t = {t:.6e} before t_end")]
    StepLimit { t: f64, max_steps: usize },

    #[error("perturbation size {delta:.3e} exceeds the base field norm {base_norm:.3e}")]
    PerturbationTooLarge { delta: f64, base_norm: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: bad field file: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config field `{field}`: {msg}")]
    Validation { field: String, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            msg: msg.into(),
        }
    }
}
