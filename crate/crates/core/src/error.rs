//! Crate-wide error type.  Configuration problems name the offending key
//! and the violated constraint so the CLI can surface them verbatim.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of its documented range.  `key` is the
    /// flat config-file key (e.g. `topology.grid_w`), `constraint` the rule
    /// it violated (e.g. `>= 2`).
    #[error("invalid config: {key} = {value} violates {constraint}")]
    Config {
        key: String,
        value: String,
        constraint: String,
    },

    /// Explicit-Euler stability bound violated at thermal-model build time.
    #[error("thermal step dt = {dt} s is unstable; the stiffest node allows at most {max_dt} s")]
    ThermalUnstable { dt: f64, max_dt: f64 },

    /// The steady-state linear solve failed (should not happen while every
    /// node keeps a finite vertical resistance).
    #[error("steady-state solve failed: thermal conductance matrix is not positive definite")]
    SteadySolve,

    /// Prediction requested outside the horizon range the model was
    /// trained on.
    #[error("prediction horizon {requested} exceeds trained range of {max} thermal steps")]
    HorizonRange { requested: u32, max: u32 },

    /// Training diverged (non-finite loss).
    #[error("training diverged at epoch {epoch}: loss = {loss}; try a smaller learning rate")]
    TrainingDiverged { epoch: usize, loss: f64 },

    /// Model/dataset dimensions do not match the fabric they are used with.
    #[error("dimension mismatch: {context} expects {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A serialized artifact (model or dataset file) is malformed.
    #[error("malformed {kind} file: {detail}")]
    Format { kind: &'static str, detail: String },

    /// Traffic trace rows must be sorted by cycle and reference valid cores.
    #[error("traffic trace line {line}: {detail}")]
    Trace { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: &str, value: impl ToString, constraint: &str) -> Self {
        Error::Config {
            key: key.to_string(),
            value: value.to_string(),
            constraint: constraint.to_string(),
        }
    }
}
