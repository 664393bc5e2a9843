use std::path::PathBuf;

/// Errors surfaced by the tracking and evaluation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition (non-finite values,
    /// undersized planes, empty inputs, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two planes or tensors that must share a shape do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A spectrum handed to the inverse transform was not conjugate
    /// symmetric: the reconstructed plane kept a complex component.
    #[error("spectrum is not conjugate-symmetric: max imaginary residue {residue:.3e} exceeds {tolerance:.1e}")]
    ConjugateSymmetry { residue: f64, tolerance: f64 },

    /// The solver produced a non-finite iterate. Carries the 1-based
    /// iteration at which the blow-up was detected.
    #[error("numerical failure in ADMM iteration {iteration}: {detail}")]
    NumericalFailure { iteration: usize, detail: String },

    /// A configuration value (file or struct) is out of range or unknown.
    #[error("config error: {0}")]
    Config(String),

    /// A dataset directory did not match the expected layout.
    #[error("failed to load sequence at {path}: {detail}")]
    SequenceLoad { path: PathBuf, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
