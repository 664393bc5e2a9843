//! Correlation-filter visual tracking with group-sparse spatial feature
//! selection and temporal consistency, plus an OTB-style evaluation harness.
//!
//! Module map:
//! - [`spectral`]: square planes, 2-D DFT conventions, labels and windows;
//! - [`features`]: patch extraction, HOG and Colour-Names descriptors;
//! - [`solver`]: the ADMM filter learner with grouped shrinkage;
//! - [`tracker`]: the per-frame track loop (detect, move, relearn);
//! - [`bench`]: dataset loading, overlap metrics, one-pass evaluation;
//! - [`selftest`]: reference oracles and runtime consistency checks.

pub mod bench;
pub mod error;
pub mod features;
pub mod selftest;
pub mod solver;
pub mod spectral;
pub mod tracker;

pub use bench::{EvalReport, Sequence, SequenceReport, Trajectory};
pub use error::{Error, Result};
pub use features::{FeatureTensor, ImagePatch};
pub use solver::{AdmmWorkspace, SelectionMask, SolverConfig, SpectralFilter};
pub use spectral::{Complex64, ComplexPlane, RealPlane};
pub use tracker::{BoundingBox, TrackerConfig, TrackerState};
