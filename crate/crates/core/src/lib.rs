//! Stability-regularized fair classification.
//!
//! Trains classifiers that minimize empirical risk plus `λ‖f‖²ₖ` under a
//! convex fairness constraint, and measures how stable, fair and
//! well-generalizing the result is against closed-form uniform-stability
//! bounds.
//!
//! - [`data`]: samples, datasets, neighbouring datasets and seeded splits
//! - [`kernel`], [`classifier`]: kernels, Gram matrices, kernel expansions
//! - [`loss`]: margin losses and admissibility constants
//! - [`fairness`]: covariance constraint and statistical rate
//! - [`solver`]: training and regularization paths (via [`train`])
//! - [`lab`]: stability measurements and bound calculators

pub mod classifier;
pub mod data;
pub mod error;
pub mod fairness;
pub mod kernel;
pub mod lab;
pub mod loss;
pub mod seed;
pub mod solver;

pub use classifier::{Classifier, KernelClassifier, LinearClassifier};
pub use data::{Dataset, Label, Sample};
pub use error::{Error, Result};
pub use fairness::{FairnessKind, FairnessSpec};
pub use kernel::KernelSpec;
pub use loss::LossSpec;
pub use solver::{train, ConstraintMode, Representation, TrainConfig, TrainResult};
