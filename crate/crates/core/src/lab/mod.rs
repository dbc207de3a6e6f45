//! Measurement harness: closed-form bounds, empirical stability, fairness
//! and generalization metrics, Bregman divergences, synthetic populations
//! and the repeated-split protocol.

pub mod bounds;
pub mod bregman;
pub mod metrics;
pub mod stability;
pub mod suite;
pub mod synthetic;

pub use bounds::BoundInputs;
pub use metrics::{generalization_gap, prediction_agreement_check, stab_metric};
pub use stability::{empirical_uniform_stability, estimate_g, ReplacementSampler, StabilityEstimate};
pub use suite::{run_stability_suite, Protocol, ResampleMode, StabilityReport};
pub use synthetic::GroupGaussian;
