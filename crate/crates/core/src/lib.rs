//! Correlation-informed neural networks (CoINN) for frictional two-phase
//! pressure-gradient prediction in micro-channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`datamodel`]: measured points, CSV ingestion, quality binning and seeded splits.
//! - [`correlations`]: homogeneous (Cicchitti, Awad & Muzychka) and Sun & Mishima
//!   pressure-gradient correlations built on the Churchill friction factor.
//! - [`ann`]: the single-hidden-layer tanh network, its analytic Jacobian, a
//!   Levenberg–Marquardt trainer and multi-start orchestration.
//! - [`analysis`]: Pearson / Spearman feature-correlation matrices.
//! - [`experiment`]: input-set assembly, hidden-neuron sweeps, per-experiment
//!   evaluation and a synthetic benchmark task.
//!
//! Everything is a pure function of its inputs and an explicit `u64` seed.

pub mod analysis;
pub mod ann;
pub mod correlations;
pub mod datamodel;
pub mod experiment;
pub mod rng;

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use analysis::{CorrelationMatrix, FeatureTable};
pub use ann::{NetworkParams, TrainConfig, TrainedModel};
pub use correlations::{CorrelationBreakdown, CorrelationChoice, CorrelationKind, PressureGradient};
pub use datamodel::{Dataset, ExperimentPoint, SplitAssignment};
