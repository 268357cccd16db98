//! Studies built from the lower layers: input-set comparison with
//! hidden-neuron sweeps, per-experiment model-vs-correlation evaluation, and a
//! synthetic benchmark with a known correction to Sun & Mishima.

mod evaluate;
mod inputs;
mod sweep;
pub mod synthetic;

use crate::analysis::FeatureError;
use crate::ann::AnnError;
use crate::datamodel::DataError;
use thiserror::Error;

pub use evaluate::{evaluate_model, EvaluationReport, ExperimentEvaluation};
pub use inputs::{assemble_inputs, InputSetSpec, ALL_FEATURES};
pub use sweep::{cell_seed, run_cell, run_sweep, SweepCell, SweepReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Ann(#[from] AnnError),
    #[error("point {index}: {source}")]
    Feature {
        index: usize,
        #[source]
        source: FeatureError,
    },
    #[error("invalid input set: {0}")]
    InvalidSpec(String),
    #[error("{0}")]
    FeatureMismatch(String),
}

/// Mean of the finite values, `None` when there are none.
pub(crate) fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}
