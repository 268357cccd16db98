//! The correlation-informed regression network and its training.
//!
//! Inputs are min-max scaled to [-1, 1], pass through one tanh hidden layer,
//! and a linear output neuron whose value is mapped back from [-1, 1] to the
//! physical target range. Weights are fitted with Levenberg–Marquardt on the
//! scaled-output mean square error, restarted from many seeded random
//! initialisations; the restart with the lowest mean relative error on the
//! selection set wins.

mod lm;
mod metrics;
mod model;
mod multistart;
mod network;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lm::{lm_fit, LmOutcome, StopReason};
pub use metrics::{mre, mse};
pub use model::{ModelFile, MODEL_FORMAT_VERSION};
pub use multistart::{train_multistart, RestartRecord, TrainedModel};
pub use network::{jacobian, NetworkParams, Scale};

#[derive(Debug, Error)]
pub enum AnnError {
    #[error("length mismatch: {0} targets vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("target {0} is zero; relative error undefined")]
    ZeroTarget(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("sample {index} has {found} inputs, network expects {expected}")]
    InputWidth { index: usize, expected: usize, found: usize },
    #[error("invalid network parameters: {0}")]
    InvalidParams(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("all {} restarts diverged", .0.len())]
    AllDiverged(Vec<RestartRecord>),
    #[error("model file: {0}")]
    ModelFile(String),
}

/// Input vectors with their physical targets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub feature_names: Vec<String>,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Batch {
    pub fn new(feature_names: Vec<String>, inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, AnnError> {
        if inputs.len() != targets.len() {
            return Err(AnnError::LengthMismatch(targets.len(), inputs.len()));
        }
        let width = feature_names.len();
        for (index, row) in inputs.iter().enumerate() {
            if row.len() != width {
                return Err(AnnError::InputWidth { index, expected: width, found: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(AnnError::NonFinite("inputs"));
            }
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(AnnError::NonFinite("targets"));
        }
        Ok(Self { feature_names, inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_in(&self) -> usize {
        self.feature_names.len()
    }

    pub fn select(&self, indices: &[usize]) -> Batch {
        Batch {
            feature_names: self.feature_names.clone(),
            inputs: indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    /// `JᵀJ + λI`
    #[default]
    Levenberg,
    /// `JᵀJ + λ diag(JᵀJ)`
    Marquardt,
}

/// The set whose mean relative error picks the winning restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionSet {
    #[default]
    Validation,
    Train,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub n_restarts: usize,
    pub max_iter: usize,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub lambda_max: f64,
    pub grad_tol: f64,
    pub seed: u64,
    pub selection: SelectionSet,
    pub damping: Damping,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_restarts: 1000,
            max_iter: 1000,
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
            lambda_max: 1e10,
            grad_tol: 1e-10,
            seed: 0,
            selection: SelectionSet::Validation,
            damping: Damping::Levenberg,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), AnnError> {
        let bad = |m: &str| Err(AnnError::InvalidConfig(m.to_string()));
        if self.n_restarts == 0 {
            return bad("n_restarts must be >= 1");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1");
        }
        if !(self.lambda_up > 1.0 && self.lambda_down < 1.0 && self.lambda_down > 0.0) {
            return bad("damping multipliers must satisfy lambda_up > 1 > lambda_down > 0");
        }
        if !(self.lambda_init > 0.0 && self.lambda_max >= self.lambda_init) {
            return bad("need 0 < lambda_init <= lambda_max");
        }
        if !(self.grad_tol >= 0.0) {
            return bad("grad_tol must be >= 0");
        }
        Ok(())
    }
}
