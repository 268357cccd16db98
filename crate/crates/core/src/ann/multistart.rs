use super::{lm_fit, mre, AnnError, Batch, NetworkParams, Scale, SelectionSet, StopReason, TrainConfig};
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    /// Final scaled-output training mse.
    pub train_mse: f64,
    /// Mean relative error (%) on the selection set, physical units.
    pub selection_mre: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

impl RestartRecord {
    pub fn diverged(&self) -> bool {
        !self.selection_mre.is_finite() || !self.train_mse.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub params: NetworkParams,
    pub feature_names: Vec<String>,
    pub history: Vec<RestartRecord>,
    pub chosen_restart: usize,
    pub seed_used: u64,
}

impl TrainedModel {
    pub fn predict(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        self.params.predict(inputs)
    }

    pub fn chosen(&self) -> &RestartRecord {
        &self.history[self.chosen_restart]
    }
}

/// Per-input and output min-max scaling from the training set.
pub(crate) fn fit_scales(train: &Batch) -> (Vec<Scale>, Scale) {
    let ins = (0..train.n_in()).map(|j| Scale::fit(train.inputs.iter().map(|r| r[j]))).collect();
    (ins, Scale::fit(train.targets.iter().copied()))
}

/// Initial parameters of restart `index` under master seed `seed`.
pub(crate) fn initial_params(seed: u64, index: usize, n_in: usize, n_hidden: usize, scales: &(Vec<Scale>, Scale)) -> NetworkParams {
    let mut r = rng::stream(seed, rng::domain::RESTART, &[index as u64]);
    NetworkParams::random_uniform(n_in, n_hidden, scales.0.clone(), scales.1, &mut r)
}

/// Run `cfg.n_restarts` independent LM fits and keep the one with the lowest
/// selection-set mean relative error (ties go to the lowest restart index).
///
/// Restarts run on the current rayon pool; each draws its initial weights
/// from a stream derived from `(cfg.seed, restart)`, so the result does not
/// depend on the number of threads.
pub fn train_multistart(train: &Batch, validation: &Batch, cfg: &TrainConfig, n_hidden: usize) -> Result<TrainedModel, AnnError> {
    cfg.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(AnnError::Empty);
    }
    if n_hidden == 0 {
        return Err(AnnError::InvalidParams("n_hidden must be >= 1".into()));
    }
    if validation.n_in() != train.n_in() {
        return Err(AnnError::InputWidth { index: 0, expected: train.n_in(), found: validation.n_in() });
    }
    let selection = match cfg.selection {
        SelectionSet::Validation => validation,
        SelectionSet::Train => train,
    };
    let scales = fit_scales(train);

    let runs: Vec<Result<(RestartRecord, NetworkParams), AnnError>> = (0..cfg.n_restarts)
        .into_par_iter()
        .map(|i| {
            let init = initial_params(cfg.seed, i, train.n_in(), n_hidden, &scales);
            let fit = lm_fit(&init, train, cfg)?;
            let pred = fit.params.predict(&selection.inputs);
            let selection_mre = match mre(&selection.targets, &pred) {
                Ok(v) if v.is_finite() => v,
                Ok(_) => f64::INFINITY,
                Err(AnnError::ZeroTarget(i)) => return Err(AnnError::ZeroTarget(i)),
                Err(e) => return Err(e),
            };
            let record = RestartRecord {
                restart: i,
                train_mse: fit.final_mse(),
                selection_mre,
                iterations: fit.iterations,
                stop: fit.stop,
            };
            Ok((record, fit.params))
        })
        .collect();

    let mut history = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, NetworkParams)> = None;
    for run in runs {
        let (record, params) = run?;
        if !record.diverged() {
            let better = match &best {
                None => true,
                Some((b, _)) => record.selection_mre < history.get(*b).map_or(f64::INFINITY, |r: &RestartRecord| r.selection_mre),
            };
            if better {
                best = Some((record.restart, params));
            }
        }
        history.push(record);
    }
    match best {
        Some((chosen_restart, params)) => Ok(TrainedModel {
            params,
            feature_names: train.feature_names.clone(),
            history,
            chosen_restart,
            seed_used: cfg.seed,
        }),
        None => Err(AnnError::AllDiverged(history)),
    }
}
