use super::inputs::assemble_inputs;
use super::{mean, ExperimentError, InputSetSpec};
use crate::ann::{mre, train_multistart, Batch, TrainConfig};
use crate::correlations::CorrelationOptions;
use crate::datamodel::{make_split, Dataset, SplitAssignment};
use crate::rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Result of training one (input set, hidden size) architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub input_set: String,
    pub n_hidden: usize,
    pub seed: u64,
    pub train_mre: Option<f64>,
    pub validation_mre: Option<f64>,
    pub test_mre: Option<f64>,
    pub holdout_mre: Option<f64>,
    /// Unweighted mean of the test and holdout mre (test alone without holdouts).
    pub averaged_mre: Option<f64>,
    pub chosen_restart: Option<usize>,
    pub runtime_ms: u128,
    pub error: Option<String>,
}

impl SweepCell {
    /// Equality on everything except wall-clock runtime.
    pub fn same_result(&self, other: &SweepCell) -> bool {
        SweepCell { runtime_ms: 0, ..self.clone() } == SweepCell { runtime_ms: 0, ..other.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub master_seed: u64,
    pub n_restarts: usize,
    pub n_hidden: Vec<usize>,
    pub holdout_ids: Vec<String>,
    pub cells: Vec<SweepCell>,
    /// Per input set, the hidden size with the lowest averaged mre.
    pub best: Vec<(String, usize)>,
}

impl SweepReport {
    pub fn cell(&self, input_set: &str, n_hidden: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.input_set == input_set && c.n_hidden == n_hidden)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v}")).unwrap_or_default();
        let mut out = String::from(
            "input_set,n_hidden,seed,train_mre,validation_mre,test_mre,holdout_mre,averaged_mre,chosen_restart,runtime_ms,error\n",
        );
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                c.input_set,
                c.n_hidden,
                c.seed,
                opt(c.train_mre),
                opt(c.validation_mre),
                opt(c.test_mre),
                opt(c.holdout_mre),
                opt(c.averaged_mre),
                c.chosen_restart.map(|v| v.to_string()).unwrap_or_default(),
                c.runtime_ms,
                c.error.as_deref().unwrap_or("").replace(',', ";"),
            ));
        }
        out
    }
}

fn name_key(name: &str) -> u64 {
    // FNV-1a
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Training seed of one cell, derived from the master seed, the input-set name
/// and the hidden size only.
pub fn cell_seed(master: u64, input_set: &str, n_hidden: usize) -> u64 {
    rng::derive_seed(master, rng::domain::SWEEP_CELL, &[name_key(input_set), n_hidden as u64])
}

fn set_mre(model: &crate::ann::TrainedModel, b: &Batch) -> Result<Option<f64>, ExperimentError> {
    if b.is_empty() {
        return Ok(None);
    }
    Ok(Some(mre(&b.targets, &model.predict(&b.inputs))?))
}

/// Train and score one architecture on a precomputed split.
pub fn run_cell(
    spec: &InputSetSpec,
    all: &Batch,
    split: &SplitAssignment,
    n_hidden: usize,
    cfg: &TrainConfig,
) -> SweepCell {
    let seed = cell_seed(cfg.seed, &spec.name, n_hidden);
    let started = Instant::now();
    let mut cell = SweepCell {
        input_set: spec.name.clone(),
        n_hidden,
        seed,
        train_mre: None,
        validation_mre: None,
        test_mre: None,
        holdout_mre: None,
        averaged_mre: None,
        chosen_restart: None,
        runtime_ms: 0,
        error: None,
    };
    let outcome = (|| -> Result<(), ExperimentError> {
        let cell_cfg = TrainConfig { seed, ..cfg.clone() };
        let train = all.select(&split.train);
        let validation = all.select(&split.validation);
        let model = train_multistart(&train, &validation, &cell_cfg, n_hidden)?;
        cell.chosen_restart = Some(model.chosen_restart);
        cell.train_mre = set_mre(&model, &train)?;
        cell.validation_mre = set_mre(&model, &validation)?;
        cell.test_mre = set_mre(&model, &all.select(&split.test))?;
        cell.holdout_mre = set_mre(&model, &all.select(&split.holdout))?;
        cell.averaged_mre = mean(cell.test_mre.into_iter().chain(cell.holdout_mre));
        Ok(())
    })();
    if let Err(e) = outcome {
        cell.error = Some(e.to_string());
    }
    cell.runtime_ms = started.elapsed().as_millis();
    cell
}

/// Train every (input set, hidden size) combination on one shared split.
///
/// Failures (including every restart diverging) are recorded in the cell and
/// do not stop the sweep. Invalid input sets or splits are fatal.
pub fn run_sweep(
    ds: &Dataset,
    specs: &[InputSetSpec],
    n_hidden: &[usize],
    cfg: &TrainConfig,
    holdout_ids: &[String],
    fractions: [f64; 3],
    opts: &CorrelationOptions,
) -> Result<SweepReport, ExperimentError> {
    cfg.validate()?;
    let split = make_split(ds, holdout_ids, fractions, cfg.seed)?;
    let batches = specs.iter().map(|s| assemble_inputs(s, ds, opts)).collect::<Result<Vec<_>, _>>()?;

    let mut cells = Vec::with_capacity(specs.len() * n_hidden.len());
    let mut best = Vec::new();
    for (spec, batch) in specs.iter().zip(&batches) {
        let start = cells.len();
        for &h in n_hidden {
            cells.push(run_cell(spec, batch, &split, h, cfg));
        }
        let winner = cells[start..]
            .iter()
            .filter_map(|c| c.averaged_mre.map(|m| (c.n_hidden, m)))
            .fold(None, |acc: Option<(usize, f64)>, (h, m)| match acc {
                Some((_, bm)) if bm <= m => acc,
                _ => Some((h, m)),
            });
        if let Some((h, _)) = winner {
            best.push((spec.name.clone(), h));
        }
    }
    Ok(SweepReport {
        master_seed: cfg.seed,
        n_restarts: cfg.n_restarts,
        n_hidden: n_hidden.to_vec(),
        holdout_ids: holdout_ids.to_vec(),
        cells,
        best,
    })
}
