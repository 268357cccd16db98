use super::inputs::assemble_named;
use super::{mean, ExperimentError};
use crate::ann::{mre, TrainedModel};
use crate::correlations::{evaluate_correlation, CorrelationChoice};
use crate::datamodel::Dataset;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEvaluation {
    pub experiment_id: String,
    pub n_points: usize,
    pub model_mre: f64,
    pub correlation_mre: f64,
    pub holdout: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub reference: CorrelationChoice,
    pub experiments: Vec<ExperimentEvaluation>,
    /// Means over the per-experiment rows.
    pub model_mre_avg: f64,
    pub correlation_mre_avg: f64,
    pub holdout_model_mre_avg: Option<f64>,
    pub holdout_correlation_mre_avg: Option<f64>,
}

impl EvaluationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment_id,n_points,model_mre,correlation_mre,holdout\n");
        for e in &self.experiments {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.experiment_id, e.n_points, e.model_mre, e.correlation_mre, e.holdout
            ));
        }
        out
    }
}

/// Per-experiment mean relative error of the model and of a reference
/// correlation, over each experiment's points.
///
/// Model inputs are rebuilt from `ds` using the feature names stored in the
/// model; correlation-valued features use the reference's options.
pub fn evaluate_model(
    model: &TrainedModel,
    ds: &Dataset,
    reference: &CorrelationChoice,
    holdout_ids: &[String],
) -> Result<EvaluationReport, ExperimentError> {
    if model.feature_names.len() != model.params.n_in {
        return Err(ExperimentError::FeatureMismatch(format!(
            "model lists {} feature names for {} inputs",
            model.feature_names.len(),
            model.params.n_in
        )));
    }
    let batch = assemble_named(&model.feature_names, ds, &reference.options).map_err(|e| match e {
        ExperimentError::Feature { index, source } => {
            ExperimentError::FeatureMismatch(format!("cannot derive model input at point {index}: {source}"))
        }
        other => other,
    })?;
    let model_pred = model.predict(&batch.inputs);
    let corr_pred = ds
        .points()
        .iter()
        .enumerate()
        .map(|(index, p)| {
            evaluate_correlation(reference, p).map(|r| r.0.dpdz()).map_err(|e| ExperimentError::Feature {
                index,
                source: e.into(),
            })
        })
        .collect::<Result<Vec<f64>, _>>()?;

    let mut experiments = Vec::with_capacity(ds.experiments().len());
    for exp in ds.experiments() {
        let idx = ds.indices_of(exp);
        let t: Vec<f64> = idx.iter().map(|&i| batch.targets[i]).collect();
        let m: Vec<f64> = idx.iter().map(|&i| model_pred[i]).collect();
        let c: Vec<f64> = idx.iter().map(|&i| corr_pred[i]).collect();
        experiments.push(ExperimentEvaluation {
            experiment_id: exp.clone(),
            n_points: idx.len(),
            model_mre: mre(&t, &m)?,
            correlation_mre: mre(&t, &c)?,
            holdout: holdout_ids.contains(exp),
        });
    }
    let held = || experiments.iter().filter(|e| e.holdout);
    Ok(EvaluationReport {
        reference: *reference,
        model_mre_avg: mean(experiments.iter().map(|e| e.model_mre)).unwrap_or(f64::NAN),
        correlation_mre_avg: mean(experiments.iter().map(|e| e.correlation_mre)).unwrap_or(f64::NAN),
        holdout_model_mre_avg: mean(held().map(|e| e.model_mre)),
        holdout_correlation_mre_avg: mean(held().map(|e| e.correlation_mre)),
        experiments,
    })
}
