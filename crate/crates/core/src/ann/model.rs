use super::{AnnError, NetworkParams, Scale, TrainedModel};
use serde::{Deserialize, Serialize};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk form of a trained network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub n_in: usize,
    pub n_hidden: usize,
    /// `n_hidden` rows of `n_in` weights.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    /// `[min, max]` per input.
    pub in_scale: Vec<[f64; 2]>,
    pub out_scale: [f64; 2],
    pub seed_used: u64,
    pub chosen_restart: usize,
    pub input_feature_names: Vec<String>,
}

impl ModelFile {
    pub fn from_model(model: &TrainedModel) -> Self {
        let p = &model.params;
        Self {
            version: MODEL_FORMAT_VERSION,
            n_in: p.n_in,
            n_hidden: p.n_hidden,
            w1: p.w1.chunks(p.n_in).map(<[f64]>::to_vec).collect(),
            b1: p.b1.clone(),
            w2: p.w2.clone(),
            b2: p.b2,
            in_scale: p.in_scale.iter().map(|s| [s.min, s.max]).collect(),
            out_scale: [p.out_scale.min, p.out_scale.max],
            seed_used: model.seed_used,
            chosen_restart: model.chosen_restart,
            input_feature_names: model.feature_names.clone(),
        }
    }

    /// Rebuild the model; restart history is not stored on disk.
    pub fn into_model(self) -> Result<TrainedModel, AnnError> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(AnnError::ModelFile(format!("unsupported version {}", self.version)));
        }
        if self.input_feature_names.len() != self.n_in {
            return Err(AnnError::ModelFile(format!(
                "{} feature names for {} inputs",
                self.input_feature_names.len(),
                self.n_in
            )));
        }
        if self.w1.len() != self.n_hidden || self.w1.iter().any(|r| r.len() != self.n_in) {
            return Err(AnnError::ModelFile("w1 shape does not match n_hidden x n_in".into()));
        }
        let params = NetworkParams {
            n_in: self.n_in,
            n_hidden: self.n_hidden,
            w1: self.w1.concat(),
            b1: self.b1,
            w2: self.w2,
            b2: self.b2,
            in_scale: self.in_scale.iter().map(|s| Scale::new(s[0], s[1])).collect(),
            out_scale: Scale::new(self.out_scale[0], self.out_scale[1]),
        };
        params.validate()?;
        Ok(TrainedModel {
            params,
            feature_names: self.input_feature_names,
            history: Vec::new(),
            chosen_restart: self.chosen_restart,
            seed_used: self.seed_used,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, AnnError> {
        serde_json::from_str(text).map_err(|e| AnnError::ModelFile(e.to_string()))
    }
}

impl TrainedModel {
    /// Check that `names` matches the model's recorded input order.
    pub fn check_features(&self, names: &[String]) -> Result<(), AnnError> {
        if names != self.feature_names.as_slice() {
            return Err(AnnError::ModelFile(format!(
                "model expects features {:?}, got {:?}",
                self.feature_names, names
            )));
        }
        Ok(())
    }
}
