use super::ExperimentError;
use crate::analysis::{feature_names, point_feature, TARGET};
use crate::ann::Batch;
use crate::correlations::CorrelationOptions;
use crate::datamodel::Dataset;
use serde::{Deserialize, Serialize};

/// Expands to every feature-table column except the target.
pub const ALL_FEATURES: &str = "all";

/// A named, ordered list of network inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSetSpec {
    pub name: String,
    pub features: Vec<String>,
}

impl InputSetSpec {
    pub fn new(name: &str, features: &[&str]) -> Self {
        Self { name: name.to_string(), features: features.iter().map(|s| s.to_string()).collect() }
    }

    /// The four input configurations compared in the architecture study.
    pub fn standard_sets() -> Vec<InputSetSpec> {
        vec![
            Self::new("x-roughness-G-Re", &["x", "roughness", "G", "Re_2ph"]),
            Self::new("x-ID-S&M", &["x", "ID", "sun_mishima"]),
            Self::new("x-ID-Awad", &["x", "ID", "awad"]),
            Self::new("all", &[ALL_FEATURES]),
        ]
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.features.is_empty() {
            return Err(ExperimentError::InvalidSpec(format!("`{}` has no features", self.name)));
        }
        for (i, f) in self.features.iter().enumerate() {
            if self.features[..i].contains(f) {
                return Err(ExperimentError::InvalidSpec(format!("`{}` lists `{f}` twice", self.name)));
            }
            if f == TARGET {
                return Err(ExperimentError::InvalidSpec(format!("`{}` uses the target as an input", self.name)));
            }
        }
        Ok(())
    }

    /// Concrete feature names for `ds`, with `all` expanded in place.
    pub fn resolve(&self, ds: &Dataset) -> Result<Vec<String>, ExperimentError> {
        self.validate()?;
        let mut out: Vec<String> = Vec::new();
        for f in &self.features {
            if f == ALL_FEATURES {
                out.extend(feature_names(ds).into_iter().filter(|n| n != TARGET));
            } else {
                out.push(f.clone());
            }
        }
        for (i, f) in out.iter().enumerate() {
            if out[..i].contains(f) {
                return Err(ExperimentError::InvalidSpec(format!("`{}` resolves to `{f}` twice", self.name)));
            }
        }
        Ok(out)
    }
}

/// Input vectors (in the input set's feature order) and measured targets for every
/// point of `ds`.
pub fn assemble_inputs(spec: &InputSetSpec, ds: &Dataset, opts: &CorrelationOptions) -> Result<Batch, ExperimentError> {
    let names = spec.resolve(ds)?;
    assemble_named(&names, ds, opts)
}

pub(crate) fn assemble_named(names: &[String], ds: &Dataset, opts: &CorrelationOptions) -> Result<Batch, ExperimentError> {
    let mut inputs = Vec::with_capacity(ds.len());
    for (index, p) in ds.points().iter().enumerate() {
        let row = names
            .iter()
            .map(|n| point_feature(p, n, ds.composition_names(), opts))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|source| ExperimentError::Feature { index, source })?;
        inputs.push(row);
    }
    let targets = ds.points().iter().map(|p| p.dpdz_exp).collect();
    Ok(Batch::new(names.to_vec(), inputs, targets)?)
}
