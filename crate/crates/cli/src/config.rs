use crate::error::CliError;
use coinn::ann::TrainConfig;
use coinn::correlations::{CorrelationChoice, CorrelationKind, CorrelationOptions, DEFAULT_LAMINAR_THRESHOLD};
use coinn::datamodel::{ColumnMapping, DEFAULT_BINS, DEFAULT_FRACTIONS};
use coinn::experiment::synthetic::SyntheticTask;
use coinn::experiment::InputSetSpec;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const CONFIG_VERSION: u32 = 1;

/// Where the points come from: a CSV file or the generated benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSource {
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Canonical column name -> header in the file.
    #[serde(default)]
    pub columns: ColumnMapping,
    #[serde(default)]
    pub synthetic: Option<SyntheticTask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessSection {
    #[serde(default = "default_bins")]
    pub n_bins: usize,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self { n_bins: DEFAULT_BINS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    /// Reference correlation for `evaluate` and correlation-only `predict`.
    #[serde(default = "default_kind")]
    pub kind: CorrelationKind,
    #[serde(default)]
    pub literal_mode: bool,
    #[serde(default = "default_threshold")]
    pub laminar_threshold: f64,
}

impl Default for CorrelationSection {
    fn default() -> Self {
        Self { kind: CorrelationKind::SunMishima, literal_mode: false, laminar_threshold: DEFAULT_LAMINAR_THRESHOLD }
    }
}

impl CorrelationSection {
    pub fn options(&self) -> CorrelationOptions {
        CorrelationOptions { literal_mode: self.literal_mode, laminar_threshold: self.laminar_threshold }
    }

    pub fn choice(&self) -> CorrelationChoice {
        CorrelationChoice { kind: self.kind, options: self.options() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiddenRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A complete run description. Relative paths resolve against the directory
/// holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    #[serde(default)]
    pub dataset: Option<DatasetSource>,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub correlation: CorrelationSection,
    /// Training hyperparameters; the seed comes from the top level.
    #[serde(default, deserialize_with = "train_without_seed")]
    pub train: TrainConfig,
    #[serde(default = "InputSetSpec::standard_sets")]
    pub input_sets: Vec<InputSetSpec>,
    /// Input set used by `train`.
    #[serde(default = "default_input_set")]
    pub input_set: String,
    #[serde(default = "default_hidden")]
    pub n_hidden: usize,
    /// Hidden sizes visited by `sweep`, inclusive.
    #[serde(default = "default_range")]
    pub n_hidden_range: HiddenRange,
    /// Defaults to none for files and to the task's own holdouts for
    /// synthetic data.
    #[serde(default)]
    pub holdout_ids: Option<Vec<String>>,
    #[serde(default = "default_fractions")]
    pub fractions: [f64; 3],
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub model_path: Option<PathBuf>,
    /// Columns for `analyze`; every feature when absent.
    #[serde(default)]
    pub analysis_columns: Option<Vec<String>>,
}

fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_kind() -> CorrelationKind {
    CorrelationKind::SunMishima
}
fn default_threshold() -> f64 {
    DEFAULT_LAMINAR_THRESHOLD
}
fn default_input_set() -> String {
    "x-ID-S&M".into()
}
fn default_hidden() -> usize {
    6
}
fn default_range() -> HiddenRange {
    HiddenRange { min: 1, max: 15 }
}
fn default_fractions() -> [f64; 3] {
    DEFAULT_FRACTIONS
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

fn train_without_seed<'de, D: Deserializer<'de>>(d: D) -> Result<TrainConfig, D::Error> {
    let v = serde_json::Value::deserialize(d)?;
    if v.get("seed").is_some() {
        return Err(serde::de::Error::custom("`train.seed` is not allowed; set the top-level `seed`"));
    }
    serde_json::from_value(v).map_err(serde::de::Error::custom)
}

impl RunConfig {
    /// Defaults everywhere, for subcommands that can run without a file.
    pub fn bare(seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "version": CONFIG_VERSION, "seed": seed }))
            .expect("defaults deserialize")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Read, parse and make paths absolute relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.dataset.as_mut().and_then(|d| d.path.as_mut()) {
            join(p);
        }
        if let Some(p) = self.model_path.as_mut() {
            join(p);
        }
        join(&mut self.output_dir);
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        (self.n_hidden_range.min..=self.n_hidden_range.max).collect()
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn train_spec(&self) -> Result<&InputSetSpec, CliError> {
        self.input_sets
            .iter()
            .find(|s| s.name == self.input_set)
            .ok_or_else(|| CliError::Config(format!("input_set `{}` is not in input_sets", self.input_set)))
    }

    /// Holdouts as configured, falling back to the synthetic task's own.
    pub fn holdouts(&self) -> Vec<String> {
        match (&self.holdout_ids, self.dataset.as_ref().and_then(|d| d.synthetic.as_ref())) {
            (Some(ids), _) => ids.clone(),
            (None, Some(task)) => task.holdout_ids(),
            (None, None) => Vec::new(),
        }
    }

    /// Structural checks that need no data. `needs_dataset` also demands an
    /// existing dataset source.
    pub fn validate(&self, needs_dataset: bool) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        match &self.dataset {
            Some(DatasetSource { path: Some(_), synthetic: Some(_), .. }) => {
                return bad("dataset: give either `path` or `synthetic`, not both".into())
            }
            Some(DatasetSource { path: Some(p), .. }) if !p.is_file() => {
                return bad(format!("dataset file not found: {}", p.display()))
            }
            Some(DatasetSource { path: None, synthetic: None, .. }) => {
                return bad("dataset: one of `path` or `synthetic` is required".into())
            }
            None if needs_dataset => return bad("`dataset` is required for this command".into()),
            _ => {}
        }
        if self.preprocess.n_bins == 0 {
            return bad("preprocess.n_bins must be at least 1".into());
        }
        if !(self.correlation.laminar_threshold > 0.0) || !self.correlation.laminar_threshold.is_finite() {
            return bad("correlation.laminar_threshold must be positive".into());
        }
        self.train_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.input_sets.is_empty() {
            return bad("input_sets is empty".into());
        }
        for (i, s) in self.input_sets.iter().enumerate() {
            s.validate().map_err(|e| CliError::Config(e.to_string()))?;
            if self.input_sets[..i].iter().any(|o| o.name == s.name) {
                return bad(format!("input set `{}` is defined twice", s.name));
            }
        }
        if self.n_hidden == 0 || self.n_hidden_range.min == 0 || self.n_hidden_range.min > self.n_hidden_range.max {
            return bad("hidden sizes must be at least 1 and n_hidden_range.min <= max".into());
        }
        let sum: f64 = self.fractions.iter().sum();
        if self.fractions.iter().any(|f| !(*f >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return bad(format!("fractions must be non-negative and sum to 1, got {:?}", self.fractions));
        }
        if self.formats.is_empty() {
            return bad("formats is empty".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
