//! Measured two-phase flow samples and the preprocessing applied to them.

mod binning;
mod io;
mod split;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub use binning::{bin_by_quality, BinStats, DEFAULT_BINS};
pub use io::{load_dataset, read_dataset, write_dataset, ColumnMapping, COLUMNS, COMPOSITION_PREFIX, TEMPERATURE_COLUMN};
pub use split::{make_split, SplitAssignment, DEFAULT_FRACTIONS};

/// A violated domain bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub value: f64,
    pub bound: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} violates {}", self.field, self.value, self.bound)
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: column `{column}` is not numeric: `{value}`")]
    NonNumeric { line: u64, column: String, value: String },
    #[error("line {line}: {violation}")]
    RowInvariant { line: u64, violation: Violation },
    #[error("point {index}: {violation}")]
    PointInvariant { index: usize, violation: Violation },
    #[error("experiment `{0}` has non-constant channel geometry")]
    GeometryMismatch(String),
    #[error("point {index}: expected {expected} composition values, found {found}")]
    CompositionLength { index: usize, expected: usize, found: usize },
    #[error("n_bins must be at least 1")]
    ZeroBins,
    #[error("unknown holdout experiment `{0}`")]
    UnknownHoldout(String),
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    BadFractions([f64; 3]),
}

fn check(ok: bool, field: &'static str, value: f64, bound: &'static str) -> Result<(), Violation> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Violation { field, value, bound })
    }
}

/// Saturated phase properties at the local vapor quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    /// Liquid density, kg/m³.
    pub rho_l: f64,
    /// Vapor density, kg/m³.
    pub rho_v: f64,
    /// Liquid dynamic viscosity, Pa·s.
    pub mu_l: f64,
    /// Vapor dynamic viscosity, Pa·s.
    pub mu_v: f64,
    /// Surface tension, N/m.
    pub sigma: f64,
    /// Vapor quality.
    pub x: f64,
}

impl FluidState {
    pub fn validate(&self) -> Result<(), Violation> {
        check(self.rho_v > 0.0, "rho_v", self.rho_v, "rho_v > 0")?;
        check(self.rho_l > self.rho_v, "rho_l", self.rho_l, "rho_l > rho_v")?;
        check(self.mu_l > 0.0, "mu_l", self.mu_l, "mu_l > 0")?;
        check(self.mu_v > 0.0, "mu_v", self.mu_v, "mu_v > 0")?;
        check(self.sigma > 0.0, "sigma", self.sigma, "sigma > 0")?;
        check((0.0..=1.0).contains(&self.x), "x", self.x, "0 <= x <= 1")
    }

    pub fn with_quality(self, x: f64) -> Self {
        Self { x, ..self }
    }
}

/// Tube geometry, all lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    /// Internal diameter.
    pub id: f64,
    /// Absolute wall roughness.
    pub roughness: f64,
    /// Hydraulic diameter.
    pub d_h: f64,
}

impl ChannelGeometry {
    pub fn circular(id: f64, roughness: f64) -> Self {
        Self { id, roughness, d_h: id }
    }

    pub fn relative_roughness(&self) -> f64 {
        self.roughness / self.id
    }

    pub fn validate(&self) -> Result<(), Violation> {
        check(self.id > 0.0, "id", self.id, "id > 0")?;
        check(self.d_h > 0.0, "d_h", self.d_h, "d_h > 0")?;
        check(self.roughness >= 0.0, "roughness", self.roughness, "roughness >= 0")?;
        check(self.roughness < self.id, "roughness", self.roughness, "roughness < id")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowCondition {
    /// Mass flux, kg/(s·m²).
    pub g_flux: f64,
    /// Absolute pressure, kPa.
    pub pressure: f64,
    /// Temperature, K.
    pub temperature: Option<f64>,
}

impl FlowCondition {
    pub fn validate(&self) -> Result<(), Violation> {
        check(self.g_flux > 0.0, "G", self.g_flux, "G > 0")?;
        check(self.pressure > 0.0, "P", self.pressure, "P > 0")?;
        if let Some(t) = self.temperature {
            check(t > 0.0, "T", t, "T > 0")?;
        }
        Ok(())
    }
}

/// One measured sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPoint {
    pub experiment_id: String,
    pub fluid: FluidState,
    pub geometry: ChannelGeometry,
    pub flow: FlowCondition,
    /// Measured frictional pressure gradient, Pa/m.
    pub dpdz_exp: f64,
    /// Optional mixture composition fractions, aligned with
    /// [`Dataset::composition_names`].
    #[serde(default)]
    pub composition: Vec<f64>,
}

impl ExperimentPoint {
    pub fn validate(&self) -> Result<(), Violation> {
        self.fluid.validate()?;
        self.geometry.validate()?;
        self.flow.validate()?;
        check(self.dpdz_exp > 0.0, "dpdz_exp", self.dpdz_exp, "dpdz_exp > 0")?;
        for &c in &self.composition {
            check(true, "composition", c, "finite")?;
        }
        Ok(())
    }
}

/// An ordered collection of validated points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<ExperimentPoint>,
    experiments: Vec<String>,
    composition_names: Vec<String>,
    /// Per-point statistics of the raw samples merged into each point, set by
    /// [`bin_by_quality`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bin_stats: Option<Vec<BinStats>>,
}

impl Dataset {
    pub fn new(points: Vec<ExperimentPoint>, composition_names: Vec<String>) -> Result<Self, DataError> {
        let mut experiments: Vec<String> = Vec::new();
        for (index, p) in points.iter().enumerate() {
            p.validate().map_err(|violation| DataError::PointInvariant { index, violation })?;
            if p.composition.len() != composition_names.len() {
                return Err(DataError::CompositionLength {
                    index,
                    expected: composition_names.len(),
                    found: p.composition.len(),
                });
            }
            if !experiments.iter().any(|e| e == &p.experiment_id) {
                experiments.push(p.experiment_id.clone());
            }
        }
        Ok(Self { points, experiments, composition_names, bin_stats: None })
    }

    pub fn points(&self) -> &[ExperimentPoint] {
        &self.points
    }

    /// Distinct experiment labels in order of first appearance.
    pub fn experiments(&self) -> &[String] {
        &self.experiments
    }

    pub fn composition_names(&self) -> &[String] {
        &self.composition_names
    }

    pub fn bin_stats(&self) -> Option<&[BinStats]> {
        self.bin_stats.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains_experiment(&self, id: &str) -> bool {
        self.experiments.iter().any(|e| e == id)
    }

    /// Indices of the points belonging to `experiment_id`, in dataset order.
    pub fn indices_of(&self, experiment_id: &str) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.experiment_id == experiment_id)
            .map(|(i, _)| i)
            .collect()
    }

    /// A new dataset holding the points at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let points: Vec<_> = indices.iter().map(|&i| self.points[i].clone()).collect();
        let mut experiments: Vec<String> = Vec::new();
        for p in &points {
            if !experiments.contains(&p.experiment_id) {
                experiments.push(p.experiment_id.clone());
            }
        }
        let bin_stats = self
            .bin_stats
            .as_ref()
            .map(|s| indices.iter().map(|&i| s[i].clone()).collect());
        Dataset { points, experiments, composition_names: self.composition_names.clone(), bin_stats }
    }
}
