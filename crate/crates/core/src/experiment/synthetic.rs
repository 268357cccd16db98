//! A synthetic stand-in for the measured database.
//!
//! Experiments are spread over the measured operating envelope (ID 0.5–2.9 mm,
//! G 143–242 kg/(s·m²), ξ 0.4–2.56 μm, P 265–789 kPa) with a Latin-hypercube
//! design. The "measured" gradient is the Sun & Mishima prediction times a
//! smooth quality-dependent factor `1 + A·sin(2πx)` and multiplicative
//! Gaussian noise, so the correlation is biased in a way a small network can
//! learn from `(x, ID, S&M)`.

use crate::correlations::sun_mishima_dpdz;
use crate::datamodel::{ChannelGeometry, DataError, Dataset, ExperimentPoint, FlowCondition, FluidState};
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const ID_MM: (f64, f64) = (0.5, 2.9);
pub const G_FLUX: (f64, f64) = (143.0, 242.0);
pub const ROUGHNESS_UM: (f64, f64) = (0.4, 2.56);
pub const PRESSURE_KPA: (f64, f64) = (265.0, 789.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticTask {
    pub n_experiments: usize,
    pub points_per_experiment: usize,
    /// Amplitude of the `sin(2πx)` correction.
    pub amplitude: f64,
    /// Relative standard deviation of the multiplicative noise.
    pub noise: f64,
    pub n_holdout: usize,
    pub seed: u64,
}

impl Default for SyntheticTask {
    fn default() -> Self {
        Self { n_experiments: 30, points_per_experiment: 40, amplitude: 0.3, noise: 0.02, n_holdout: 5, seed: 2022 }
    }
}

/// Latin-hypercube coordinate: `n` stratified values in [lo, hi], shuffled.
fn stratified<R: Rng>(n: usize, (lo, hi): (f64, f64), r: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64).collect();
    v.shuffle(r);
    v
}

impl SyntheticTask {
    pub fn label(k: usize) -> String {
        format!("S{:02}", k + 1)
    }

    /// Saturated properties for a reduced pressure `t ∈ [0, 1]`: liquid and
    /// vapor densities converge, surface tension and liquid viscosity drop.
    fn fluid(t: f64, x: f64) -> FluidState {
        FluidState {
            rho_l: 560.0 - 60.0 * t,
            rho_v: 8.0 + 22.0 * t,
            mu_l: 1.7e-4 - 0.5e-4 * t,
            mu_v: 8.0e-6 + 2.0e-6 * t,
            sigma: 0.012 - 0.005 * t,
            x,
        }
    }

    fn design(&self) -> Vec<[f64; 4]> {
        let mut r = rng::stream(self.seed, rng::domain::SYNTHETIC, &[0]);
        let n = self.n_experiments;
        let id = stratified(n, ID_MM, &mut r);
        let g = stratified(n, G_FLUX, &mut r);
        let rough = stratified(n, ROUGHNESS_UM, &mut r);
        let p = stratified(n, PRESSURE_KPA, &mut r);
        (0..n).map(|k| [id[k], g[k], rough[k], p[k]]).collect()
    }

    pub fn generate(&self) -> Result<Dataset, DataError> {
        let mut points = Vec::with_capacity(self.n_experiments * self.points_per_experiment);
        let n_pts = self.points_per_experiment;
        for (k, [id_mm, g, rough_um, p_kpa]) in self.design().into_iter().enumerate() {
            let mut r = rng::stream(self.seed, rng::domain::SYNTHETIC, &[1, k as u64]);
            let geometry = ChannelGeometry::circular(id_mm * 1e-3, rough_um * 1e-6);
            let flow = FlowCondition { g_flux: g, pressure: p_kpa, temperature: None };
            let t = (p_kpa - PRESSURE_KPA.0) / (PRESSURE_KPA.1 - PRESSURE_KPA.0);
            for j in 0..n_pts {
                let x = (j as f64 + 0.1 + 0.8 * r.gen::<f64>()) / n_pts as f64;
                let fluid = Self::fluid(t, x);
                let sm = sun_mishima_dpdz(&fluid, &geometry, &flow)
                    .expect("synthetic states are valid")
                    .0
                    .dpdz();
                let eps: f64 = r.sample(StandardNormal);
                let factor = 1.0 + self.amplitude * (std::f64::consts::TAU * x).sin();
                points.push(ExperimentPoint {
                    experiment_id: Self::label(k),
                    fluid,
                    geometry,
                    flow,
                    dpdz_exp: sm * factor * (1.0 + self.noise * eps),
                    composition: Vec::new(),
                });
            }
        }
        Dataset::new(points, Vec::new())
    }

    /// Experiments held out of training: evenly spaced ranks of the diameter
    /// design, so every holdout lies inside the trained diameter range.
    pub fn holdout_ids(&self) -> Vec<String> {
        let design = self.design();
        let mut by_id: Vec<usize> = (0..design.len()).collect();
        by_id.sort_by(|&a, &b| design[a][0].total_cmp(&design[b][0]));
        let h = self.n_holdout.min(design.len().saturating_sub(2));
        let mut ids: Vec<usize> = (0..h).map(|i| by_id[(i + 1) * design.len() / (h + 1)]).collect();
        ids.sort_unstable();
        ids.into_iter().map(Self::label).collect()
    }
}
