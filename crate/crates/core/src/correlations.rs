//! Frictional two-phase pressure-gradient correlations.
//!
//! Two homogeneous models share the Churchill friction factor and differ only
//! in the two-phase viscosity (Cicchitti: quality-weighted mean; Awad &
//! Muzychka: effective-conductivity analogue). The Sun & Mishima model is a
//! separated-flow correlation: the liquid-alone gradient times a Chisholm-type
//! multiplier whose C coefficient carries a Laplace-number dependence.
//!
//! All functions are frictional-only and take SI inputs. `literal_mode`
//! switches to the as-printed variants of the published formulas (no log in the
//! Churchill `a` term with absolute roughness, a single power of G in the phase
//! gradients, a negative C term, and X as a plain gradient ratio).

use crate::datamodel::{ChannelGeometry, ExperimentPoint, FlowCondition, FluidState, Violation};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.80665;
pub const DEFAULT_LAMINAR_THRESHOLD: f64 = 2000.0;
/// Qualities closer than this to 0 or 1 are treated as single-phase.
pub const QUALITY_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelationError {
    #[error("Reynolds number must be positive, got {0}")]
    NonPositiveReynolds(f64),
    #[error("Laplace number undefined: rho_l = {rho_l} is not greater than rho_v = {rho_v}")]
    DegenerateDensity { rho_l: f64, rho_v: f64 },
    #[error("invalid input: {0}")]
    Invalid(Violation),
    #[error("correlation produced a non-physical gradient {0} Pa/m")]
    NonPhysical(f64),
}

/// Frictional pressure-gradient magnitude, Pa/m. Always finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PressureGradient(f64);

impl PressureGradient {
    pub fn new(dpdz: f64) -> Result<Self, CorrelationError> {
        if dpdz.is_finite() && dpdz >= 0.0 {
            Ok(Self(dpdz))
        } else {
            Err(CorrelationError::NonPhysical(dpdz))
        }
    }

    pub fn dpdz(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowRegime {
    Laminar,
    Turbulent,
}

/// Intermediate quantities of one correlation evaluation. Fields a model does
/// not define stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationBreakdown {
    pub re_2ph: Option<f64>,
    pub re_l: Option<f64>,
    pub re_v: Option<f64>,
    pub f_2ph: Option<f64>,
    pub f_l: Option<f64>,
    pub f_v: Option<f64>,
    pub mu_2ph: Option<f64>,
    pub x_mart: Option<f64>,
    pub c_chisholm: Option<f64>,
    pub laplace: Option<f64>,
    pub phi_l_sq: Option<f64>,
    pub regime: Option<FlowRegime>,
}

impl CorrelationBreakdown {
    /// `(name, value)` pairs in a fixed order, for tabular output.
    pub fn fields(&self) -> [(&'static str, Option<f64>); 11] {
        [
            ("re_2ph", self.re_2ph),
            ("re_l", self.re_l),
            ("re_v", self.re_v),
            ("f_2ph", self.f_2ph),
            ("f_l", self.f_l),
            ("f_v", self.f_v),
            ("mu_2ph", self.mu_2ph),
            ("x_mart", self.x_mart),
            ("c_chisholm", self.c_chisholm),
            ("laplace", self.laplace),
            ("phi_l_sq", self.phi_l_sq),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    SunMishima,
    AwadMuzychka,
    Cicchitti,
}

impl CorrelationKind {
    pub const ALL: [CorrelationKind; 3] = [Self::SunMishima, Self::AwadMuzychka, Self::Cicchitti];

    pub fn name(self) -> &'static str {
        match self {
            Self::SunMishima => "sun_mishima",
            Self::AwadMuzychka => "awad_muzychka",
            Self::Cicchitti => "cicchitti",
        }
    }
}

impl std::str::FromStr for CorrelationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sun_mishima" => Ok(Self::SunMishima),
            "awad_muzychka" | "awad" => Ok(Self::AwadMuzychka),
            "cicchitti" => Ok(Self::Cicchitti),
            other => Err(format!("unknown correlation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOptions {
    #[serde(default)]
    pub literal_mode: bool,
    /// Both phase Reynolds numbers must be below this for the laminar C branch.
    #[serde(default = "default_threshold")]
    pub laminar_threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_LAMINAR_THRESHOLD
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self { literal_mode: false, laminar_threshold: DEFAULT_LAMINAR_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationChoice {
    pub kind: CorrelationKind,
    #[serde(flatten)]
    pub options: CorrelationOptions,
}

impl CorrelationChoice {
    pub fn new(kind: CorrelationKind) -> Self {
        Self { kind, options: CorrelationOptions::default() }
    }

    pub fn literal(kind: CorrelationKind) -> Self {
        Self { kind, options: CorrelationOptions { literal_mode: true, ..Default::default() } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscosityModel {
    Awad,
    Cicchitti,
}

/// Churchill Fanning friction factor, valid across laminar, transitional and
/// turbulent flow.
pub fn churchill_friction(re: f64, rel_rough: f64) -> Result<f64, CorrelationError> {
    churchill(re, rel_rough, false)
}

/// As-printed variant: `a = [2.457 / ((7/Re)^0.9 + 0.27 ξ)]^16` with the
/// absolute roughness `ξ` in meters and no logarithm.
pub fn churchill_friction_literal(re: f64, roughness: f64) -> Result<f64, CorrelationError> {
    churchill(re, roughness, true)
}

fn churchill(re: f64, rough: f64, literal: bool) -> Result<f64, CorrelationError> {
    if !(re > 0.0) || !re.is_finite() {
        return Err(CorrelationError::NonPositiveReynolds(re));
    }
    let inner = (7.0 / re).powf(0.9) + 0.27 * rough;
    let a = if literal { 2.457 / inner } else { 2.457 * (1.0 / inner).ln() }.powi(16);
    let b = (37530.0 / re).powi(16);
    Ok(2.0 * ((8.0 / re).powi(12) + (a + b).powf(-1.5)).powf(1.0 / 12.0))
}

fn friction(re: f64, geom: &ChannelGeometry, literal: bool) -> Result<f64, CorrelationError> {
    if literal {
        churchill_friction_literal(re, geom.roughness)
    } else {
        churchill_friction(re, geom.relative_roughness())
    }
}

pub fn mixture_viscosity(fluid: &FluidState, model: ViscosityModel) -> f64 {
    let FluidState { mu_l, mu_v, x, .. } = *fluid;
    match model {
        ViscosityModel::Awad => {
            mu_l * (2.0 * mu_l + mu_v - 2.0 * (mu_l - mu_v) * x) / (2.0 * mu_l + mu_v + (mu_l - mu_v) * x)
        }
        ViscosityModel::Cicchitti => (1.0 - x) * mu_l + x * mu_v,
    }
}

/// Homogeneous (quality-weighted reciprocal) mixture density.
pub fn homogeneous_density(fluid: &FluidState) -> f64 {
    1.0 / (fluid.x / fluid.rho_v + (1.0 - fluid.x) / fluid.rho_l)
}

fn validate(fluid: &FluidState, geom: &ChannelGeometry, flow: &FlowCondition) -> Result<(), CorrelationError> {
    fluid.validate().map_err(CorrelationError::Invalid)?;
    geom.validate().map_err(CorrelationError::Invalid)?;
    flow.validate().map_err(CorrelationError::Invalid)
}

pub fn homogeneous_dpdz(
    fluid: &FluidState,
    geom: &ChannelGeometry,
    flow: &FlowCondition,
    visc: ViscosityModel,
) -> Result<(PressureGradient, CorrelationBreakdown), CorrelationError> {
    homogeneous_dpdz_with(fluid, geom, flow, visc, &CorrelationOptions::default())
}

pub fn homogeneous_dpdz_with(
    fluid: &FluidState,
    geom: &ChannelGeometry,
    flow: &FlowCondition,
    visc: ViscosityModel,
    opts: &CorrelationOptions,
) -> Result<(PressureGradient, CorrelationBreakdown), CorrelationError> {
    validate(fluid, geom, flow)?;
    let mu = mixture_viscosity(fluid, visc);
    let re = flow.g_flux * geom.id / mu;
    let f = friction(re, geom, opts.literal_mode)?;
    let dpdz = 2.0 * f * flow.g_flux.powi(2) / (geom.id * homogeneous_density(fluid));
    let breakdown = CorrelationBreakdown { re_2ph: Some(re), f_2ph: Some(f), mu_2ph: Some(mu), ..Default::default() };
    Ok((PressureGradient::new(dpdz)?, breakdown))
}

/// `La = sqrt(σ / (g (ρ_l − ρ_v))) / D_h`.
pub fn laplace_number(d_h: f64, sigma: f64, rho_l: f64, rho_v: f64) -> Result<f64, CorrelationError> {
    if !(rho_l > rho_v) {
        return Err(CorrelationError::DegenerateDensity { rho_l, rho_v });
    }
    Ok((sigma / (GRAVITY * (rho_l - rho_v))).sqrt() / d_h)
}

/// Single-phase gradient of one phase flowing alone with mass flux `g_phase`.
fn phase_alone(g_phase: f64, mu: f64, rho: f64, geom: &ChannelGeometry, literal: bool) -> Result<(f64, f64, f64), CorrelationError> {
    let re = g_phase * geom.id / mu;
    let f = friction(re, geom, literal)?;
    let dpdz = if literal {
        f * g_phase / (2.0 * geom.id * rho)
    } else {
        2.0 * f * g_phase * g_phase / (geom.id * rho)
    };
    Ok((re, f, dpdz))
}

pub fn sun_mishima_dpdz(
    fluid: &FluidState,
    geom: &ChannelGeometry,
    flow: &FlowCondition,
) -> Result<(PressureGradient, CorrelationBreakdown), CorrelationError> {
    sun_mishima_dpdz_with(fluid, geom, flow, &CorrelationOptions::default())
}

pub fn sun_mishima_dpdz_with(
    fluid: &FluidState,
    geom: &ChannelGeometry,
    flow: &FlowCondition,
    opts: &CorrelationOptions,
) -> Result<(PressureGradient, CorrelationBreakdown), CorrelationError> {
    // checked before the generic validation so the degenerate case gets its own error
    let laplace = laplace_number(geom.d_h, fluid.sigma, fluid.rho_l, fluid.rho_v)?;
    validate(fluid, geom, flow)?;
    let lit = opts.literal_mode;
    let FluidState { rho_l, rho_v, mu_l, mu_v, x, .. } = *fluid;
    let g = flow.g_flux;
    let mut bd = CorrelationBreakdown { laplace: Some(laplace), ..Default::default() };

    if x < QUALITY_EPS {
        let (re_l, f_l, dl) = phase_alone(g * (1.0 - x), mu_l, rho_l, geom, lit)?;
        bd.re_l = Some(re_l);
        bd.f_l = Some(f_l);
        bd.phi_l_sq = Some(1.0);
        return Ok((PressureGradient::new(dl)?, bd));
    }
    if x > 1.0 - QUALITY_EPS {
        let (re_v, f_v, dv) = phase_alone(g * x, mu_v, rho_v, geom, lit)?;
        bd.re_v = Some(re_v);
        bd.f_v = Some(f_v);
        return Ok((PressureGradient::new(dv)?, bd));
    }

    let (re_l, f_l, dl) = phase_alone(g * (1.0 - x), mu_l, rho_l, geom, lit)?;
    let (re_v, f_v, dv) = phase_alone(g * x, mu_v, rho_v, geom, lit)?;
    let x_mart = if lit { dl / dv } else { (dl / dv).sqrt() };
    let laminar = re_l < opts.laminar_threshold && re_v < opts.laminar_threshold;
    let c = if laminar {
        26.0 * (1.0 + re_l / 1000.0) * (1.0 - (-0.153 / (0.27 * laplace + 0.8)).exp())
    } else {
        1.79 * (re_v / re_l).powf(0.4) * ((1.0 - x) / x).sqrt()
    };
    let c_term = c / x_mart.powf(1.19);
    let phi_l_sq = if lit { 1.0 - c_term } else { 1.0 + c_term } + 1.0 / (x_mart * x_mart);

    bd.re_l = Some(re_l);
    bd.re_v = Some(re_v);
    bd.f_l = Some(f_l);
    bd.f_v = Some(f_v);
    bd.x_mart = Some(x_mart);
    bd.c_chisholm = Some(c);
    bd.phi_l_sq = Some(phi_l_sq);
    bd.regime = Some(if laminar { FlowRegime::Laminar } else { FlowRegime::Turbulent });
    Ok((PressureGradient::new(dl * phi_l_sq)?, bd))
}

pub fn evaluate_correlation(
    choice: &CorrelationChoice,
    point: &ExperimentPoint,
) -> Result<(PressureGradient, CorrelationBreakdown), CorrelationError> {
    let (fluid, geom, flow) = (&point.fluid, &point.geometry, &point.flow);
    match choice.kind {
        CorrelationKind::SunMishima => sun_mishima_dpdz_with(fluid, geom, flow, &choice.options),
        CorrelationKind::AwadMuzychka => homogeneous_dpdz_with(fluid, geom, flow, ViscosityModel::Awad, &choice.options),
        CorrelationKind::Cicchitti => {
            homogeneous_dpdz_with(fluid, geom, flow, ViscosityModel::Cicchitti, &choice.options)
        }
    }
}

/// Per-point map of [`evaluate_correlation`].
pub fn evaluate_batch(
    choice: &CorrelationChoice,
    points: &[ExperimentPoint],
) -> Vec<Result<(PressureGradient, CorrelationBreakdown), CorrelationError>> {
    points.iter().map(|p| evaluate_correlation(choice, p)).collect()
}
