use super::{DataError, Dataset, ExperimentPoint, FlowCondition, FluidState};
use serde::{Deserialize, Serialize};

pub const DEFAULT_BINS: usize = 50;

/// Summary of the raw samples merged into one binned point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub experiment_id: String,
    pub bin: usize,
    pub count: usize,
    /// Population standard deviation of `dpdz_exp` within the bin, Pa/m.
    pub dpdz_std: f64,
}

/// Quality bin of `x` for `n_bins` equal-width regions over [0, 1].
/// The last region is closed on the right so `x = 1` falls into it.
pub(crate) fn quality_bin(x: f64, n_bins: usize) -> usize {
    ((x * n_bins as f64).floor() as usize).min(n_bins - 1)
}

#[derive(Default)]
struct Accumulator {
    members: Vec<usize>,
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// Average the points of each experiment that fall into the same quality region.
///
/// Output is grouped per experiment (first-appearance order), bins ascending.
pub fn bin_by_quality(ds: &Dataset, n_bins: usize) -> Result<Dataset, DataError> {
    if n_bins == 0 {
        return Err(DataError::ZeroBins);
    }
    let pts = ds.points();
    let mut out = Vec::new();
    let mut stats = Vec::new();

    for exp in ds.experiments() {
        let members = ds.indices_of(exp);
        let geometry = pts[members[0]].geometry;
        if members.iter().any(|&i| pts[i].geometry != geometry) {
            return Err(DataError::GeometryMismatch(exp.clone()));
        }
        let mut bins: Vec<Accumulator> = (0..n_bins).map(|_| Accumulator::default()).collect();
        for &i in &members {
            bins[quality_bin(pts[i].fluid.x, n_bins)].members.push(i);
        }
        for (bin, acc) in bins.iter().enumerate() {
            let n = acc.members.len();
            if n == 0 {
                continue;
            }
            let group: Vec<&ExperimentPoint> = acc.members.iter().map(|&i| &pts[i]).collect();
            let avg = |f: fn(&ExperimentPoint) -> f64| mean(group.iter().map(|p| f(p)), n);
            let temperature = if group.iter().all(|p| p.flow.temperature.is_some()) {
                Some(mean(group.iter().filter_map(|p| p.flow.temperature), n))
            } else {
                None
            };
            let dpdz = avg(|p| p.dpdz_exp);
            let var = mean(group.iter().map(|p| (p.dpdz_exp - dpdz).powi(2)), n);
            let composition = (0..ds.composition_names().len())
                .map(|k| mean(group.iter().map(|p| p.composition[k]), n))
                .collect();
            out.push(ExperimentPoint {
                experiment_id: exp.clone(),
                fluid: FluidState {
                    rho_l: avg(|p| p.fluid.rho_l),
                    rho_v: avg(|p| p.fluid.rho_v),
                    mu_l: avg(|p| p.fluid.mu_l),
                    mu_v: avg(|p| p.fluid.mu_v),
                    sigma: avg(|p| p.fluid.sigma),
                    x: avg(|p| p.fluid.x),
                },
                geometry,
                flow: FlowCondition { g_flux: avg(|p| p.flow.g_flux), pressure: avg(|p| p.flow.pressure), temperature },
                dpdz_exp: dpdz,
                composition,
            });
            stats.push(BinStats { experiment_id: exp.clone(), bin, count: n, dpdz_std: var.sqrt() });
        }
    }
    let mut binned = Dataset::new(out, ds.composition_names().to_vec())?;
    binned.bin_stats = Some(stats);
    Ok(binned)
}
