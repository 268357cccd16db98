use super::{DataError, Dataset};
use crate::rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.70, 0.15, 0.15];

/// Disjoint train / validation / test / holdout index sets over a dataset.
/// Each list is sorted ascending. Serializes directly as the split manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub holdout_ids: Vec<String>,
    pub fractions: [f64; 3],
    pub rng: String,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub holdout: Vec<usize>,
}

impl SplitAssignment {
    pub fn total(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len() + self.holdout.len()
    }
}

/// Sizes for `n` shuffled points: train and validation rounded down, the rest to test.
pub(crate) fn split_sizes(n: usize, fractions: [f64; 3]) -> (usize, usize, usize) {
    // the epsilon absorbs products such as 0.7 * 10 = 7.000000000000001 in both directions
    let floor = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
    let train = floor(fractions[0]).min(n);
    let validation = floor(fractions[1]).min(n - train);
    (train, validation, n - train - validation)
}

fn canonical_order(ds: &Dataset, a: usize, b: usize) -> Ordering {
    let (p, q) = (&ds.points()[a], &ds.points()[b]);
    let key = |p: &super::ExperimentPoint| {
        [p.fluid.x, p.flow.g_flux, p.flow.pressure, p.dpdz_exp, p.fluid.rho_l, p.fluid.rho_v, p.fluid.mu_l, p.fluid.mu_v]
    };
    p.experiment_id
        .cmp(&q.experiment_id)
        .then_with(|| {
            key(p)
                .iter()
                .zip(key(q).iter())
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then(a.cmp(&b))
}

/// Hold out whole experiments, then shuffle the remaining points with a seeded
/// generator and cut them by `fractions`.
///
/// Points are put into a canonical order (experiment label, then point content)
/// before shuffling, so the assignment does not depend on input row order.
pub fn make_split(
    ds: &Dataset,
    holdout_ids: &[String],
    fractions: [f64; 3],
    seed: u64,
) -> Result<SplitAssignment, DataError> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !(*f >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(DataError::BadFractions(fractions));
    }
    if let Some(bad) = holdout_ids.iter().find(|h| !ds.contains_experiment(h)) {
        return Err(DataError::UnknownHoldout(bad.clone()));
    }

    let (mut holdout, mut pool): (Vec<usize>, Vec<usize>) =
        (0..ds.len()).partition(|&i| holdout_ids.contains(&ds.points()[i].experiment_id));
    pool.sort_by(|&a, &b| canonical_order(ds, a, b));
    pool.shuffle(&mut rng::stream(seed, rng::domain::SPLIT, &[]));

    let (n_train, n_val, _) = split_sizes(pool.len(), fractions);
    let mut train = pool[..n_train].to_vec();
    let mut validation = pool[n_train..n_train + n_val].to_vec();
    let mut test = pool[n_train + n_val..].to_vec();
    for v in [&mut train, &mut validation, &mut test, &mut holdout] {
        v.sort_unstable();
    }
    Ok(SplitAssignment {
        seed,
        holdout_ids: holdout_ids.to_vec(),
        fractions,
        rng: rng::RNG_ALGORITHM.to_string(),
        train,
        validation,
        test,
        holdout,
    })
}
