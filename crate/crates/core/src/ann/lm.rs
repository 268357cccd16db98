use super::{AnnError, Batch, Damping, NetworkParams, TrainConfig};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Damping never shrinks below this, so a long run of accepted steps cannot
/// underflow λ to zero.
const LAMBDA_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIter,
    GradientTolerance,
    /// λ exceeded `lambda_max`: no further descent step could be found. The
    /// best parameters seen are returned.
    DampingLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: NetworkParams,
    /// Scaled-output mse at the start and after every accepted step.
    pub mse_history: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
}

impl LmOutcome {
    pub fn final_mse(&self) -> f64 {
        *self.mse_history.last().expect("history holds the initial mse")
    }

    pub fn hit_damping_limit(&self) -> bool {
        self.stop == StopReason::DampingLimit
    }
}

/// Training problem with inputs and targets pre-mapped to the unit range.
struct ScaledProblem {
    u: Vec<Vec<f64>>,
    t: Vec<f64>,
}

impl ScaledProblem {
    fn new(params: &NetworkParams, train: &Batch) -> Self {
        let u = train
            .inputs
            .iter()
            .map(|x| {
                let mut row = vec![0.0; params.n_in];
                params.scale_inputs(x, &mut row);
                row
            })
            .collect();
        let t = train.targets.iter().map(|&y| params.out_scale.to_unit(y)).collect();
        Self { u, t }
    }

    fn mse(&self, params: &NetworkParams, hidden: &mut [f64]) -> f64 {
        let sum: f64 = self.u.iter().zip(&self.t).map(|(u, t)| (t - params.forward_unit(u, hidden)).powi(2)).sum();
        sum / self.t.len() as f64
    }

    /// Fills `jac` (m × p) and `res` (targets − outputs), returns the mse.
    fn linearise(&self, params: &NetworkParams, jac: &mut DMatrix<f64>, res: &mut DVector<f64>) -> f64 {
        let mut h = vec![0.0; params.n_hidden];
        let mut row = vec![0.0; params.n_params()];
        let mut sum = 0.0;
        for (i, (u, t)) in self.u.iter().zip(&self.t).enumerate() {
            let z = params.forward_unit(u, &mut h);
            params.gradient_unit(u, &h, &mut row);
            for (j, v) in row.iter().enumerate() {
                jac[(i, j)] = *v;
            }
            res[i] = t - z;
            sum += res[i] * res[i];
        }
        sum / self.t.len() as f64
    }
}

/// Levenberg–Marquardt on the scaled-output mean square error.
///
/// Each iteration solves `(JᵀJ + λD) δ = Jᵀr`. A step is accepted only when it
/// lowers the mse (then λ shrinks), otherwise λ grows and the linearisation is
/// reused. Stops after `max_iter` iterations, when `‖Jᵀr‖∞ < grad_tol`, or once
/// λ exceeds `lambda_max`.
pub fn lm_fit(initial: &NetworkParams, train: &Batch, cfg: &TrainConfig) -> Result<LmOutcome, AnnError> {
    initial.validate()?;
    cfg.validate()?;
    if train.is_empty() {
        return Err(AnnError::Empty);
    }
    if train.n_in() != initial.n_in {
        return Err(AnnError::InputWidth { index: 0, expected: initial.n_in, found: train.n_in() });
    }
    if train.targets.iter().any(|t| !t.is_finite()) {
        return Err(AnnError::NonFinite("targets"));
    }

    let problem = ScaledProblem::new(initial, train);
    let (m, p) = (train.len(), initial.n_params());
    let mut params = initial.clone();
    let mut trial = initial.clone();
    let mut hidden = vec![0.0; params.n_hidden];
    let mut jac = DMatrix::zeros(m, p);
    let mut res = DVector::zeros(m);

    let mut mse = problem.linearise(&params, &mut jac, &mut res);
    let mut jtj = jac.tr_mul(&jac);
    let mut jtr = jac.tr_mul(&res);
    let mut history = vec![mse];
    let mut lambda = cfg.lambda_init;
    let mut iterations = 0;
    let mut stop = StopReason::MaxIter;

    while iterations < cfg.max_iter {
        iterations += 1;
        if jtr.amax() < cfg.grad_tol {
            stop = StopReason::GradientTolerance;
            break;
        }
        let mut a = jtj.clone();
        for i in 0..p {
            a[(i, i)] += match cfg.damping {
                Damping::Levenberg => lambda,
                Damping::Marquardt => lambda * jtj[(i, i)].max(f64::MIN_POSITIVE),
            };
        }
        let accepted = match a.cholesky() {
            Some(chol) => {
                let delta = chol.solve(&jtr);
                let next: Vec<f64> = params.flat().iter().zip(delta.iter()).map(|(w, d)| w + d).collect();
                trial.set_flat(&next);
                let trial_mse = problem.mse(&trial, &mut hidden);
                if trial_mse < mse {
                    std::mem::swap(&mut params, &mut trial);
                    Some(trial_mse)
                } else {
                    None
                }
            }
            None => None,
        };
        match accepted {
            Some(_) => {
                mse = problem.linearise(&params, &mut jac, &mut res);
                history.push(mse);
                jtj = jac.tr_mul(&jac);
                jtr = jac.tr_mul(&res);
                lambda = (lambda * cfg.lambda_down).max(LAMBDA_FLOOR);
            }
            None => {
                lambda *= cfg.lambda_up;
                if lambda > cfg.lambda_max {
                    stop = StopReason::DampingLimit;
                    break;
                }
            }
        }
    }
    Ok(LmOutcome { params, mse_history: history, iterations, stop })
}
