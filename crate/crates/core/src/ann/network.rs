use super::AnnError;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Affine map between a physical `[min, max]` interval and `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

impl Scale {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// Min-max of `values`; a constant column is widened to `v ± max(|v|, 1) / 2`
    /// so the map stays invertible.
    pub fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo == hi {
            let pad = 0.5 * lo.abs().max(1.0);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { min: lo, max: hi }
    }

    pub fn to_unit(&self, v: f64) -> f64 {
        2.0 * (v - self.min) / (self.max - self.min) - 1.0
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        self.min + (u + 1.0) * (self.max - self.min) / 2.0
    }

    /// `d from_unit / du`.
    pub fn half_span(&self) -> f64 {
        (self.max - self.min) / 2.0
    }
}

/// Weights, biases and frozen scaling of a single-hidden-layer tanh network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub n_in: usize,
    pub n_hidden: usize,
    /// Row-major `n_hidden × n_in`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub in_scale: Vec<Scale>,
    pub out_scale: Scale,
}

impl NetworkParams {
    pub fn zeros(n_in: usize, n_hidden: usize, in_scale: Vec<Scale>, out_scale: Scale) -> Self {
        Self {
            n_in,
            n_hidden,
            w1: vec![0.0; n_hidden * n_in],
            b1: vec![0.0; n_hidden],
            w2: vec![0.0; n_hidden],
            b2: 0.0,
            in_scale,
            out_scale,
        }
    }

    /// Every trainable parameter drawn uniformly from [-1, 1], in flat order.
    pub fn random_uniform<R: Rng>(n_in: usize, n_hidden: usize, in_scale: Vec<Scale>, out_scale: Scale, rng: &mut R) -> Self {
        let mut p = Self::zeros(n_in, n_hidden, in_scale, out_scale);
        let flat: Vec<f64> = (0..p.n_params()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        p.set_flat(&flat);
        p
    }

    /// `n_hidden·n_in + n_hidden + n_hidden + 1`.
    pub fn n_params(&self) -> usize {
        self.n_hidden * (self.n_in + 2) + 1
    }

    /// Trainable parameters in the order w1 (row-major), b1, w2, b2.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        v.extend_from_slice(&self.w1);
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params(), "flat parameter length");
        let (nh, nw) = (self.n_hidden, self.n_hidden * self.n_in);
        self.w1.copy_from_slice(&flat[..nw]);
        self.b1.copy_from_slice(&flat[nw..nw + nh]);
        self.w2.copy_from_slice(&flat[nw + nh..nw + 2 * nh]);
        self.b2 = flat[nw + 2 * nh];
    }

    pub fn validate(&self) -> Result<(), AnnError> {
        let bad = |m: String| Err(AnnError::InvalidParams(m));
        if self.n_in == 0 || self.n_hidden == 0 {
            return bad("n_in and n_hidden must be >= 1".into());
        }
        if self.w1.len() != self.n_hidden * self.n_in
            || self.b1.len() != self.n_hidden
            || self.w2.len() != self.n_hidden
            || self.in_scale.len() != self.n_in
        {
            return bad("parameter array shapes do not match n_in / n_hidden".into());
        }
        if self.flat().iter().any(|v| !v.is_finite()) {
            return bad("non-finite weight".into());
        }
        for (i, s) in self.in_scale.iter().chain(std::iter::once(&self.out_scale)).enumerate() {
            if !(s.max > s.min) || !s.min.is_finite() || !s.max.is_finite() {
                return bad(format!("scale {i} needs finite max > min, got [{}, {}]", s.min, s.max));
            }
        }
        Ok(())
    }

    pub(crate) fn scale_inputs(&self, inputs: &[f64], out: &mut [f64]) {
        for ((o, &v), s) in out.iter_mut().zip(inputs).zip(&self.in_scale) {
            *o = s.to_unit(v);
        }
    }

    /// Network output in scaled space for already-scaled inputs; fills `hidden`
    /// with the tanh activations.
    pub(crate) fn forward_unit(&self, u: &[f64], hidden: &mut [f64]) -> f64 {
        let mut z = self.b2;
        for (k, h) in hidden.iter_mut().enumerate() {
            let row = &self.w1[k * self.n_in..(k + 1) * self.n_in];
            let a = row.iter().zip(u).map(|(w, x)| w * x).sum::<f64>() + self.b1[k];
            *h = a.tanh();
            z += self.w2[k] * *h;
        }
        z
    }

    /// Predicted value in physical units. Inputs outside the training range are
    /// extrapolated through the affine scaling, not clamped.
    pub fn forward(&self, inputs: &[f64]) -> f64 {
        assert_eq!(inputs.len(), self.n_in, "input width");
        let mut u = vec![0.0; self.n_in];
        let mut h = vec![0.0; self.n_hidden];
        self.scale_inputs(inputs, &mut u);
        self.out_scale.from_unit(self.forward_unit(&u, &mut h))
    }

    pub fn predict(&self, batch: &[Vec<f64>]) -> Vec<f64> {
        batch.iter().map(|x| self.forward(x)).collect()
    }

    /// Row of `∂z/∂θ` (scaled output) for scaled input `u`, given activations `h`.
    pub(crate) fn gradient_unit(&self, u: &[f64], h: &[f64], row: &mut [f64]) {
        let (nh, ni) = (self.n_hidden, self.n_in);
        let nw = nh * ni;
        for k in 0..nh {
            let d = self.w2[k] * (1.0 - h[k] * h[k]);
            for j in 0..ni {
                row[k * ni + j] = d * u[j];
            }
            row[nw + k] = d;
            row[nw + nh + k] = h[k];
        }
        row[nw + 2 * nh] = 1.0;
    }
}

/// Exact derivatives of [`NetworkParams::forward`] (physical units) with respect
/// to the flat parameter vector, one row per sample.
pub fn jacobian(params: &NetworkParams, batch: &[Vec<f64>]) -> DMatrix<f64> {
    let p = params.n_params();
    let mut jac = DMatrix::zeros(batch.len(), p);
    let mut u = vec![0.0; params.n_in];
    let mut h = vec![0.0; params.n_hidden];
    let mut row = vec![0.0; p];
    let c = params.out_scale.half_span();
    for (i, x) in batch.iter().enumerate() {
        params.scale_inputs(x, &mut u);
        params.forward_unit(&u, &mut h);
        params.gradient_unit(&u, &h, &mut row);
        for (j, v) in row.iter().enumerate() {
            jac[(i, j)] = c * v;
        }
    }
    jac
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn unit() -> Scale {
        Scale::new(-1.0, 1.0)
    }

    fn random_params(n_in: usize, n_hidden: usize, seed: u64) -> NetworkParams {
        let mut r = rng::stream(seed, 99, &[]);
        let in_scale = (0..n_in)
            .map(|_| {
                let lo: f64 = r.gen_range(-5.0..5.0);
                Scale::new(lo, lo + r.gen_range(0.5..10.0))
            })
            .collect();
        let lo: f64 = r.gen_range(0.0..100.0);
        NetworkParams::random_uniform(n_in, n_hidden, in_scale, Scale::new(lo, lo + 500.0), &mut r)
    }

    #[test]
    fn zero_weights_give_output_midpoint() {
        let p = NetworkParams::zeros(3, 6, vec![Scale::new(0.0, 1.0); 3], Scale::new(100.0, 300.0));
        for x in [[0.0, 0.0, 0.0], [5.0, -3.0, 1e6]] {
            assert_eq!(p.forward(&x), 200.0);
        }
    }

    #[test]
    fn single_neuron_collapses_to_tanh() {
        let mut p = NetworkParams::zeros(1, 1, vec![unit()], unit());
        p.set_flat(&[1.0, 0.0, 1.0, 0.0]);
        for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            assert!((p.forward(&[x]) - f64::tanh(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_independent_forward() {
        let p = random_params(3, 6, 11);
        let w1: Vec<Vec<f64>> = p.w1.chunks(3).map(<[f64]>::to_vec).collect();
        let ins: Vec<(f64, f64)> = p.in_scale.iter().map(|s| (s.min, s.max)).collect();
        let mut r = rng::stream(5, 5, &[]);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| r.gen_range(-10.0..10.0)).collect();
            let want = oracle::forward(&w1, &p.b1, &p.w2, p.b2, &ins, (p.out_scale.min, p.out_scale.max), &x);
            let got = p.forward(&x);
            assert!(((got - want) / want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn flat_round_trip_and_validation() {
        let mut p = random_params(2, 4, 3);
        let flat = p.flat();
        assert_eq!(flat.len(), p.n_params());
        assert_eq!(p.n_params(), 4 * 2 + 4 + 4 + 1);
        let q = p.clone();
        p.set_flat(&flat);
        assert_eq!(p, q);
        assert!(p.validate().is_ok());
        p.out_scale = Scale::new(1.0, 1.0);
        assert!(p.validate().is_err());
        let mut p = q.clone();
        p.w2[0] = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn scale_fit_handles_constant_columns() {
        let s = Scale::fit([2.0, 2.0].into_iter());
        assert_eq!((s.min, s.max), (1.0, 3.0));
        let s = Scale::fit([0.0, 4.0, 1.0].into_iter());
        assert_eq!((s.to_unit(0.0), s.to_unit(4.0), s.from_unit(0.0)), (-1.0, 1.0, 2.0));
    }

    fn finite_difference_check(p: &NetworkParams, x: &[f64]) -> f64 {
        let jac = jacobian(p, &[x.to_vec()]);
        let flat = p.flat();
        let step = 1e-6;
        let mut worst: f64 = 0.0;
        for j in 0..flat.len() {
            let eval = |d: f64| {
                let mut q = p.clone();
                let mut f = flat.clone();
                f[j] += d;
                q.set_flat(&f);
                q.forward(x)
            };
            let fd = (eval(step) - eval(-step)) / (2.0 * step);
            let an = jac[(0, j)];
            // relative to the column magnitude, floored by the output scale
            let denom = an.abs().max(fd.abs()).max(p.out_scale.half_span() * 1e-3);
            worst = worst.max((an - fd).abs() / denom);
        }
        worst
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for (n_hidden, seed) in [(1, 1), (6, 2), (15, 3)] {
            let p = random_params(3, n_hidden, seed);
            let x = [0.3, -1.0, 2.5];
            assert!(finite_difference_check(&p, &x) < 1e-6);
        }
    }

    #[test]
    fn jacobian_structure() {
        let mut p = random_params(3, 4, 7);
        p.w2.iter_mut().for_each(|w| *w = 0.0);
        let jac = jacobian(&p, &[vec![0.1, 0.2, 0.3]]);
        let nw1b1 = 4 * 3 + 4;
        assert!((0..nw1b1).all(|j| jac[(0, j)] == 0.0));

        let p = random_params(3, 4, 8);
        let x = vec![1.0, -2.0, 0.5];
        let jac = jacobian(&p, &[x.clone(), vec![0.0, 0.0, 0.0], x]);
        assert_eq!(jac.row(0), jac.row(2));
    }

    proptest! {
        #[test]
        fn forward_finite_far_outside_training_range(seed: u64, a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let p = random_params(2, 6, seed);
            let x: Vec<f64> = p.in_scale.iter().zip([a, b]).map(|(s, t)| s.from_unit(t)).collect();
            let y = p.forward(&x);
            prop_assert!(y.is_finite());
            let bound = p.w2.iter().map(|w| w.abs()).sum::<f64>() + p.b2.abs();
            prop_assert!(p.out_scale.to_unit(y).abs() <= bound + 1e-9);
        }
    }
}
