//! 2-H-1 feedforward network (tanh hidden layer, linear output) evaluated
//! directly from a flat parameter vector.
//!
//! Parameter layout for `H` hidden neurons:
//!
//! ```text
//! [ w(x1→h0), w(x2→h0), w(x1→h1), w(x2→h1), …   (2H)
//!   b(h0) … b(h{H-1})                            (H)
//!   v(h0→y) … v(h{H-1}→y)                        (H)
//!   b(y) ]                                       (1)
//! ```

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};
use crate::model::ParamModel;

pub const INPUT_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnConfig {
    pub hidden_neurons: usize,
}

impl AnnConfig {
    pub fn new(hidden_neurons: usize) -> Result<Self> {
        if hidden_neurons == 0 {
            return Err(Error::InvalidArgument("hidden_neurons must be >= 1".into()));
        }
        Ok(AnnConfig { hidden_neurons })
    }

    pub fn param_count(&self) -> usize {
        4 * self.hidden_neurons + 1
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        Ok(())
    }

    /// Evaluates the network on one normalized feature pair.
    pub fn forward(&self, params: &[f64], x: [f64; 2]) -> Result<f64> {
        self.check(params)?;
        Ok(self.eval(params, x))
    }

    #[inline]
    fn eval(&self, params: &[f64], x: [f64; 2]) -> f64 {
        let h = self.hidden_neurons;
        let (w_in, rest) = params.split_at(INPUT_DIM * h);
        let (b_hidden, rest) = rest.split_at(h);
        let (w_out, b_out) = rest.split_at(h);
        let mut y = b_out[0];
        for j in 0..h {
            let z = b_hidden[j] + w_in[2 * j] * x[0] + w_in[2 * j + 1] * x[1];
            y += w_out[j] * z.tanh();
        }
        y
    }

    /// Predictions in physical units for every sample, in order.
    pub fn predict_batch(&self, params: &[f64], data: &Dataset, norm: &Normalizer) -> Result<Vec<f64>> {
        self.check(params)?;
        Ok(data
            .samples()
            .iter()
            .map(|s| norm.air_velocity.invert(self.eval(params, norm.features(s))))
            .collect())
    }
}

impl ParamModel for AnnConfig {
    fn param_count(&self) -> usize {
        AnnConfig::param_count(self)
    }

    fn predict_normalized(&self, params: &[f64], inputs: &[[f64; 2]], out: &mut Vec<f64>) -> Result<()> {
        self.check(params)?;
        out.clear();
        out.extend(inputs.iter().map(|&x| self.eval(params, x)));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;
    use proptest::prelude::*;

    #[test]
    fn param_counts() {
        assert_eq!(AnnConfig::new(8).unwrap().param_count(), 33);
        assert_eq!(AnnConfig::new(12).unwrap().param_count(), 49);
        assert_eq!(AnnConfig::new(16).unwrap().param_count(), 65);
        assert!(AnnConfig::new(0).is_err());
    }

    #[test]
    fn zero_and_constant_networks() {
        let cfg = AnnConfig::new(8).unwrap();
        let mut p = vec![0.0; 33];
        assert_eq!(cfg.forward(&p, [0.3, 0.8]).unwrap(), 0.0);
        p[32] = 1.75;
        assert_eq!(cfg.forward(&p, [0.3, 0.8]).unwrap(), 1.75);
        assert_eq!(cfg.forward(&p, [-4.0, 9.0]).unwrap(), 1.75);
    }

    #[test]
    fn single_neuron_tanh() {
        let cfg = AnnConfig::new(1).unwrap();
        // w = (1, 0), b_h = 0, w_out = 1, b_out = 0
        let p = [1.0, 0.0, 0.0, 1.0, 0.0];
        let y = cfg.forward(&p, [0.5, 0.9]).unwrap();
        assert!((y - 0.462_117_157_260_009_74).abs() < 1e-15);
    }

    #[test]
    fn rejects_wrong_length() {
        let cfg = AnnConfig::new(8).unwrap();
        for len in [0, 32, 34, 65] {
            assert!(matches!(
                cfg.forward(&vec![0.0; len], [0.0, 0.0]),
                Err(Error::LengthMismatch { expected: 33, .. })
            ));
        }
    }

    fn tiny_dataset() -> Dataset {
        Dataset::new(
            vec![
                Sample::new(2.0, 20.0, 1.0).unwrap(),
                Sample::new(4.0, 60.0, 3.0).unwrap(),
                Sample::new(3.0, 100.0, 5.0).unwrap(),
            ],
            "t",
        )
        .unwrap()
    }

    #[test]
    fn constant_network_batch() {
        let d = tiny_dataset();
        let norm = Normalizer::fit(&d).unwrap();
        let cfg = AnnConfig::new(2).unwrap();
        let mut p = vec![0.0; cfg.param_count()];
        p[8] = 0.5;
        let out = cfg.predict_batch(&p, &d, &norm).unwrap();
        assert_eq!(out, vec![3.0; 3]);
    }

    fn permute_hidden(h: usize, p: &[f64], perm: &[usize]) -> Vec<f64> {
        let mut q = p.to_vec();
        for (new, &old) in perm.iter().enumerate() {
            q[2 * new] = p[2 * old];
            q[2 * new + 1] = p[2 * old + 1];
            q[2 * h + new] = p[2 * h + old];
            q[3 * h + new] = p[3 * h + old];
        }
        q
    }

    proptest! {
        #[test]
        fn batch_matches_per_sample(
            params in prop::collection::vec(-1.0f64..1.0, 17),
            rows in prop::collection::vec((0.1f64..50.0, 1.0f64..100.0, 0.0f64..30.0), 2..20),
        ) {
            let cfg = AnnConfig::new(4).unwrap();
            let mut samples: Vec<Sample> = rows.iter().map(|&(f, o, a)| Sample::new(f, o, a).unwrap()).collect();
            samples.push(Sample::new(60.0, 100.0, 40.0).unwrap());
            let d = Dataset::new(samples, "p").unwrap();
            let norm = Normalizer::fit(&d).unwrap();
            let batch = cfg.predict_batch(&params, &d, &norm).unwrap();
            prop_assert_eq!(batch.len(), d.len());
            for (s, b) in d.samples().iter().zip(&batch) {
                let x = [
                    (s.flow() - norm.flow.min) / (norm.flow.max - norm.flow.min),
                    (s.opening() - norm.opening.min) / (norm.opening.max - norm.opening.min),
                ];
                let mut y = params[16];
                for j in 0..4 {
                    y += params[12 + j] * (params[8 + j] + params[2 * j] * x[0] + params[2 * j + 1] * x[1]).tanh();
                }
                let expected = y * (norm.air_velocity.max - norm.air_velocity.min) + norm.air_velocity.min;
                prop_assert!((b - expected).abs() <= 1e-12 * expected.abs().max(1.0));
            }
        }

        #[test]
        fn hidden_permutation_invariance(
            params in prop::collection::vec(-1.0f64..1.0, 33),
            x0 in 0.0f64..1.0, x1 in 0.0f64..1.0,
            shift in 1usize..8,
        ) {
            let cfg = AnnConfig::new(8).unwrap();
            let perm: Vec<usize> = (0..8).map(|j| (j + shift) % 8).collect();
            let q = permute_hidden(8, &params, &perm);
            let a = cfg.forward(&params, [x0, x1]).unwrap();
            let b = cfg.forward(&q, [x0, x1]).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn lipschitz_in_params(
            params in prop::collection::vec(-1.0f64..1.0, 49),
            dir in prop::collection::vec(-1.0f64..1.0, 49),
            x0 in 0.0f64..1.0, x1 in 0.0f64..1.0,
        ) {
            // |∂y/∂θ| ≤ 1 + |x|₁·|v| + |v| bounds the per-coordinate slope for
            // weights in [-1, 1] and inputs in [0, 1]; use a loose constant.
            let cfg = AnnConfig::new(12).unwrap();
            let y0 = cfg.forward(&params, [x0, x1]).unwrap();
            for step in [1e-3, 1e-5, 1e-7] {
                let moved: Vec<f64> = params.iter().zip(&dir).map(|(p, d)| p + step * d).collect();
                let y1 = cfg.forward(&moved, [x0, x1]).unwrap();
                let norm: f64 = dir.iter().map(|d| d.abs()).sum::<f64>() * step;
                prop_assert!((y1 - y0).abs() <= 4.0 * norm + 1e-14);
            }
        }
    }
}
