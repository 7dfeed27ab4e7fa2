use super::{NnError, Param, Result, Scalar, Tensor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchNormConfig {
    pub momentum: f64,
    pub epsilon: f64,
}

impl Default for BatchNormConfig {
    fn default() -> Self {
        Self {
            momentum: 0.1,
            epsilon: 1e-5,
        }
    }
}

#[derive(Debug, Clone)]
struct Cache<T> {
    xhat: Tensor<T>,
    inv_std: Vec<T>,
    training: bool,
}

/// Per-feature batch normalization over the batch dimension.
///
/// Running statistics use the biased batch variance and are updated as
/// `running = (1 - momentum) * running + momentum * batch`.
#[derive(Debug, Clone)]
pub struct BatchNorm<T> {
    pub gamma: Param<T>,
    pub beta: Param<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    pub config: BatchNormConfig,
    cache: Option<Cache<T>>,
}

impl<T: Scalar> BatchNorm<T> {
    pub fn new(name: &str, features: usize, config: BatchNormConfig) -> Self {
        Self {
            gamma: Param::new(format!("{name}.gamma"), Tensor::filled(&[features], T::one())),
            beta: Param::new(format!("{name}.beta"), Tensor::zeros(&[features])),
            running_mean: vec![T::zero(); features],
            running_var: vec![T::one(); features],
            config,
            cache: None,
        }
    }

    pub fn features(&self) -> usize {
        self.running_mean.len()
    }

    fn check(&self, input: &Tensor<T>) -> Result<()> {
        if input.cols() != self.features() {
            return Err(NnError::Shape {
                op: "batchnorm_forward",
                expected: vec![input.rows(), self.features()],
                actual: input.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// Inference-mode forward with the running statistics. Pure.
    pub fn infer(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        self.check(input)?;
        let eps = T::of(self.config.epsilon);
        let (g, b) = (self.gamma.value.data(), self.beta.value.data());
        let scale: Vec<T> = (0..self.features())
            .map(|j| g[j] / (self.running_var[j] + eps).sqrt())
            .collect();
        let mut out = input.clone();
        let f = self.features();
        for row in out.data_mut().chunks_mut(f) {
            for j in 0..f {
                row[j] = (row[j] - self.running_mean[j]) * scale[j] + b[j];
            }
        }
        Ok(out)
    }

    /// Forward pass that caches for [`BatchNorm::backward`]. In training mode
    /// it normalizes with batch statistics and updates the running ones.
    pub fn forward(&mut self, input: &Tensor<T>, training: bool) -> Result<Tensor<T>> {
        self.check(input)?;
        let f = self.features();
        let n = input.rows();
        let eps = T::of(self.config.epsilon);
        let (mean, var) = if training {
            if n < 2 {
                return Err(NnError::BatchTooSmall(n));
            }
            let nn = T::of(n as f64);
            let mut mean = vec![T::zero(); f];
            for row in input.data().chunks(f) {
                for j in 0..f {
                    mean[j] = mean[j] + row[j];
                }
            }
            mean.iter_mut().for_each(|m| *m = *m / nn);
            let mut var = vec![T::zero(); f];
            for row in input.data().chunks(f) {
                for j in 0..f {
                    let d = row[j] - mean[j];
                    var[j] = var[j] + d * d;
                }
            }
            var.iter_mut().for_each(|v| *v = *v / nn);
            let m = T::of(self.config.momentum);
            for j in 0..f {
                self.running_mean[j] = (T::one() - m) * self.running_mean[j] + m * mean[j];
                self.running_var[j] = (T::one() - m) * self.running_var[j] + m * var[j];
            }
            (mean, var)
        } else {
            (self.running_mean.clone(), self.running_var.clone())
        };

        let inv_std: Vec<T> = var.iter().map(|v| T::one() / (*v + eps).sqrt()).collect();
        let mut xhat = input.clone();
        for row in xhat.data_mut().chunks_mut(f) {
            for j in 0..f {
                row[j] = (row[j] - mean[j]) * inv_std[j];
            }
        }
        let (g, b) = (self.gamma.value.data(), self.beta.value.data());
        let mut out = xhat.clone();
        for row in out.data_mut().chunks_mut(f) {
            for j in 0..f {
                row[j] = g[j] * row[j] + b[j];
            }
        }
        self.cache = Some(Cache {
            xhat,
            inv_std,
            training,
        });
        Ok(out)
    }

    pub fn backward(&mut self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let cache = self.cache.as_ref().ok_or(NnError::NoCache("batchnorm"))?;
        let f = self.features();
        let n = cache.xhat.rows();
        grad_out.expect_shape("batchnorm_backward", cache.xhat.shape())?;

        let mut sum_dy = vec![T::zero(); f];
        let mut sum_dy_xhat = vec![T::zero(); f];
        for (dy, xh) in grad_out.data().chunks(f).zip(cache.xhat.data().chunks(f)) {
            for j in 0..f {
                sum_dy[j] = sum_dy[j] + dy[j];
                sum_dy_xhat[j] = sum_dy_xhat[j] + dy[j] * xh[j];
            }
        }
        for j in 0..f {
            let gg = &mut self.gamma.grad.data_mut()[j];
            *gg = *gg + sum_dy_xhat[j];
            let gb = &mut self.beta.grad.data_mut()[j];
            *gb = *gb + sum_dy[j];
        }

        let g = self.gamma.value.data();
        let mut grad_in = grad_out.clone();
        if cache.training {
            let nn = T::of(n as f64);
            for (row, xh) in grad_in.data_mut().chunks_mut(f).zip(cache.xhat.data().chunks(f)) {
                for j in 0..f {
                    let k = g[j] * cache.inv_std[j] / nn;
                    row[j] = k * (nn * row[j] - sum_dy[j] - xh[j] * sum_dy_xhat[j]);
                }
            }
        } else {
            for row in grad_in.data_mut().chunks_mut(f) {
                for j in 0..f {
                    row[j] = row[j] * g[j] * cache.inv_std[j];
                }
            }
        }
        Ok(grad_in)
    }

    pub fn params_mut(&mut self) -> [&mut Param<T>; 2] {
        [&mut self.gamma, &mut self.beta]
    }

    pub fn params(&self) -> [&Param<T>; 2] {
        [&self.gamma, &self.beta]
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_column_normalizes_to_zero() {
        let mut bn = BatchNorm::<f64>::new("bn", 2, BatchNormConfig::default());
        let x = Tensor::from_vec(&[3, 2], vec![4.0, 1.0, 4.0, 2.0, 4.0, 3.0]).unwrap();
        let y = bn.forward(&x, true).unwrap();
        for r in 0..3 {
            assert_eq!(y.row(r)[0], 0.0);
        }
    }

    #[test]
    fn beta_shifts_the_mean() {
        let mut bn = BatchNorm::<f64>::new("bn", 3, BatchNormConfig::default());
        bn.beta.value.fill(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..15).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y = bn.forward(&Tensor::from_vec(&[5, 3], x).unwrap(), true).unwrap();
        for j in 0..3 {
            let mean: f64 = (0..5).map(|r| y.row(r)[j]).sum::<f64>() / 5.0;
            assert!((mean - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn training_output_has_unit_statistics() {
        let mut bn = BatchNorm::<f64>::new("bn", 4, BatchNormConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..32).map(|_| rng.random_range(-100.0..100.0)).collect();
        let x = Tensor::from_vec(&[8, 4], x).unwrap();
        let y = bn.forward(&x, true).unwrap();
        for j in 0..4 {
            let col: Vec<f64> = (0..8).map(|r| y.row(r)[j]).collect();
            let mean = col.iter().sum::<f64>() / 8.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 8.0;
            // Recompute the expected variance from the raw column: eps shrinks it slightly.
            let raw: Vec<f64> = (0..8).map(|r| x.row(r)[j]).collect();
            let rm = raw.iter().sum::<f64>() / 8.0;
            let rv = raw.iter().map(|v| (v - rm).powi(2)).sum::<f64>() / 8.0;
            assert!(mean.abs() < 1e-6);
            assert!((var - rv / (rv + 1e-5)).abs() < 1e-6);
            assert!((var - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn batch_of_one_is_rejected_in_training() {
        let mut bn = BatchNorm::<f64>::new("bn", 2, BatchNormConfig::default());
        let x = Tensor::zeros(&[1, 2]);
        assert_eq!(bn.forward(&x, true).unwrap_err(), NnError::BatchTooSmall(1));
        assert!(bn.forward(&x, false).is_ok());
    }

    #[test]
    fn running_stats_follow_momentum() {
        let mut bn = BatchNorm::<f64>::new("bn", 1, BatchNormConfig::default());
        let x = Tensor::from_vec(&[2, 1], vec![1.0, 3.0]).unwrap();
        bn.forward(&x, true).unwrap();
        assert!((bn.running_mean[0] - 0.2).abs() < 1e-12);
        assert!((bn.running_var[0] - (0.9 + 0.1)).abs() < 1e-12);
        let inferred = bn.infer(&x).unwrap();
        let cached = bn.forward(&x, false).unwrap();
        assert_eq!(inferred, cached);
    }
}
