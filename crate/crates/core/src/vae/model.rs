use super::{VaeConfig, VaeError};
use crate::level::{decode_onehot, encode_onehot, Level, OneHotGrid, CENTER_PAD};
use crate::nn::{
    cce_loss, kl_divergence, softmax_cce_grad, softmax_groups, BatchNorm, Dense, GradCheckable, Param, Relu, Scalar,
    Tensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const CHANNELS: usize = OneHotGrid::CHANNELS;

/// Gaussian posterior over the latent space for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentDistribution {
    pub mu: Vec<f32>,
    pub log_var: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentVector {
    pub z: Vec<f32>,
}

impl LatentDistribution {
    /// The posterior mean as a latent vector.
    pub fn mean(&self) -> LatentVector {
        LatentVector { z: self.mu.clone() }
    }
}

/// `z = mu + exp(0.5 · log_var) · ε`, `ε ~ N(0, I)`.
pub fn reparameterize<R: Rng>(dist: &LatentDistribution, rng: &mut R) -> LatentVector {
    let z = dist
        .mu
        .iter()
        .zip(&dist.log_var)
        .map(|(m, lv)| {
            let eps: f64 = rng.sample(StandardNormal);
            (*m as f64 + (0.5 * *lv as f64).exp() * eps) as f32
        })
        .collect();
    LatentVector { z }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub dataset: String,
    pub epochs: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub reconstruction: f64,
    pub kl: f64,
}

#[derive(Debug, Clone)]
struct Block<T> {
    dense: Dense<T>,
    bn: BatchNorm<T>,
    relu: Relu<T>,
}

impl<T: Scalar> Block<T> {
    fn infer(&self, x: &Tensor<T>) -> crate::nn::Result<Tensor<T>> {
        let h = self.dense.infer(x)?;
        Ok(crate::nn::relu(&self.bn.infer(&h)?))
    }

    fn forward(&mut self, x: &Tensor<T>) -> crate::nn::Result<Tensor<T>> {
        let h = self.dense.forward(x)?;
        let h = self.bn.forward(&h, true)?;
        Ok(self.relu.forward(&h))
    }

    fn backward(&mut self, g: &Tensor<T>, want_input: bool) -> crate::nn::Result<Option<Tensor<T>>> {
        let g = self.relu.backward(g)?;
        let g = self.bn.backward(&g)?;
        if want_input {
            self.dense.backward(&g).map(Some)
        } else {
            self.dense.backward_params(&g).map(|_| None)
        }
    }

    fn clear_cache(&mut self) {
        self.dense.clear_cache();
        self.bn.clear_cache();
        self.relu.clear_cache();
    }
}

#[derive(Debug, Clone)]
struct Cache<T> {
    target: Tensor<T>,
    probs: Tensor<T>,
    mu: Tensor<T>,
    log_var: Tensor<T>,
    eps: Tensor<T>,
}

#[derive(Debug, Clone)]
pub struct Vae<T> {
    config: VaeConfig,
    encoder: Vec<Block<T>>,
    encoder_head: Dense<T>,
    decoder: Vec<Block<T>>,
    decoder_head: Dense<T>,
    pub meta: TrainingMeta,
    cache: Option<Cache<T>>,
}

impl<T: Scalar> Vae<T> {
    /// Fresh model with seeded He-uniform weights.
    pub fn new(config: VaeConfig) -> Result<Self, VaeError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bn = config.batch_norm;
        let mut encoder = Vec::new();
        let mut width = config.input_dim();
        for (i, &h) in config.hidden_dims.iter().enumerate() {
            encoder.push(Block {
                dense: Dense::he_uniform(&format!("encoder.{i}"), width, h, &mut rng),
                bn: BatchNorm::new(&format!("encoder.{i}.bn"), h, bn),
                relu: Relu::new(),
            });
            width = h;
        }
        let encoder_head = Dense::he_uniform("encoder.head", width, 2 * config.latent_dim, &mut rng);
        let mut decoder = Vec::new();
        let mut width = config.latent_dim;
        for (i, &h) in config.hidden_dims.iter().rev().enumerate() {
            decoder.push(Block {
                dense: Dense::he_uniform(&format!("decoder.{i}"), width, h, &mut rng),
                bn: BatchNorm::new(&format!("decoder.{i}.bn"), h, bn),
                relu: Relu::new(),
            });
            width = h;
        }
        let decoder_head = Dense::he_uniform("decoder.head", width, config.input_dim(), &mut rng);
        Ok(Self {
            config,
            encoder,
            encoder_head,
            decoder,
            decoder_head,
            meta: TrainingMeta::default(),
            cache: None,
        })
    }

    pub fn config(&self) -> &VaeConfig {
        &self.config
    }

    pub fn latent_dim(&self) -> usize {
        self.config.latent_dim
    }

    /// Zeroes the encoder head so every input maps to `mu = 0, log_var = 0`.
    pub fn zero_encoder_head(&mut self) {
        self.encoder_head.weight.value.fill(T::zero());
        self.encoder_head.bias.value.fill(T::zero());
    }

    /// Inference-mode encoder over a `[batch, input_dim]` matrix.
    pub fn encode_batch(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Tensor<T>), VaeError> {
        self.check_width("encoder input", self.config.input_dim(), x.cols())?;
        let mut h = x.clone();
        for b in &self.encoder {
            h = b.infer(&h)?;
        }
        let out = self.encoder_head.infer(&h)?;
        Ok(out.split_cols(self.config.latent_dim))
    }

    /// Inference-mode decoder; returns per-tile probabilities.
    pub fn decode_batch(&self, z: &Tensor<T>) -> Result<Tensor<T>, VaeError> {
        self.check_width("latent vector", self.config.latent_dim, z.cols())?;
        let mut h = z.clone();
        for b in &self.decoder {
            h = b.infer(&h)?;
        }
        let logits = self.decoder_head.infer(&h)?;
        Ok(softmax_groups(&logits, CHANNELS)?)
    }

    fn check_width(&self, what: &'static str, expected: usize, actual: usize) -> Result<(), VaeError> {
        if expected != actual {
            return Err(VaeError::Width { what, expected, actual });
        }
        Ok(())
    }

    /// Training-mode loss (batch statistics, given noise `eps`), optionally
    /// followed by backpropagation into every parameter gradient. Gradients
    /// accumulate; zero them first.
    pub fn train_step(&mut self, x: &Tensor<T>, eps: &Tensor<T>, backward: bool) -> Result<LossParts, VaeError> {
        let parts = self.forward_train(x, eps)?;
        if backward {
            self.backward()?;
        }
        Ok(parts)
    }

    fn forward_train(&mut self, x: &Tensor<T>, eps: &Tensor<T>) -> Result<LossParts, VaeError> {
        let latent = self.config.latent_dim;
        self.check_width("encoder input", self.config.input_dim(), x.cols())?;
        eps.expect_shape_vae(&[x.rows(), latent])?;
        let mut h = x.clone();
        for b in &mut self.encoder {
            h = b.forward(&h)?;
        }
        let (mu, log_var) = self.encoder_head.forward(&h)?.split_cols(latent);
        let mut z = mu.clone();
        for ((zi, lv), e) in z.data_mut().iter_mut().zip(log_var.data()).zip(eps.data()) {
            *zi = *zi + (T::of(0.5) * *lv).exp() * *e;
        }
        let mut h = z;
        for b in &mut self.decoder {
            h = b.forward(&h)?;
        }
        let logits = self.decoder_head.forward(&h)?;
        let probs = softmax_groups(&logits, CHANNELS)?;
        let reconstruction = cce_loss(&probs, x, CHANNELS)?;
        let kl = kl_divergence(&mu, &log_var)?;
        self.cache = Some(Cache {
            target: x.clone(),
            probs,
            mu,
            log_var,
            eps: eps.clone(),
        });
        Ok(LossParts {
            total: reconstruction + self.config.kl_weight * kl,
            reconstruction,
            kl,
        })
    }

    fn backward(&mut self) -> Result<(), VaeError> {
        let cache = self.cache.take().ok_or(crate::nn::NnError::NoCache("vae"))?;
        let rows = T::of(cache.mu.rows() as f64);
        let w = T::of(self.config.kl_weight);
        let half = T::of(0.5);

        let mut g = softmax_cce_grad(&cache.probs, &cache.target, CHANNELS)?;
        g = self.decoder_head.backward(&g)?;
        for b in self.decoder.iter_mut().rev() {
            g = b.backward(&g, true)?.expect("input gradient");
        }
        // g is now dL/dz.
        let mut d_mu = g.clone();
        let mut d_lv = g;
        for i in 0..d_mu.len() {
            let mu = cache.mu.data()[i];
            let lv = cache.log_var.data()[i];
            let e = cache.eps.data()[i];
            let std = (half * lv).exp();
            d_mu.data_mut()[i] = d_mu.data()[i] + w * mu / rows;
            d_lv.data_mut()[i] = d_lv.data()[i] * e * half * std + w * half * (lv.exp() - T::one()) / rows;
        }
        let head_grad = Tensor::concat_cols(&d_mu, &d_lv)?;
        let mut g = self.encoder_head.backward(&head_grad)?;
        for (i, b) in self.encoder.iter_mut().enumerate().rev() {
            if let Some(next) = b.backward(&g, i > 0)? {
                g = next;
            }
        }
        Ok(())
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
        for b in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            b.clear_cache();
        }
        self.encoder_head.clear_cache();
        self.decoder_head.clear_cache();
    }

    /// Trainable parameters in persistence order.
    pub fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut out: Vec<&mut Param<T>> = Vec::new();
        for b in &mut self.encoder {
            out.extend(b.dense.params_mut());
            out.extend(b.bn.params_mut());
        }
        out.extend(self.encoder_head.params_mut());
        for b in &mut self.decoder {
            out.extend(b.dense.params_mut());
            out.extend(b.bn.params_mut());
        }
        out.extend(self.decoder_head.params_mut());
        out
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    /// Every persisted tensor (parameters, then running statistics per
    /// batch norm) as `(name, shape, values)`.
    pub fn state(&self) -> Vec<(String, Vec<usize>, &[T])> {
        let mut out = Vec::new();
        for b in &self.encoder {
            Self::block_state(b, &mut out);
        }
        for p in self.encoder_head.params() {
            out.push((p.name.clone(), p.value.shape().to_vec(), p.value.data()));
        }
        for b in &self.decoder {
            Self::block_state(b, &mut out);
        }
        for p in self.decoder_head.params() {
            out.push((p.name.clone(), p.value.shape().to_vec(), p.value.data()));
        }
        out
    }

    fn block_state<'a>(b: &'a Block<T>, out: &mut Vec<(String, Vec<usize>, &'a [T])>) {
        for p in b.dense.params().into_iter().chain(b.bn.params()) {
            out.push((p.name.clone(), p.value.shape().to_vec(), p.value.data()));
        }
        let base = b.bn.gamma.name.trim_end_matches(".gamma").to_string();
        let f = b.bn.features();
        out.push((format!("{base}.running_mean"), vec![f], &b.bn.running_mean));
        out.push((format!("{base}.running_var"), vec![f], &b.bn.running_var));
    }

    /// Mutable view in the same order as [`Vae::state`].
    pub fn state_mut(&mut self) -> Vec<(String, Vec<usize>, &mut [T])> {
        fn block<'a, T: Scalar>(b: &'a mut Block<T>, out: &mut Vec<(String, Vec<usize>, &'a mut [T])>) {
            let f = b.bn.features();
            let base = b.bn.gamma.name.trim_end_matches(".gamma").to_string();
            for p in b.dense.params_mut() {
                out.push((p.name.clone(), p.value.shape().to_vec(), p.value.data_mut()));
            }
            let BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                ..
            } = &mut b.bn;
            for p in [gamma, beta] {
                out.push((p.name.clone(), p.value.shape().to_vec(), p.value.data_mut()));
            }
            out.push((format!("{base}.running_mean"), vec![f], running_mean.as_mut_slice()));
            out.push((format!("{base}.running_var"), vec![f], running_var.as_mut_slice()));
        }
        let mut out = Vec::new();
        for b in &mut self.encoder {
            block(b, &mut out);
        }
        for p in self.encoder_head.params_mut() {
            out.push((p.name.clone(), p.value.shape().to_vec(), p.value.data_mut()));
        }
        for b in &mut self.decoder {
            block(b, &mut out);
        }
        for p in self.decoder_head.params_mut() {
            out.push((p.name.clone(), p.value.shape().to_vec(), p.value.data_mut()));
        }
        out
    }
}

trait ExpectShape {
    fn expect_shape_vae(&self, shape: &[usize]) -> Result<(), VaeError>;
}

impl<T: Scalar> ExpectShape for Tensor<T> {
    fn expect_shape_vae(&self, shape: &[usize]) -> Result<(), VaeError> {
        if self.shape() != shape {
            return Err(VaeError::Width {
                what: "noise",
                expected: shape.iter().product(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

impl Vae<f32> {
    fn grid_tensor(&self, grid: &OneHotGrid) -> Result<Tensor<f32>, VaeError> {
        self.check_width("one-hot grid", self.config.input_dim(), grid.len())?;
        Ok(Tensor::from_vec(&[1, grid.len()], grid.data().to_vec())?)
    }

    /// Posterior for one grid (inference-mode batch norm).
    pub fn encode(&self, grid: &OneHotGrid) -> Result<LatentDistribution, VaeError> {
        let (mu, log_var) = self.encode_batch(&self.grid_tensor(grid)?)?;
        Ok(LatentDistribution {
            mu: mu.into_data(),
            log_var: log_var.into_data(),
        })
    }

    /// Encodes an editor level with centered padding.
    pub fn encode_level(&self, level: &Level) -> Result<LatentDistribution, VaeError> {
        self.encode(&encode_onehot(level, CENTER_PAD)?)
    }

    /// Per-tile probabilities for a latent vector.
    pub fn decode(&self, z: &LatentVector) -> Result<OneHotGrid, VaeError> {
        let zt = Tensor::from_vec(&[1, z.z.len()], z.z.clone())?;
        let probs = self.decode_batch(&zt)?;
        Ok(OneHotGrid::from_vec(
            self.config.grid_height,
            self.config.grid_width,
            probs.into_data(),
        )?)
    }

    /// Argmax level decoded from `z`, cropped to the editor columns.
    pub fn decode_level(&self, z: &LatentVector) -> Result<Level, VaeError> {
        Ok(decode_onehot(&self.decode(z)?))
    }

    /// `decode(mu(encode(level)))`, discretized.
    pub fn reconstruct(&self, level: &Level) -> Result<Level, VaeError> {
        let dist = self.encode_level(level)?;
        self.decode_level(&dist.mean())
    }

    /// Batched reconstruction of one-hot grids through the posterior means;
    /// returns decoded probability grids in input order.
    pub fn reconstruct_grids(&self, grids: &[OneHotGrid]) -> Result<Vec<OneHotGrid>, VaeError> {
        if grids.is_empty() {
            return Ok(Vec::new());
        }
        let rows: Vec<&[f32]> = grids.iter().map(|g| g.data()).collect();
        let x = Tensor::from_rows(&rows)?;
        self.check_width("one-hot grid", self.config.input_dim(), x.cols())?;
        let (mu, _) = self.encode_batch(&x)?;
        let probs = self.decode_batch(&mu)?;
        (0..probs.rows())
            .map(|r| {
                OneHotGrid::from_vec(self.config.grid_height, self.config.grid_width, probs.row(r).to_vec())
                    .map_err(VaeError::from)
            })
            .collect()
    }
}

/// A VAE with a fixed batch and fixed reparameterization noise, exposing its
/// full training loss for finite-difference checks.
pub struct LossProbe {
    pub vae: Vae<f64>,
    pub input: Tensor<f64>,
    pub eps: Tensor<f64>,
}

impl GradCheckable for LossProbe {
    fn params_mut(&mut self) -> Vec<&mut Param<f64>> {
        self.vae.params_mut()
    }

    fn loss(&mut self) -> f64 {
        let l = self
            .vae
            .train_step(&self.input, &self.eps, false)
            .expect("probe shapes are consistent")
            .total;
        self.vae.clear_cache();
        l
    }

    fn loss_and_grad(&mut self) -> f64 {
        self.vae.zero_grad();
        self.vae
            .train_step(&self.input, &self.eps, true)
            .expect("probe shapes are consistent")
            .total
    }
}
