use super::VaeError;
use crate::level::{OneHotGrid, HEIGHT, PADDED_WIDTH};
use crate::nn::BatchNormConfig;
use serde::{Deserialize, Serialize};

/// How `lr_decay_factor` is applied every `lr_decay_every` epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LrDecay {
    /// `lr = base * factor^k`
    Multiplicative,
    /// `lr = max(base - factor * k, 0)`
    Subtractive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeConfig {
    pub grid_height: usize,
    /// Padded grid width.
    pub grid_width: usize,
    pub hidden_dims: Vec<usize>,
    pub latent_dim: usize,
    pub kl_weight: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub lr_decay_factor: f64,
    pub lr_decay_every: usize,
    pub lr_decay: LrDecay,
    pub batch_norm: BatchNormConfig,
    pub seed: u64,
}

impl Default for VaeConfig {
    fn default() -> Self {
        Self::full()
    }
}

impl VaeConfig {
    /// Full-size schedule: latent 128, 10 000 epochs, lr 1e-3 decayed ×0.01
    /// every 2500 epochs.
    pub fn full() -> Self {
        Self {
            grid_height: HEIGHT,
            grid_width: PADDED_WIDTH,
            hidden_dims: vec![1024, 512, 256],
            latent_dim: 128,
            kl_weight: 0.01,
            batch_size: 32,
            epochs: 10_000,
            learning_rate: 1e-3,
            lr_decay_factor: 0.01,
            lr_decay_every: 2500,
            lr_decay: LrDecay::Multiplicative,
            batch_norm: BatchNormConfig::default(),
            seed: 0x10DE,
        }
    }

    /// Small network and short schedule that trains on a laptop in minutes.
    pub fn desk() -> Self {
        Self {
            hidden_dims: vec![128, 64],
            latent_dim: 32,
            epochs: 40,
            lr_decay_every: 30,
            batch_size: 64,
            ..Self::full()
        }
    }

    pub fn input_dim(&self) -> usize {
        self.grid_height * self.grid_width * OneHotGrid::CHANNELS
    }

    pub fn tile_count(&self) -> usize {
        self.grid_height * self.grid_width
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), VaeError> {
        let bad = |m: &str| Err(VaeError::Config(m.to_string()));
        if self.latent_dim == 0 {
            return bad("latent_dim must be positive");
        }
        if self.input_dim() == 0 {
            return bad("grid must be non-empty");
        }
        if self.hidden_dims.is_empty() || self.hidden_dims.contains(&0) {
            return bad("hidden_dims must be a non-empty list of positive widths");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size < 2 {
            return bad("batch_size must be at least 2 (batch norm)");
        }
        if self.lr_decay_every == 0 {
            return bad("lr_decay_every must be positive");
        }
        if !(self.kl_weight >= 0.0) {
            return bad("kl_weight must be non-negative");
        }
        if !(self.batch_norm.epsilon > 0.0) {
            return bad("batch norm epsilon must be positive");
        }
        Ok(())
    }

    /// Learning rate used during 1-based `epoch`.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let k = epoch.saturating_sub(1) / self.lr_decay_every;
        match self.lr_decay {
            LrDecay::Multiplicative => self.learning_rate * self.lr_decay_factor.powi(k as i32),
            LrDecay::Subtractive => (self.learning_rate - self.lr_decay_factor * k as f64).max(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_dims() {
        let c = VaeConfig::full();
        assert_eq!(c.input_dim(), 6468);
        assert_eq!(c.latent_dim, 128);
        c.validate().unwrap();
        VaeConfig::desk().validate().unwrap();
    }

    #[test]
    fn step_schedule() {
        let c = VaeConfig::full();
        assert_eq!(c.lr_at(1), 1e-3);
        assert_eq!(c.lr_at(2500), 1e-3);
        assert!((c.lr_at(2501) - 1e-5).abs() < 1e-18);
        assert!((c.lr_at(5001) - 1e-7).abs() < 1e-20);
        assert!((c.lr_at(10_000) - 1e-9).abs() < 1e-22);
    }

    #[test]
    fn subtractive_reading_clamps_at_zero() {
        let c = VaeConfig {
            lr_decay: LrDecay::Subtractive,
            lr_decay_factor: 0.0002,
            ..VaeConfig::full()
        };
        assert!((c.lr_at(2501) - 0.0008).abs() < 1e-15);
        let c = VaeConfig {
            lr_decay: LrDecay::Subtractive,
            ..VaeConfig::full()
        };
        assert_eq!(c.lr_at(2501), 0.0);
    }

    #[test]
    fn invalid_configs() {
        for c in [
            VaeConfig {
                latent_dim: 0,
                ..VaeConfig::desk()
            },
            VaeConfig {
                learning_rate: 0.0,
                ..VaeConfig::desk()
            },
            VaeConfig {
                epochs: 0,
                ..VaeConfig::desk()
            },
            VaeConfig {
                batch_size: 1,
                ..VaeConfig::desk()
            },
            VaeConfig {
                hidden_dims: vec![],
                ..VaeConfig::desk()
            },
        ] {
            assert!(c.validate().is_err());
        }
    }
}
