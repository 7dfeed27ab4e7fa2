use super::{Vae, VaeConfig, VaeError, VaeModel};
use crate::level::OneHotGrid;
use crate::nn::{Adam, AdamConfig, NnError, Tensor};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training data is empty")]
    EmptyData,
    #[error("need at least 2 training grids for batch norm, got {0}")]
    TooFewGrids(usize),
    #[error("grid {index} has {actual} values, model expects {expected}")]
    GridShape {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("loss became non-finite at epoch {epoch} (last finite loss: {last_finite:?})")]
    NonFinite { epoch: usize, last_finite: Option<f64> },
    #[error(transparent)]
    Model(#[from] VaeError),
}

/// Loss summary for one epoch, averaged over grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub reconstruction: f64,
    pub kl: f64,
    pub learning_rate: f64,
}

/// Trains a model for `config.epochs` epochs.
pub fn train(
    config: &VaeConfig,
    data: &[OneHotGrid],
    dataset: &str,
) -> Result<(VaeModel, Vec<EpochStats>), TrainError> {
    train_with(config, data, dataset, |_| ControlFlow::Continue(()))
}

/// Minibatch splits for one epoch. A trailing batch of one grid is folded
/// into the previous batch because batch norm needs two rows.
fn batches(order: &[usize], size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(size).collect();
    if out.len() > 1 && out.last().is_some_and(|b| b.len() == 1) {
        out.pop();
        let start = (out.len() - 1) * size;
        *out.last_mut().expect("at least one batch") = &order[start..];
    }
    out
}

/// Like [`train`], calling `on_epoch` after every epoch; returning
/// `ControlFlow::Break` stops early.
///
/// Per epoch the grids are shuffled, split into minibatches and each batch
/// takes one Adam step on `CCE + kl_weight · KL`. Shuffling, noise and
/// initialization all derive from `config.seed`, so identical inputs give
/// identical models.
pub fn train_with<F>(
    config: &VaeConfig,
    data: &[OneHotGrid],
    dataset: &str,
    mut on_epoch: F,
) -> Result<(VaeModel, Vec<EpochStats>), TrainError>
where
    F: FnMut(&EpochStats) -> ControlFlow<()>,
{
    config.validate()?;
    if data.is_empty() {
        return Err(TrainError::EmptyData);
    }
    if data.len() < 2 {
        return Err(TrainError::TooFewGrids(data.len()));
    }
    let dim = config.input_dim();
    if let Some((index, g)) = data.iter().enumerate().find(|(_, g)| g.len() != dim) {
        return Err(TrainError::GridShape {
            index,
            expected: dim,
            actual: g.len(),
        });
    }

    let mut model = Vae::<f32>::new(config.clone())?;
    let mut adam = Adam::new(AdamConfig {
        learning_rate: config.learning_rate,
        ..AdamConfig::default()
    });
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(1);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(config.seed);
    noise_rng.set_stream(2);

    let latent = config.latent_dim;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut last_finite = None;

    for epoch in 1..=config.epochs {
        let lr = config.lr_at(epoch);
        adam.set_learning_rate(lr);
        order.shuffle(&mut shuffle_rng);
        let (mut total, mut rec, mut kl) = (0.0, 0.0, 0.0);
        for batch in batches(&order, config.batch_size) {
            let rows: Vec<&[f32]> = batch.iter().map(|&i| data[i].data()).collect();
            let x = Tensor::from_rows(&rows).map_err(VaeError::from)?;
            let eps: Vec<f32> = (0..batch.len() * latent)
                .map(|_| noise_rng.sample(StandardNormal))
                .collect();
            let eps = Tensor::from_vec(&[batch.len(), latent], eps).map_err(VaeError::from)?;

            model.zero_grad();
            let parts = model.train_step(&x, &eps, true)?;
            if !parts.total.is_finite() {
                return Err(TrainError::NonFinite { epoch, last_finite });
            }
            match adam.step(&mut model.params_mut()) {
                Err(NnError::NonFiniteGradient(_)) => return Err(TrainError::NonFinite { epoch, last_finite }),
                other => other.map_err(VaeError::from)?,
            }
            let n = batch.len() as f64;
            total += parts.total * n;
            rec += parts.reconstruction * n;
            kl += parts.kl * n;
        }
        let n = data.len() as f64;
        let stats = EpochStats {
            epoch,
            loss: total / n,
            reconstruction: rec / n,
            kl: kl / n,
            learning_rate: lr,
        };
        last_finite = Some(stats.loss);
        history.push(stats);
        if on_epoch(&stats).is_break() {
            break;
        }
    }

    model.clear_cache();
    model.meta.dataset = dataset.to_string();
    model.meta.epochs = history.len();
    model.meta.final_loss = last_finite.unwrap_or(f64::NAN);
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::{encode_onehot, Level};
    use crate::synth;

    fn small() -> VaeConfig {
        VaeConfig {
            hidden_dims: vec![16],
            latent_dim: 4,
            batch_size: 4,
            epochs: 3,
            ..VaeConfig::desk()
        }
    }

    fn grids(n: usize) -> Vec<OneHotGrid> {
        synth::corpus(5, n)
            .iter()
            .map(|l| encode_onehot(l, 5).unwrap())
            .collect()
    }

    #[test]
    fn batch_split_folds_singletons() {
        let order: Vec<usize> = (0..9).collect();
        let b = batches(&order, 4);
        assert_eq!(b.iter().map(|b| b.len()).collect::<Vec<_>>(), vec![4, 5]);
        let b = batches(&order, 3);
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn same_seed_same_loss() {
        let data = grids(6);
        let (a, ha) = train(&small(), &data, "t").unwrap();
        let (b, hb) = train(&small(), &data, "t").unwrap();
        assert_eq!(ha, hb);
        assert_eq!(a.meta, b.meta);
        assert_eq!(a.meta.epochs, 3);
        let probe = encode_onehot(&Level::empty(), 5).unwrap();
        assert_eq!(a.encode(&probe).unwrap(), b.encode(&probe).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(train(&small(), &[], "t"), Err(TrainError::EmptyData)));
        assert!(matches!(
            train(&small(), &grids(1), "t"),
            Err(TrainError::TooFewGrids(1))
        ));
        let odd = OneHotGrid::from_vec(2, 2, vec![0.0; 28]).unwrap();
        let mut data = grids(2);
        data.push(odd);
        assert!(matches!(
            train(&small(), &data, "t"),
            Err(TrainError::GridShape { index: 2, .. })
        ));
    }

    #[test]
    fn exploding_rate_aborts_with_epoch() {
        let cfg = VaeConfig {
            learning_rate: 1e30,
            epochs: 50,
            ..small()
        };
        match train(&cfg, &grids(4), "t") {
            Err(TrainError::NonFinite { epoch, .. }) => assert!(epoch >= 1),
            other => panic!("expected NonFinite, got {:?}", other.map(|(_, h)| h.len())),
        }
    }

    #[test]
    fn early_stop_via_callback() {
        let cfg = VaeConfig { epochs: 10, ..small() };
        let (m, h) = train_with(&cfg, &grids(4), "t", |s| {
            if s.epoch == 2 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(m.meta.epochs, 2);
    }
}
