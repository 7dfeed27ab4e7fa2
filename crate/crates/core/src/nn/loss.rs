use super::{NnError, Result, Scalar, Tensor};

/// Lower clamp applied to predicted probabilities before taking the log.
pub const LOG_CLAMP: f64 = 1e-12;

/// Categorical cross-entropy averaged over tiles, where a tile is a group of
/// `group_size` consecutive channels.
pub fn cce_loss<T: Scalar>(predicted: &Tensor<T>, target: &Tensor<T>, group_size: usize) -> Result<f64> {
    target.expect_shape("cce_loss", predicted.shape())?;
    if group_size == 0 || !predicted.len().is_multiple_of(group_size) {
        return Err(NnError::Group {
            dim: predicted.len(),
            group: group_size,
        });
    }
    let tiles = predicted.len() / group_size;
    let mut total = 0.0f64;
    for (p, t) in predicted.data().iter().zip(target.data()) {
        let t = t.as_f64();
        if t != 0.0 {
            total -= t * p.as_f64().max(LOG_CLAMP).ln();
        }
    }
    Ok(total / tiles as f64)
}

/// Gradient of `cce_loss(softmax_groups(logits), target)` with respect to the
/// logits, for targets whose groups each sum to one: `(p - t) / tiles`.
pub fn softmax_cce_grad<T: Scalar>(probs: &Tensor<T>, target: &Tensor<T>, group_size: usize) -> Result<Tensor<T>> {
    target.expect_shape("softmax_cce_grad", probs.shape())?;
    let tiles = T::of((probs.len() / group_size.max(1)) as f64);
    let mut g = probs.clone();
    for (gi, ti) in g.data_mut().iter_mut().zip(target.data()) {
        *gi = (*gi - *ti) / tiles;
    }
    Ok(g)
}

/// `KL(N(mu, exp(log_var)) || N(0, I))` summed over latent dims, averaged over rows.
pub fn kl_divergence<T: Scalar>(mu: &Tensor<T>, log_var: &Tensor<T>) -> Result<f64> {
    log_var.expect_shape("kl_divergence", mu.shape())?;
    let rows = mu.rows().max(1);
    let total: f64 = mu
        .data()
        .iter()
        .zip(log_var.data())
        .map(|(m, lv)| {
            let (m, lv) = (m.as_f64(), lv.as_f64());
            -0.5 * (1.0 + lv - m * m - lv.exp())
        })
        .sum();
    Ok(total / rows as f64)
}
