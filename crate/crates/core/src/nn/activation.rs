use super::{NnError, Result, Scalar, Tensor};

pub fn relu<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let mut out = input.clone();
    out.data_mut().iter_mut().for_each(|x| *x = x.max(T::zero()));
    out
}

/// Gradient of ReLU given the forward *output* (or input; the sign is the same).
pub fn relu_backward<T: Scalar>(forward: &Tensor<T>, grad_out: &Tensor<T>) -> Tensor<T> {
    let mut g = grad_out.clone();
    for (gi, fi) in g.data_mut().iter_mut().zip(forward.data()) {
        if *fi <= T::zero() {
            *gi = T::zero();
        }
    }
    g
}

/// ReLU with a cached mask for backward.
#[derive(Debug, Clone, Default)]
pub struct Relu<T> {
    out: Option<Tensor<T>>,
}

impl<T: Scalar> Relu<T> {
    pub fn new() -> Self {
        Self { out: None }
    }

    pub fn forward(&mut self, input: &Tensor<T>) -> Tensor<T> {
        let out = relu(input);
        self.out = Some(out.clone());
        out
    }

    pub fn backward(&self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let out = self.out.as_ref().ok_or(NnError::NoCache("relu"))?;
        Ok(relu_backward(out, grad_out))
    }

    pub fn clear_cache(&mut self) {
        self.out = None;
    }
}

/// Softmax over each run of `group_size` consecutive entries, max-shifted.
pub fn softmax_groups<T: Scalar>(input: &Tensor<T>, group_size: usize) -> Result<Tensor<T>> {
    let dim = input.cols();
    if group_size == 0 || !dim.is_multiple_of(group_size) {
        return Err(NnError::Group { dim, group: group_size });
    }
    let mut out = input.clone();
    for group in out.data_mut().chunks_mut(group_size) {
        let max = group.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for x in group.iter_mut() {
            *x = (*x - max).exp();
            sum = sum + *x;
        }
        for x in group.iter_mut() {
            *x = *x / sum;
        }
    }
    Ok(out)
}

/// Vector-Jacobian product of [`softmax_groups`]: `p * (dy - <dy, p>)` per group.
pub fn softmax_groups_backward<T: Scalar>(
    probs: &Tensor<T>,
    grad_out: &Tensor<T>,
    group_size: usize,
) -> Result<Tensor<T>> {
    grad_out.expect_shape("softmax_backward", probs.shape())?;
    if group_size == 0 || !probs.cols().is_multiple_of(group_size) {
        return Err(NnError::Group {
            dim: probs.cols(),
            group: group_size,
        });
    }
    let mut g = grad_out.clone();
    for (gg, pg) in g.data_mut().chunks_mut(group_size).zip(probs.data().chunks(group_size)) {
        let inner: T = gg.iter().zip(pg).map(|(a, b)| *a * *b).sum();
        for (x, p) in gg.iter_mut().zip(pg) {
            *x = *p * (*x - inner);
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_logits_give_one_seventh() {
        let x = Tensor::<f64>::zeros(&[1, 7]);
        let p = softmax_groups(&x, 7).unwrap();
        assert!(p.data().iter().all(|v| (v - 1.0 / 7.0).abs() < 1e-15));
    }

    #[test]
    fn large_logit_does_not_overflow() {
        let mut v = vec![0.0f64; 7];
        v[0] = 1000.0;
        let p = softmax_groups(&Tensor::from_vec(&[1, 7], v).unwrap(), 7).unwrap();
        assert!(p.all_finite());
        assert!((p.data()[0] - 1.0).abs() < 1e-12);
        assert!(p.data()[1..].iter().all(|x| *x < 1e-300));
    }

    #[test]
    fn groups_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..3 * 70).map(|_| rng.random_range(-20.0..20.0)).collect();
        let p = softmax_groups(&Tensor::from_vec(&[3, 70], v).unwrap(), 7).unwrap();
        for g in p.data().chunks(7) {
            let s: f64 = g.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(g.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn non_divisible_width_is_an_error() {
        let x = Tensor::<f64>::zeros(&[1, 10]);
        assert_eq!(softmax_groups(&x, 7).unwrap_err(), NnError::Group { dim: 10, group: 7 });
    }

    #[test]
    fn relu_backward_masks_negative_side() {
        let x = Tensor::from_vec(&[1, 3], vec![-1.0f64, 0.0, 2.0]).unwrap();
        let mut r = Relu::new();
        let y = r.forward(&x);
        assert_eq!(y.data(), &[0.0, 0.0, 2.0]);
        let g = r.backward(&Tensor::filled(&[1, 3], 1.0)).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 1.0]);
    }
}
