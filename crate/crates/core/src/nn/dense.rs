use super::scalar::{axpy, dot};
use super::{NnError, Param, Result, Scalar, Tensor};
use crate::par;
use rand::Rng;

/// Fully-connected layer, `y = W x + b` with `W` stored `out × in`.
#[derive(Debug, Clone)]
pub struct Dense<T> {
    pub weight: Param<T>,
    pub bias: Param<T>,
    cache: Option<Tensor<T>>,
}

impl<T: Scalar> Dense<T> {
    pub fn from_parts(name: &str, weight: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        if weight.shape().len() != 2 || bias.shape() != [weight.shape()[0]] {
            return Err(NnError::Shape {
                op: "dense",
                expected: vec![weight.shape()[0]],
                actual: bias.shape().to_vec(),
            });
        }
        Ok(Self {
            weight: Param::new(format!("{name}.weight"), weight),
            bias: Param::new(format!("{name}.bias"), bias),
            cache: None,
        })
    }

    pub fn zeros(name: &str, inputs: usize, outputs: usize) -> Self {
        Self::from_parts(name, Tensor::zeros(&[outputs, inputs]), Tensor::zeros(&[outputs])).expect("consistent shapes")
    }

    /// He-style uniform init: `U(-sqrt(6/fan_in), sqrt(6/fan_in))`, zero bias.
    pub fn he_uniform<R: Rng>(name: &str, inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = (6.0 / inputs as f64).sqrt();
        let w = (0..inputs * outputs)
            .map(|_| T::of(rng.random_range(-bound..bound)))
            .collect();
        Self::from_parts(
            name,
            Tensor::from_vec(&[outputs, inputs], w).expect("length matches"),
            Tensor::zeros(&[outputs]),
        )
        .expect("consistent shapes")
    }

    pub fn inputs(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.value.shape()[0]
    }

    /// Pure forward pass.
    pub fn infer(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        if input.cols() != self.inputs() {
            return Err(NnError::Shape {
                op: "dense_forward",
                expected: vec![input.rows(), self.inputs()],
                actual: input.shape().to_vec(),
            });
        }
        let rows = input.rows();
        let outs = self.outputs();
        let w = self.weight.value.data();
        let b = self.bias.value.data();
        let inputs = self.inputs();
        let mut out = Tensor::zeros(&[rows, outs]);
        par::for_each_row(out.data_mut(), outs, |r, row| {
            let x = input.row(r);
            for (o, y) in row.iter_mut().enumerate() {
                *y = b[o] + dot(&w[o * inputs..(o + 1) * inputs], x);
            }
        });
        Ok(out)
    }

    /// Forward pass that keeps the input for [`Dense::backward`].
    pub fn forward(&mut self, input: &Tensor<T>) -> Result<Tensor<T>> {
        let out = self.infer(input)?;
        self.cache = Some(input.clone());
        Ok(out)
    }

    /// Accumulates weight and bias gradients and returns the input gradient.
    pub fn backward(&mut self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        self.backward_impl(grad_out, true)
            .map(|g| g.expect("input gradient requested"))
    }

    /// Accumulates weight and bias gradients only. For the first layer of a
    /// network, where the input gradient is never used.
    pub fn backward_params(&mut self, grad_out: &Tensor<T>) -> Result<()> {
        self.backward_impl(grad_out, false).map(|_| ())
    }

    fn backward_impl(&mut self, grad_out: &Tensor<T>, want_input: bool) -> Result<Option<Tensor<T>>> {
        let input = self.cache.as_ref().ok_or(NnError::NoCache("dense"))?;
        let (rows, inputs, outs) = (input.rows(), self.inputs(), self.outputs());
        grad_out.expect_shape("dense_backward", &[rows, outs])?;

        par::for_each_row(self.weight.grad.data_mut(), inputs, |o, gw| {
            for r in 0..rows {
                let g = grad_out.row(r)[o];
                if g != T::zero() {
                    axpy(g, input.row(r), gw);
                }
            }
        });
        for (o, gb) in self.bias.grad.data_mut().iter_mut().enumerate() {
            for r in 0..rows {
                *gb = *gb + grad_out.row(r)[o];
            }
        }

        if !want_input {
            return Ok(None);
        }
        let w = self.weight.value.data();
        let mut grad_in = Tensor::zeros(&[rows, inputs]);
        par::for_each_row(grad_in.data_mut(), inputs, |r, gx| {
            for (o, &g) in grad_out.row(r).iter().enumerate() {
                if g != T::zero() {
                    axpy(g, &w[o * inputs..(o + 1) * inputs], gx);
                }
            }
        });
        Ok(Some(grad_in))
    }

    pub fn params_mut(&mut self) -> [&mut Param<T>; 2] {
        [&mut self.weight, &mut self.bias]
    }

    pub fn params(&self) -> [&Param<T>; 2] {
        [&self.weight, &self.bias]
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }
}
