use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FcnModel, Tensor};

/// Tuned for the compact network trained from scratch; 1e-4 learns too
/// slowly to break repeated failed grasps within a few thousand steps.
pub const DEFAULT_LEARNING_RATE: f64 = 3e-4;
pub const DEFAULT_MOMENTUM: f64 = 0.9;
/// 2^-5
pub const DEFAULT_WEIGHT_DECAY: f64 = 0.03125;

/// SGD with momentum and additive L2 decay:
/// `v <- mu v + g + lambda theta`, `theta <- theta - eta v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    buffers: Vec<Tensor>,
}

impl OptimizerState {
    pub fn new(model: &FcnModel, learning_rate: f64, momentum: f64, weight_decay: f64) -> Result<Self> {
        let shapes: Vec<Vec<usize>> = model.params().iter().map(|p| p.shape().to_vec()).collect();
        Self::for_shapes(&shapes, learning_rate, momentum, weight_decay)
    }

    pub fn for_shapes(shapes: &[Vec<usize>], learning_rate: f64, momentum: f64, weight_decay: f64) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be > 0, got {learning_rate}")));
        }
        if !(0.0..1.0).contains(&momentum) || weight_decay < 0.0 {
            return Err(Error::Config("momentum must be in [0, 1) and weight decay >= 0".into()));
        }
        Ok(Self {
            learning_rate,
            momentum,
            weight_decay,
            buffers: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
        })
    }

    pub fn buffers(&self) -> &[Tensor] {
        &self.buffers
    }

    /// One update of `params` in place.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != self.buffers.len() || grads.len() != self.buffers.len() {
            return Err(Error::ShapeMismatch(format!(
                "optimizer holds {} buffers, got {} params and {} grads",
                self.buffers.len(),
                params.len(),
                grads.len()
            )));
        }
        for ((p, g), v) in params.iter().zip(grads).zip(&self.buffers) {
            if p.shape() != g.shape() || p.shape() != v.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "param {:?}, grad {:?}, buffer {:?}",
                    p.shape(),
                    g.shape(),
                    v.shape()
                )));
            }
        }
        let (eta, mu, lambda) = (self.learning_rate, self.momentum, self.weight_decay);
        for ((p, g), v) in params.iter_mut().zip(grads).zip(&mut self.buffers) {
            for ((theta, &gi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(v.data_mut()) {
                *vi = mu * *vi + gi + lambda * *theta;
                *theta -= eta * *vi;
            }
        }
        Ok(())
    }

    pub fn step_model(&mut self, model: &mut FcnModel, grads: &[Tensor]) -> Result<()> {
        self.step(&mut model.params_mut(), grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Tensor {
        Tensor::from_vec(&[1], vec![v]).unwrap()
    }

    #[test]
    fn zero_everything_is_a_no_op() {
        let mut opt = OptimizerState::for_shapes(&[vec![1]], 0.1, 0.0, 0.0).unwrap();
        let mut p = scalar(3.0);
        opt.step(&mut [&mut p], &[scalar(0.0)]).unwrap();
        assert_eq!(p.data()[0], 3.0);
    }

    #[test]
    fn plain_gradient_step() {
        let mut opt = OptimizerState::for_shapes(&[vec![1]], 0.1, 0.0, 0.0).unwrap();
        let mut p = scalar(1.0);
        opt.step(&mut [&mut p], &[scalar(1.0)]).unwrap();
        assert!((p.data()[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn momentum_unrolls() {
        let (eta, lambda) = (0.1, DEFAULT_WEIGHT_DECAY);
        let mut opt = OptimizerState::for_shapes(&[vec![1]], eta, 0.9, lambda).unwrap();
        let theta0 = 2.0;
        let mut p = scalar(theta0);
        let (g1, g2) = (0.3, -0.7);
        opt.step(&mut [&mut p], &[scalar(g1)]).unwrap();
        let theta1 = p.data()[0];
        opt.step(&mut [&mut p], &[scalar(g2)]).unwrap();
        let delta2 = p.data()[0] - theta1;
        let expect = -eta * (g2 + 0.9 * (g1 + lambda * theta0) + lambda * theta1);
        assert!((delta2 - expect).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_settings_and_shapes() {
        assert!(OptimizerState::for_shapes(&[vec![1]], 0.0, 0.9, 0.0).is_err());
        let mut opt = OptimizerState::for_shapes(&[vec![2]], 0.1, 0.9, 0.0).unwrap();
        let mut p = scalar(1.0);
        assert!(opt.step(&mut [&mut p], &[scalar(1.0)]).is_err());
    }
}
