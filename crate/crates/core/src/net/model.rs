use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ops::{self, NormCache, NormMode};
use super::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerSpec {
    /// Same-style padding of `kernel / 2`.
    Conv {
        out_channels: usize,
        kernel: usize,
        stride: usize,
    },
    Norm,
    Relu,
    Upsample {
        factor: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FcnConfig {
    pub in_channels: usize,
    pub layers: Vec<LayerSpec>,
}

impl FcnConfig {
    /// The default trunk: two strided conv blocks, a wide 3x3, a 1x1 head and x4 upsampling.
    pub fn compact(in_channels: usize) -> Self {
        use LayerSpec::*;
        Self {
            in_channels,
            layers: vec![
                Conv {
                    out_channels: 16,
                    kernel: 5,
                    stride: 2,
                },
                Norm,
                Relu,
                Conv {
                    out_channels: 32,
                    kernel: 3,
                    stride: 2,
                },
                Norm,
                Relu,
                Conv {
                    out_channels: 64,
                    kernel: 3,
                    stride: 1,
                },
                Relu,
                Conv {
                    out_channels: 1,
                    kernel: 1,
                    stride: 1,
                },
                Upsample { factor: 4 },
            ],
        }
    }

    /// A single 1x1 convolution.
    pub fn linear(in_channels: usize) -> Self {
        Self {
            in_channels,
            layers: vec![LayerSpec::Conv {
                out_channels: 1,
                kernel: 1,
                stride: 1,
            }],
        }
    }

    /// Total spatial down-sampling minus up-sampling must cancel.
    fn validate(&self) -> Result<()> {
        if self.in_channels == 0 {
            return Err(Error::Config("network needs at least one input channel".into()));
        }
        let mut channels = self.in_channels;
        let (mut down, mut up) = (1usize, 1usize);
        for l in &self.layers {
            match *l {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                    stride,
                } => {
                    if out_channels == 0 || kernel == 0 || kernel % 2 == 0 || stride == 0 {
                        return Err(Error::Config(format!("bad conv layer {l:?}")));
                    }
                    channels = out_channels;
                    down *= stride;
                }
                LayerSpec::Upsample { factor } => {
                    if !matches!(factor, 2 | 4 | 8) {
                        return Err(Error::Config(format!("upsample factor {factor} not in {{2, 4, 8}}")));
                    }
                    up *= factor;
                }
                LayerSpec::Norm | LayerSpec::Relu => {}
            }
        }
        if channels != 1 || down != up {
            return Err(Error::Config(format!(
                "network must end with one channel at input resolution (channels {channels}, down {down}, up {up})"
            )));
        }
        Ok(())
    }

    pub fn total_stride(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                LayerSpec::Conv { stride, .. } => *stride,
                _ => 1,
            })
            .product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    Conv {
        weight: Tensor,
        bias: Tensor,
        stride: usize,
        padding: usize,
    },
    Norm {
        scale: Tensor,
        shift: Tensor,
        running_mean: Tensor,
        running_var: Tensor,
    },
    Relu,
    Upsample {
        factor: usize,
    },
}

/// Values saved by a traced forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Input of every layer, in CHW layout.
    inputs: Vec<Tensor>,
    norms: Vec<Option<NormCache>>,
    output_shape: (usize, usize),
}

impl Trace {
    /// Sign pattern of every relu input, used to detect kinks.
    pub fn relu_pattern(&self, model: &FcnModel) -> Vec<bool> {
        model
            .layers
            .iter()
            .zip(&self.inputs)
            .filter(|(l, _)| matches!(l, Layer::Relu))
            .flat_map(|(_, x)| x.data().iter().map(|&v| v > 0.0))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcnModel {
    config: FcnConfig,
    layers: Vec<Layer>,
}

impl FcnModel {
    /// Deterministic Glorot-uniform initialisation from `seed`.
    pub fn new(config: FcnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut channels = config.in_channels;
        let mut layers = Vec::with_capacity(config.layers.len());
        for spec in &config.layers {
            layers.push(match *spec {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                    stride,
                } => {
                    let fan_in = channels * kernel * kernel;
                    let fan_out = out_channels * kernel * kernel;
                    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    let n = out_channels * fan_in;
                    let w = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
                    let layer = Layer::Conv {
                        weight: Tensor::from_vec(&[out_channels, channels, kernel, kernel], w)?,
                        bias: Tensor::zeros(&[out_channels]),
                        stride,
                        padding: kernel / 2,
                    };
                    channels = out_channels;
                    layer
                }
                LayerSpec::Norm => Layer::Norm {
                    scale: Tensor::full(&[channels], 1.0),
                    shift: Tensor::zeros(&[channels]),
                    running_mean: Tensor::zeros(&[channels]),
                    running_var: Tensor::full(&[channels], 1.0),
                },
                LayerSpec::Relu => Layer::Relu,
                LayerSpec::Upsample { factor } => Layer::Upsample { factor },
            });
        }
        Ok(Self { config, layers })
    }

    pub fn config(&self) -> &FcnConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn in_channels(&self) -> usize {
        self.config.in_channels
    }

    /// Trainable tensors in a fixed order: conv weight, conv bias, norm scale, norm shift.
    pub fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for l in &self.layers {
            match l {
                Layer::Conv { weight, bias, .. } => out.extend([weight, bias]),
                Layer::Norm { scale, shift, .. } => out.extend([scale, shift]),
                _ => {}
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            match l {
                Layer::Conv { weight, bias, .. } => out.extend([weight, bias]),
                Layer::Norm { scale, shift, .. } => out.extend([scale, shift]),
                _ => {}
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|t| t.len()).sum()
    }

    fn check_input(&self, input: &Tensor) -> Result<(usize, usize)> {
        let &[h, w, c] = input.shape() else {
            return Err(Error::ShapeMismatch(format!(
                "network input must be HxWxC, got {:?}",
                input.shape()
            )));
        };
        if c != self.config.in_channels {
            return Err(Error::ShapeMismatch(format!(
                "network expects {} channels, got {c}",
                self.config.in_channels
            )));
        }
        let s = self.config.total_stride();
        if h % s != 0 || w % s != 0 || h == 0 || w == 0 {
            return Err(Error::ShapeMismatch(format!(
                "input {h}x{w} not divisible by total stride {s}"
            )));
        }
        Ok((h, w))
    }

    fn run(&self, input: &Tensor, mode: NormMode, mut trace: Option<&mut Trace>) -> Result<Tensor> {
        let (h, w) = self.check_input(input)?;
        let mut x = input.hwc_to_chw()?;
        for layer in &self.layers {
            let y = match layer {
                Layer::Conv {
                    weight,
                    bias,
                    stride,
                    padding,
                } => ops::conv2d(&x, weight, bias, *stride, *padding)?,
                Layer::Norm {
                    scale,
                    shift,
                    running_mean,
                    running_var,
                } => {
                    let (y, cache) = ops::channel_norm(&x, scale, shift, running_mean, running_var, mode)?;
                    if let Some(t) = trace.as_deref_mut() {
                        t.norms.push(Some(cache));
                    }
                    y
                }
                Layer::Relu => ops::relu(&x),
                Layer::Upsample { factor } => ops::bilinear_upsample(&x, *factor)?,
            };
            if let Some(t) = trace.as_deref_mut() {
                if !matches!(layer, Layer::Norm { .. }) {
                    t.norms.push(None);
                }
                t.inputs.push(x);
            }
            x = y;
        }
        x.check_finite("network output")?;
        if x.shape() != [1, h, w] {
            return Err(Error::ShapeMismatch(format!(
                "network output {:?} != [1, {h}, {w}]",
                x.shape()
            )));
        }
        x.reshape(&[h, w])
    }

    /// `[H, W, C]` input to an `[H, W]` map.
    pub fn forward(&self, input: &Tensor, mode: NormMode) -> Result<Tensor> {
        self.run(input, mode, None)
    }

    pub fn forward_traced(&self, input: &Tensor, mode: NormMode) -> Result<(Tensor, Trace)> {
        let mut trace = Trace {
            inputs: Vec::with_capacity(self.layers.len()),
            norms: Vec::with_capacity(self.layers.len()),
            output_shape: (0, 0),
        };
        let out = self.run(input, mode, Some(&mut trace))?;
        trace.output_shape = (out.shape()[0], out.shape()[1]);
        Ok((out, trace))
    }

    /// Parameter gradients (in [`FcnModel::params`] order) for an `[H, W]` output gradient.
    pub fn backward(&self, trace: &Trace, grad_out: &Tensor) -> Result<Vec<Tensor>> {
        let (h, w) = trace.output_shape;
        if grad_out.shape() != [h, w] {
            return Err(Error::ShapeMismatch(format!(
                "output gradient {:?} != [{h}, {w}]",
                grad_out.shape()
            )));
        }
        let mut g = grad_out.clone().reshape(&[1, h, w])?;
        let mut grads: Vec<Tensor> = Vec::new();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = &trace.inputs[i];
            g = match layer {
                Layer::Conv {
                    weight,
                    stride,
                    padding,
                    ..
                } => {
                    let cg = ops::conv2d_backward(x, weight, &g, *stride, *padding)?;
                    grads.push(cg.bias);
                    grads.push(cg.weight);
                    cg.input
                }
                Layer::Norm { scale, .. } => {
                    let cache = trace.norms[i]
                        .as_ref()
                        .ok_or_else(|| Error::ShapeMismatch("trace lacks norm cache".into()))?;
                    let ng = ops::channel_norm_backward(cache, scale, &g)?;
                    grads.push(ng.shift);
                    grads.push(ng.scale);
                    ng.input
                }
                Layer::Relu => ops::relu_backward(x, &g),
                Layer::Upsample { factor } => ops::bilinear_upsample_backward(&g, *factor)?,
            };
        }
        grads.reverse();
        for t in &grads {
            t.check_finite("gradient")?;
        }
        Ok(grads)
    }

    /// Folds the batch statistics of a traced forward into the running averages.
    pub fn commit_running_stats(&mut self, trace: &Trace) {
        for (layer, cache) in self.layers.iter_mut().zip(&trace.norms) {
            if let (
                Layer::Norm {
                    running_mean,
                    running_var,
                    ..
                },
                Some(c),
            ) = (layer, cache)
            {
                ops::update_running_stats(running_mean, running_var, c);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_output_matches_input_resolution() {
        let m = FcnModel::new(FcnConfig::compact(4), 0).unwrap();
        let y = m.forward(&Tensor::zeros(&[32, 32, 4]), NormMode::Batch).unwrap();
        assert_eq!(y.shape(), &[32, 32]);
        assert!(y.max_abs() < 1.0);
        assert_eq!(
            m.param_count(),
            16 * 4 * 25 + 16 + 32 + 32 * 16 * 9 + 32 + 64 + 64 * 32 * 9 + 64 + 64 + 1
        );
    }

    #[test]
    fn init_is_seeded() {
        let a = FcnModel::new(FcnConfig::compact(4), 3).unwrap();
        let b = FcnModel::new(FcnConfig::compact(4), 3).unwrap();
        let c = FcnModel::new(FcnConfig::compact(4), 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let bound = (6.0f64 / (4.0 * 25.0 + 16.0 * 25.0)).sqrt();
        assert!(a.params()[0].data().iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn wrong_channels_and_odd_sizes_error() {
        let m = FcnModel::new(FcnConfig::compact(4), 0).unwrap();
        assert!(m.forward(&Tensor::zeros(&[32, 32, 3]), NormMode::Batch).is_err());
        assert!(m.forward(&Tensor::zeros(&[30, 30, 4]), NormMode::Batch).is_err());
        let bad = FcnConfig {
            in_channels: 4,
            layers: vec![LayerSpec::Conv {
                out_channels: 1,
                kernel: 3,
                stride: 2,
            }],
        };
        assert!(FcnModel::new(bad, 0).is_err());
    }

    #[test]
    fn forward_does_not_touch_running_stats() {
        let mut m = FcnModel::new(FcnConfig::compact(4), 1).unwrap();
        let x = Tensor::from_vec(&[16, 16, 4], (0..1024).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let before = m.clone();
        let (_, trace) = m.forward_traced(&x, NormMode::Batch).unwrap();
        assert_eq!(m, before);
        m.commit_running_stats(&trace);
        assert_ne!(m, before);
    }
}
