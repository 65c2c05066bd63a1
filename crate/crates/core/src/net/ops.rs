//! Differentiable tensor ops on single `[C, H, W]` feature maps.
//!
//! Each forward op has a matching `*_backward` that maps the output gradient
//! to input (and parameter) gradients.

use crate::error::{Error, Result};

use super::Tensor;

/// Below this spatial variance a channel is treated as flat.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;
pub const NORM_EPS: f64 = 1e-8;
/// Running-statistics update rate.
pub const NORM_MOMENTUM: f64 = 0.01;

fn dims3(t: &Tensor, what: &str) -> Result<(usize, usize, usize)> {
    match *t.shape() {
        [c, h, w] => Ok((c, h, w)),
        ref s => Err(Error::ShapeMismatch(format!("{what}: expected [C, H, W], got {s:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride: usize,
    pub padding: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl ConvGeometry {
    fn new(input: &Tensor, weight: &Tensor, stride: usize, padding: usize) -> Result<(Self, usize)> {
        let (c, h, w) = dims3(input, "conv2d input")?;
        let &[o, wc, kh, kw] = weight.shape() else {
            return Err(Error::ShapeMismatch(format!(
                "conv2d weight: expected [O, C, kh, kw], got {:?}",
                weight.shape()
            )));
        };
        if wc != c {
            return Err(Error::ShapeMismatch(format!(
                "conv2d: input has {c} channels, weight expects {wc}"
            )));
        }
        if stride == 0 || h + 2 * padding < kh || w + 2 * padding < kw {
            return Err(Error::ShapeMismatch(format!(
                "conv2d: kernel {kh}x{kw} stride {stride} does not fit {h}x{w} with padding {padding}"
            )));
        }
        let geo = ConvGeometry {
            channels: c,
            height: h,
            width: w,
            kernel_h: kh,
            kernel_w: kw,
            stride,
            padding,
            out_h: (h + 2 * padding - kh) / stride + 1,
            out_w: (w + 2 * padding - kw) / stride + 1,
        };
        Ok((geo, o))
    }

    fn patch_len(&self) -> usize {
        self.channels * self.kernel_h * self.kernel_w
    }

    fn positions(&self) -> usize {
        self.out_h * self.out_w
    }
}

/// Unfolds input patches into a `[C*kh*kw, Ho*Wo]` matrix.
fn im2col(input: &[f64], g: &ConvGeometry) -> Vec<f64> {
    let n = g.positions();
    let mut col = vec![0.0; g.patch_len() * n];
    for c in 0..g.channels {
        for ky in 0..g.kernel_h {
            for kx in 0..g.kernel_w {
                let row = (c * g.kernel_h + ky) * g.kernel_w + kx;
                let dst = &mut col[row * n..(row + 1) * n];
                for oy in 0..g.out_h {
                    let iy = (oy * g.stride + ky) as isize - g.padding as isize;
                    if iy < 0 || iy >= g.height as isize {
                        continue;
                    }
                    let src = &input[(c * g.height + iy as usize) * g.width..][..g.width];
                    for ox in 0..g.out_w {
                        let ix = (ox * g.stride + kx) as isize - g.padding as isize;
                        if ix >= 0 && ix < g.width as isize {
                            dst[oy * g.out_w + ox] = src[ix as usize];
                        }
                    }
                }
            }
        }
    }
    col
}

/// Folds a patch matrix back, summing overlaps (adjoint of [`im2col`]).
fn col2im(col: &[f64], g: &ConvGeometry) -> Vec<f64> {
    let n = g.positions();
    let mut out = vec![0.0; g.channels * g.height * g.width];
    for c in 0..g.channels {
        for ky in 0..g.kernel_h {
            for kx in 0..g.kernel_w {
                let row = (c * g.kernel_h + ky) * g.kernel_w + kx;
                let src = &col[row * n..(row + 1) * n];
                for oy in 0..g.out_h {
                    let iy = (oy * g.stride + ky) as isize - g.padding as isize;
                    if iy < 0 || iy >= g.height as isize {
                        continue;
                    }
                    let dst = &mut out[(c * g.height + iy as usize) * g.width..][..g.width];
                    for ox in 0..g.out_w {
                        let ix = (ox * g.stride + kx) as isize - g.padding as isize;
                        if ix >= 0 && ix < g.width as isize {
                            dst[ix as usize] += src[oy * g.out_w + ox];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Row-major `c = a * b (+ c if accumulate)` with optional transposes given as strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (isize, isize),
    b: &[f64],
    (rsb, csb): (isize, isize),
    c: &mut [f64],
    accumulate: bool,
) {
    debug_assert!(c.len() >= m * n);
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: callers pass slices sized for the given dimensions and strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Cross-correlation of a `[C, H, W]` map with `[O, C, kh, kw]` weights.
pub fn conv2d(input: &Tensor, weight: &Tensor, bias: &Tensor, stride: usize, padding: usize) -> Result<Tensor> {
    let (g, o) = ConvGeometry::new(input, weight, stride, padding)?;
    if bias.len() != o {
        return Err(Error::ShapeMismatch(format!(
            "conv2d bias: expected {o}, got {}",
            bias.len()
        )));
    }
    let n = g.positions();
    let kk = g.patch_len();
    let mut out = vec![0.0; o * n];
    for (oc, row) in out.chunks_mut(n).enumerate() {
        row.fill(bias.data()[oc]);
    }
    if g.kernel_h == 1 && g.kernel_w == 1 && g.stride == 1 && g.padding == 0 {
        gemm(
            o,
            kk,
            n,
            weight.data(),
            (kk as isize, 1),
            input.data(),
            (n as isize, 1),
            &mut out,
            true,
        );
    } else {
        let col = im2col(input.data(), &g);
        gemm(
            o,
            kk,
            n,
            weight.data(),
            (kk as isize, 1),
            &col,
            (n as isize, 1),
            &mut out,
            true,
        );
    }
    Tensor::from_vec(&[o, g.out_h, g.out_w], out)
}

pub struct ConvGrads {
    pub input: Tensor,
    pub weight: Tensor,
    pub bias: Tensor,
}

pub fn conv2d_backward(
    input: &Tensor,
    weight: &Tensor,
    grad_out: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<ConvGrads> {
    let (g, o) = ConvGeometry::new(input, weight, stride, padding)?;
    if grad_out.shape() != [o, g.out_h, g.out_w] {
        return Err(Error::ShapeMismatch(format!(
            "conv2d grad: expected {:?}, got {:?}",
            [o, g.out_h, g.out_w],
            grad_out.shape()
        )));
    }
    let n = g.positions();
    let kk = g.patch_len();
    let go = grad_out.data();
    let bias: Vec<f64> = go.chunks(n).map(|r| r.iter().sum()).collect();

    let pointwise = g.kernel_h == 1 && g.kernel_w == 1 && g.stride == 1 && g.padding == 0;
    let owned_col;
    let col: &[f64] = if pointwise {
        input.data()
    } else {
        owned_col = im2col(input.data(), &g);
        &owned_col
    };
    // dW[o, kk] = dY[o, n] * col^T
    let mut dw = vec![0.0; o * kk];
    gemm(o, n, kk, go, (n as isize, 1), col, (1, n as isize), &mut dw, false);
    // dcol[kk, n] = W^T * dY
    let mut dcol = vec![0.0; kk * n];
    gemm(
        kk,
        o,
        n,
        weight.data(),
        (1, kk as isize),
        go,
        (n as isize, 1),
        &mut dcol,
        false,
    );
    let din = if pointwise { dcol } else { col2im(&dcol, &g) };

    Ok(ConvGrads {
        input: Tensor::from_vec(input.shape(), din)?,
        weight: Tensor::from_vec(weight.shape(), dw)?,
        bias: Tensor::from_vec(&[o], bias)?,
    })
}

pub fn relu(input: &Tensor) -> Tensor {
    let data = input.data().iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
    Tensor::from_vec(input.shape(), data).expect("same shape")
}

/// Subgradient 0 at the kink.
pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Tensor {
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(input.shape(), data).expect("same shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    /// Normalize with this map's own spatial statistics.
    Batch,
    /// Normalize with the frozen running statistics.
    Running,
}

/// Per-channel quantities kept for the backward pass.
#[derive(Debug, Clone)]
pub struct NormCache {
    pub mode: NormMode,
    pub xhat: Tensor,
    pub inv_std: Vec<f64>,
    pub batch_mean: Vec<f64>,
    pub batch_var: Vec<f64>,
    /// Flat channels that fell back to shift-only output.
    pub degenerate: Vec<bool>,
}

/// Channel normalization over the spatial positions of one map.
pub fn channel_norm(
    input: &Tensor,
    scale: &Tensor,
    shift: &Tensor,
    running_mean: &Tensor,
    running_var: &Tensor,
    mode: NormMode,
) -> Result<(Tensor, NormCache)> {
    let (c, h, w) = dims3(input, "channel_norm input")?;
    for (t, name) in [
        (scale, "scale"),
        (shift, "shift"),
        (running_mean, "running mean"),
        (running_var, "running var"),
    ] {
        if t.len() != c {
            return Err(Error::ShapeMismatch(format!(
                "channel_norm {name}: expected {c}, got {}",
                t.len()
            )));
        }
    }
    let n = h * w;
    let mut out = vec![0.0; c * n];
    let mut xhat = vec![0.0; c * n];
    let mut cache = NormCache {
        mode,
        xhat: Tensor::zeros(&[0]),
        inv_std: vec![0.0; c],
        batch_mean: vec![0.0; c],
        batch_var: vec![0.0; c],
        degenerate: vec![false; c],
    };
    for ch in 0..c {
        let x = &input.data()[ch * n..(ch + 1) * n];
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        cache.batch_mean[ch] = mean;
        cache.batch_var[ch] = var;
        let (g, b) = (scale.data()[ch], shift.data()[ch]);
        let (mu, inv) = match mode {
            NormMode::Batch if var < DEGENERATE_VARIANCE => {
                cache.degenerate[ch] = true;
                out[ch * n..(ch + 1) * n].fill(b);
                continue;
            }
            NormMode::Batch => (mean, 1.0 / (var + NORM_EPS).sqrt()),
            NormMode::Running => (
                running_mean.data()[ch],
                1.0 / (running_var.data()[ch] + NORM_EPS).sqrt(),
            ),
        };
        cache.inv_std[ch] = inv;
        for i in 0..n {
            let xh = (x[i] - mu) * inv;
            xhat[ch * n + i] = xh;
            out[ch * n + i] = g * xh + b;
        }
    }
    cache.xhat = Tensor::from_vec(&[c, h, w], xhat)?;
    Ok((Tensor::from_vec(&[c, h, w], out)?, cache))
}

pub struct NormGrads {
    pub input: Tensor,
    pub scale: Tensor,
    pub shift: Tensor,
}

pub fn channel_norm_backward(cache: &NormCache, scale: &Tensor, grad_out: &Tensor) -> Result<NormGrads> {
    let (c, h, w) = dims3(grad_out, "channel_norm grad")?;
    let n = h * w;
    let mut din = vec![0.0; c * n];
    let mut dscale = vec![0.0; c];
    let mut dshift = vec![0.0; c];
    for ch in 0..c {
        let dy = &grad_out.data()[ch * n..(ch + 1) * n];
        let xh = &cache.xhat.data()[ch * n..(ch + 1) * n];
        let sum_dy: f64 = dy.iter().sum();
        dshift[ch] = sum_dy;
        if cache.degenerate[ch] {
            continue;
        }
        let sum_dy_xh: f64 = dy.iter().zip(xh).map(|(a, b)| a * b).sum();
        dscale[ch] = sum_dy_xh;
        let k = scale.data()[ch] * cache.inv_std[ch];
        let dx = &mut din[ch * n..(ch + 1) * n];
        match cache.mode {
            NormMode::Batch => {
                let nf = n as f64;
                for i in 0..n {
                    dx[i] = k / nf * (nf * dy[i] - sum_dy - xh[i] * sum_dy_xh);
                }
            }
            NormMode::Running => {
                for i in 0..n {
                    dx[i] = k * dy[i];
                }
            }
        }
    }
    Ok(NormGrads {
        input: Tensor::from_vec(&[c, h, w], din)?,
        scale: Tensor::from_vec(&[c], dscale)?,
        shift: Tensor::from_vec(&[c], dshift)?,
    })
}

/// Exponential moving average update of running statistics.
pub fn update_running_stats(running_mean: &mut Tensor, running_var: &mut Tensor, cache: &NormCache) {
    for ch in 0..running_mean.len() {
        let m = &mut running_mean.data_mut()[ch];
        *m = (1.0 - NORM_MOMENTUM) * *m + NORM_MOMENTUM * cache.batch_mean[ch];
        let v = &mut running_var.data_mut()[ch];
        *v = (1.0 - NORM_MOMENTUM) * *v + NORM_MOMENTUM * cache.batch_var[ch];
    }
}

/// Source index pairs and weights for one axis, half-pixel centred.
fn upsample_taps(len: usize, factor: usize) -> Vec<(usize, usize, f64)> {
    (0..len * factor)
        .map(|o| {
            let src = ((o as f64 + 0.5) / factor as f64 - 0.5).max(0.0);
            let i0 = (src.floor() as usize).min(len - 1);
            let i1 = (i0 + 1).min(len - 1);
            (i0, i1, src - i0 as f64)
        })
        .collect()
}

fn check_factor(factor: usize) -> Result<()> {
    if matches!(factor, 2 | 4 | 8) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "upsample factor {factor} not in {{2, 4, 8}}"
        )))
    }
}

/// Bilinear upsampling with half-pixel centres and edge clamping.
pub fn bilinear_upsample(input: &Tensor, factor: usize) -> Result<Tensor> {
    check_factor(factor)?;
    let (c, h, w) = dims3(input, "upsample input")?;
    let (oh, ow) = (h * factor, w * factor);
    let ty = upsample_taps(h, factor);
    let tx = upsample_taps(w, factor);
    let mut out = vec![0.0; c * oh * ow];
    let x = input.data();
    for ch in 0..c {
        let plane = &x[ch * h * w..(ch + 1) * h * w];
        for (oy, &(y0, y1, ly)) in ty.iter().enumerate() {
            let dst = &mut out[(ch * oh + oy) * ow..][..ow];
            for (ox, &(x0, x1, lx)) in tx.iter().enumerate() {
                let top = plane[y0 * w + x0] * (1.0 - lx) + plane[y0 * w + x1] * lx;
                let bot = plane[y1 * w + x0] * (1.0 - lx) + plane[y1 * w + x1] * lx;
                dst[ox] = top * (1.0 - ly) + bot * ly;
            }
        }
    }
    Tensor::from_vec(&[c, oh, ow], out)
}

/// Adjoint of [`bilinear_upsample`].
pub fn bilinear_upsample_backward(grad_out: &Tensor, factor: usize) -> Result<Tensor> {
    check_factor(factor)?;
    let (c, oh, ow) = dims3(grad_out, "upsample grad")?;
    if oh % factor != 0 || ow % factor != 0 {
        return Err(Error::ShapeMismatch(format!(
            "upsample grad {oh}x{ow} not divisible by {factor}"
        )));
    }
    let (h, w) = (oh / factor, ow / factor);
    let ty = upsample_taps(h, factor);
    let tx = upsample_taps(w, factor);
    let mut din = vec![0.0; c * h * w];
    let g = grad_out.data();
    for ch in 0..c {
        let plane = &mut din[ch * h * w..(ch + 1) * h * w];
        for (oy, &(y0, y1, ly)) in ty.iter().enumerate() {
            let src = &g[(ch * oh + oy) * ow..][..ow];
            for (ox, &(x0, x1, lx)) in tx.iter().enumerate() {
                let v = src[ox];
                if v == 0.0 {
                    continue;
                }
                plane[y0 * w + x0] += v * (1.0 - ly) * (1.0 - lx);
                plane[y0 * w + x1] += v * (1.0 - ly) * lx;
                plane[y1 * w + x0] += v * ly * (1.0 - lx);
                plane[y1 * w + x1] += v * ly * lx;
            }
        }
    }
    Tensor::from_vec(&[c, h, w], din)
}

/// Huber loss of `q_pred` against `y_target` and its derivative in `q_pred`.
pub fn huber(q_pred: f64, y_target: f64) -> (f64, f64) {
    let delta = q_pred - y_target;
    if delta.abs() < 1.0 {
        (0.5 * delta * delta, delta)
    } else {
        (delta.abs() - 0.5, delta.signum())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of `sigmoid(logit)` against `label`, with its
/// derivative in `logit`.
pub fn bce_with_logit(logit: f64, label: f64) -> (f64, f64) {
    // log(1 + e^z) - label * z, computed stably
    let softplus = logit.max(0.0) + (-logit.abs()).exp().ln_1p();
    (softplus - label * logit, sigmoid(logit) - label)
}
