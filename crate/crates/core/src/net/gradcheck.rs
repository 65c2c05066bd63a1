use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::ops::{huber, NormMode};
use super::{FcnModel, Tensor};

#[derive(Debug, Clone, Copy)]
pub struct GradCheckOptions {
    pub step: f64,
    /// Upper bound on entries probed per parameter tensor; `None` probes all.
    pub max_per_tensor: Option<usize>,
    pub seed: u64,
    /// Denominator floor for the relative error.
    pub floor: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            step: 1e-4,
            max_per_tensor: None,
            seed: 0,
            floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Entries skipped because the perturbation crossed a relu kink.
    pub skipped: usize,
}

/// `|a - b| / max(|a|, |b|, floor)`
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Compares analytic parameter gradients of the Huber loss at one output
/// pixel against central differences.
pub fn gradient_check(
    model: &FcnModel,
    input: &Tensor,
    pixel: (usize, usize),
    target: f64,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    let (q, trace) = model.forward_traced(input, NormMode::Batch)?;
    let (h, w) = (q.shape()[0], q.shape()[1]);
    if pixel.0 >= h || pixel.1 >= w {
        return Err(Error::PixelOutOfBounds {
            row: pixel.0 as i64,
            col: pixel.1 as i64,
            rows: h,
            cols: w,
        });
    }
    let idx = pixel.0 * w + pixel.1;
    let (_, dq) = huber(q.data()[idx], target);
    let mut grad_out = Tensor::zeros(&[h, w]);
    grad_out.data_mut()[idx] = dq;
    let grads = model.backward(&trace, &grad_out)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut probe = model.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    let eval = |m: &FcnModel| -> Result<(f64, Vec<bool>)> {
        let (q, t) = m.forward_traced(input, NormMode::Batch)?;
        Ok((huber(q.data()[idx], target).0, t.relu_pattern(m)))
    };
    for (ti, grad) in grads.iter().enumerate() {
        let len = grad.len();
        let entries: Vec<usize> = match opts.max_per_tensor {
            Some(m) if m < len => sample(&mut rng, len, m).into_vec(),
            _ => (0..len).collect(),
        };
        for e in entries {
            let orig = probe.params()[ti].data()[e];
            probe.params_mut()[ti].data_mut()[e] = orig + opts.step;
            let (plus, pat_plus) = eval(&probe)?;
            probe.params_mut()[ti].data_mut()[e] = orig - opts.step;
            let (minus, pat_minus) = eval(&probe)?;
            probe.params_mut()[ti].data_mut()[e] = orig;
            if pat_plus != pat_minus {
                report.skipped += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * opts.step);
            let err = relative_error(grad.data()[e], numeric, opts.floor);
            report.max_rel_error = report.max_rel_error.max(err);
            report.checked += 1;
        }
    }
    Ok(report)
}
