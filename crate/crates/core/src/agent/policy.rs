use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{huber, FcnConfig, FcnModel, NormMode, OptimizerState, Tensor};
use crate::percept::{normalize_for_network, rotate_heightmap, DepthStats, HeightMap, Interpolation};

use super::{Action, AgentConfig, Primitive, QMaps};

/// One executed step, kept for training and replay.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state_before: Arc<HeightMap>,
    pub action: Action,
    pub reward: f64,
    pub state_after: Arc<HeightMap>,
    pub grasp_success: bool,
    pub change_detected: bool,
    /// No bootstrapping past this step (scene cleared or reset).
    pub terminal: bool,
    /// Regression target fixed when the transition is first trained.
    pub target: f64,
    pub td_error: f64,
    pub step_index: usize,
}

/// Result of one gradient step at a single pixel.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub loss: f64,
    /// `|q - y|` measured before the update.
    pub td_error: f64,
    pub q_pred: f64,
    /// Loss gradient with respect to the `[H, W]` output map.
    pub output_grad: Tensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub config: AgentConfig,
    pub depth_stats: DepthStats,
    pub push_net: FcnModel,
    pub grasp_net: FcnModel,
    pub push_opt: OptimizerState,
    pub grasp_opt: OptimizerState,
    /// Lagged copies, present only when `target_lag > 1`.
    pub target_nets: Option<(FcnModel, FcnModel)>,
    pub iteration: u64,
}

impl Policy {
    pub fn new(config: AgentConfig, depth_stats: DepthStats, seed: u64) -> Result<Self> {
        Self::with_architecture(
            config.clone(),
            depth_stats,
            FcnConfig::compact(config.in_channels()),
            seed,
        )
    }

    pub fn with_architecture(config: AgentConfig, depth_stats: DepthStats, arch: FcnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if arch.in_channels != config.in_channels() {
            return Err(Error::Config(format!(
                "architecture takes {} channels, config provides {}",
                arch.in_channels,
                config.in_channels()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let push_net = FcnModel::new(arch.clone(), rng.gen())?;
        let grasp_net = FcnModel::new(arch, rng.gen())?;
        let opt = |m: &FcnModel| OptimizerState::new(m, config.learning_rate, config.momentum, config.weight_decay);
        let push_opt = opt(&push_net)?;
        let grasp_opt = opt(&grasp_net)?;
        let target_nets = (config.target_lag > 1).then(|| (push_net.clone(), grasp_net.clone()));
        Ok(Self {
            config,
            depth_stats,
            push_net,
            grasp_net,
            push_opt,
            grasp_opt,
            target_nets,
            iteration: 0,
        })
    }

    pub fn net(&self, p: Primitive) -> &FcnModel {
        match p {
            Primitive::Push => &self.push_net,
            Primitive::Grasp => &self.grasp_net,
        }
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.push_opt.learning_rate = lr;
        self.grasp_opt.learning_rate = lr;
    }

    /// Network input for rotation `r` of `map`.
    pub fn rotated_input(&self, map: &HeightMap, r: usize) -> Result<Tensor> {
        let rotated = rotate_heightmap(map, r, self.config.k, Interpolation::Bilinear);
        normalize_for_network(&rotated, self.depth_stats, self.config.include_depth)
    }
}

/// Runs each listed network on every rotation of `map`.
pub(crate) fn predict_rotations(
    nets: &[&FcnModel],
    map: &HeightMap,
    k: usize,
    input: impl Fn(&HeightMap, usize) -> Result<Tensor> + Sync,
) -> Result<Vec<Vec<f64>>> {
    let per_rotation: Vec<Vec<Tensor>> = (0..k)
        .into_par_iter()
        .map(|r| {
            let x = input(map, r)?;
            nets.iter().map(|m| m.forward(&x, NormMode::Batch)).collect()
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::with_capacity(k * map.resolution * map.resolution); nets.len()];
    for maps in per_rotation {
        for (dst, m) in out.iter_mut().zip(maps) {
            dst.extend_from_slice(m.data());
        }
    }
    Ok(out)
}

/// Push and grasp Q maps for every rotation of `map`.
pub fn predict_q(policy: &Policy, map: &HeightMap, use_target: bool) -> Result<QMaps> {
    let (push, grasp) = match (&policy.target_nets, use_target) {
        (Some((p, g)), true) => (p, g),
        _ => (&policy.push_net, &policy.grasp_net),
    };
    let k = policy.config.k;
    let mut maps = predict_rotations(&[push, grasp], map, k, |m, r| policy.rotated_input(m, r))?;
    let grasp = maps.pop().expect("two nets");
    let push = maps.pop().expect("two nets");
    Ok(QMaps {
        k,
        height: map.resolution,
        width: map.resolution,
        push: Some(push),
        grasp,
    })
}

/// `y = R` at terminal steps, else `R + gamma * max Q(s')`.
pub fn td_target(reward: f64, gamma: f64, qmaps_next: &QMaps, terminal: bool) -> f64 {
    if terminal {
        reward
    } else {
        reward + gamma * qmaps_next.max()
    }
}

/// Flat index of the executed action in its rotation's map.
fn output_index(t: &Transition) -> Result<usize> {
    let n = t.state_before.resolution;
    if t.action.pixel.row >= n || t.action.pixel.col >= n {
        return Err(Error::PixelOutOfBounds {
            row: t.action.pixel.row as i64,
            col: t.action.pixel.col as i64,
            rows: n,
            cols: n,
        });
    }
    Ok(t.action.pixel.row * n + t.action.pixel.col)
}

/// Gradient of `loss` at one pixel of an `[H, W]` map, zero elsewhere.
pub(crate) fn single_pixel_grad(h: usize, w: usize, idx: usize, dq: f64) -> Tensor {
    let mut g = Tensor::zeros(&[h, w]);
    g.data_mut()[idx] = dq;
    g
}

/// Huber regression of the executed pixel toward `transition.target`,
/// updating only the network of the executed primitive.
pub fn train_step(policy: &mut Policy, transition: &Transition) -> Result<TrainReport> {
    if transition.action.rotation >= policy.config.k {
        return Err(Error::Config(format!(
            "rotation {} out of range",
            transition.action.rotation
        )));
    }
    let idx = output_index(transition)?;
    let x = policy.rotated_input(&transition.state_before, transition.action.rotation)?;
    let prim = transition.action.primitive;
    let (q, trace) = policy.net(prim).forward_traced(&x, NormMode::Batch)?;
    let q_pred = q.data()[idx];
    let (loss, dq) = huber(q_pred, transition.target);
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss".into()));
    }
    let output_grad = single_pixel_grad(q.shape()[0], q.shape()[1], idx, dq);
    let grads = policy.net(prim).backward(&trace, &output_grad)?;
    let (net, opt) = match prim {
        Primitive::Push => (&mut policy.push_net, &mut policy.push_opt),
        Primitive::Grasp => (&mut policy.grasp_net, &mut policy.grasp_opt),
    };
    opt.step_model(net, &grads)?;
    net.commit_running_stats(&trace);
    policy.iteration += 1;
    let lag = policy.config.target_lag as u64;
    if lag > 1 && policy.iteration.is_multiple_of(lag) {
        policy.target_nets = Some((policy.push_net.clone(), policy.grasp_net.clone()));
    }
    Ok(TrainReport {
        loss,
        td_error: (q_pred - transition.target).abs(),
        q_pred,
        output_grad,
    })
}
