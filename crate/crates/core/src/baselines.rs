//! Reactive affordance policies trained with binary labels instead of Q-learning.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{
    select_action, Action, AgentConfig, Learner, Primitive, QMaps, RewardConfig, TrainReport, Transition, ValidMask,
};
use crate::error::{Error, Result};
use crate::net::ops::{bce_with_logit, sigmoid};
use crate::net::{FcnConfig, FcnModel, NormMode, OptimizerState};
use crate::percept::{normalize_for_network, rotate_heightmap, DepthStats, HeightMap, Interpolation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReactiveVariant {
    /// Grasp affordances only.
    GraspingOnly,
    /// Push affordances from change detection plus grasp affordances.
    PgReactive,
}

/// Agent settings for a reactive variant; push+grasp explores more.
pub fn reactive_config(variant: ReactiveVariant, base: &AgentConfig) -> AgentConfig {
    match variant {
        ReactiveVariant::GraspingOnly => base.clone(),
        ReactiveVariant::PgReactive => AgentConfig {
            epsilon_start: 0.75,
            epsilon_final: 0.25,
            ..base.clone()
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactivePolicy {
    pub variant: ReactiveVariant,
    pub config: AgentConfig,
    pub depth_stats: DepthStats,
    pub push_net: Option<FcnModel>,
    pub grasp_net: FcnModel,
    pub push_opt: Option<OptimizerState>,
    pub grasp_opt: OptimizerState,
    pub iteration: u64,
}

impl ReactivePolicy {
    pub fn new(variant: ReactiveVariant, config: AgentConfig, depth_stats: DepthStats, seed: u64) -> Result<Self> {
        config.validate()?;
        let arch = FcnConfig::compact(config.in_channels());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let push_seed: u64 = rng.gen();
        let grasp_net = FcnModel::new(arch.clone(), rng.gen())?;
        let push_net = match variant {
            ReactiveVariant::GraspingOnly => None,
            ReactiveVariant::PgReactive => Some(FcnModel::new(arch, push_seed)?),
        };
        let opt = |m: &FcnModel| OptimizerState::new(m, config.learning_rate, config.momentum, config.weight_decay);
        Ok(Self {
            variant,
            push_opt: push_net.as_ref().map(opt).transpose()?,
            grasp_opt: opt(&grasp_net)?,
            push_net,
            grasp_net,
            config,
            depth_stats,
            iteration: 0,
        })
    }

    fn input(&self, map: &HeightMap, r: usize) -> Result<crate::net::Tensor> {
        let rotated = rotate_heightmap(map, r, self.config.k, Interpolation::Bilinear);
        normalize_for_network(&rotated, self.depth_stats, self.config.include_depth)
    }

    /// Affordances in (0, 1) for every rotation of `map`.
    pub fn affordances(&self, map: &HeightMap) -> Result<QMaps> {
        let mut nets = Vec::with_capacity(2);
        if let Some(p) = &self.push_net {
            nets.push(p);
        }
        nets.push(&self.grasp_net);
        let k = self.config.k;
        let mut maps = crate::agent::predict_rotations(&nets, map, k, |m, r| self.input(m, r))?;
        for m in &mut maps {
            m.iter_mut().for_each(|v| *v = sigmoid(*v));
        }
        let grasp = maps.pop().expect("grasp net");
        Ok(QMaps {
            k,
            height: map.resolution,
            width: map.resolution,
            push: maps.pop(),
            grasp,
        })
    }
}

/// ε-greedy choice over the affordance maps, sharing the agent's tie-break.
pub fn reactive_select<R: Rng>(
    policy: &ReactivePolicy,
    heightmap: &HeightMap,
    epsilon: f64,
    rng: &mut R,
) -> Result<Action> {
    let maps = policy.affordances(heightmap)?;
    select_action(&maps, epsilon, rng, &ValidMask::for_map(heightmap, policy.config.k))
}

/// Binary label of a transition: grasp success, or change for pushes.
pub fn reactive_label(t: &Transition) -> f64 {
    let hit = match t.action.primitive {
        Primitive::Grasp => t.grasp_success,
        Primitive::Push => t.change_detected,
    };
    if hit {
        1.0
    } else {
        0.0
    }
}

/// Cross-entropy at the executed pixel; only the executed primitive's net moves.
///
/// The reported `td_error` is the loss, which also serves as replay priority.
pub fn reactive_train_step(policy: &mut ReactivePolicy, transition: &Transition) -> Result<TrainReport> {
    let n = transition.state_before.resolution;
    let (row, col) = (transition.action.pixel.row, transition.action.pixel.col);
    if row >= n || col >= n || transition.action.rotation >= policy.config.k {
        return Err(Error::PixelOutOfBounds {
            row: row as i64,
            col: col as i64,
            rows: n,
            cols: n,
        });
    }
    let idx = row * n + col;
    let x = policy.input(&transition.state_before, transition.action.rotation)?;
    let (net, opt) = match transition.action.primitive {
        Primitive::Grasp => (&mut policy.grasp_net, &mut policy.grasp_opt),
        Primitive::Push => match (&mut policy.push_net, &mut policy.push_opt) {
            (Some(n), Some(o)) => (n, o),
            _ => return Err(Error::Config("grasping-only policy cannot train pushes".into())),
        },
    };
    let label = transition.target;
    let (logits, trace) = net.forward_traced(&x, NormMode::Batch)?;
    let z = logits.data()[idx];
    let (loss, dz) = bce_with_logit(z, label);
    if !loss.is_finite() {
        return Err(Error::NonFinite("cross-entropy".into()));
    }
    let output_grad = crate::agent::single_pixel_grad(n, n, idx, dz);
    let grads = net.backward(&trace, &output_grad)?;
    opt.step_model(net, &grads)?;
    net.commit_running_stats(&trace);
    policy.iteration += 1;
    Ok(TrainReport {
        loss,
        td_error: loss,
        q_pred: sigmoid(z),
        output_grad,
    })
}

impl Learner for ReactivePolicy {
    fn k(&self) -> usize {
        self.config.k
    }

    fn predict(&self, map: &HeightMap) -> Result<QMaps> {
        self.affordances(map)
    }

    fn target(&self, t: &Transition, _next: &QMaps) -> Result<f64> {
        Ok(reactive_label(t))
    }

    fn train(&mut self, t: &Transition) -> Result<TrainReport> {
        reactive_train_step(self, t)
    }

    fn epsilon(&self, step: usize) -> f64 {
        self.config.epsilon(step)
    }

    fn reward_config(&self, resolution: usize) -> RewardConfig {
        self.config.reward_config(resolution)
    }

    fn no_change_limit(&self) -> usize {
        self.config.no_change_limit
    }

    fn max_test_actions(&self) -> usize {
        self.config.max_test_actions
    }

    fn replay_alpha(&self) -> Option<f64> {
        Some(self.config.replay_alpha)
    }

    fn test_learning_rate(&self) -> f64 {
        self.config.test_learning_rate
    }

    fn set_learning_rate(&mut self, lr: f64) {
        self.grasp_opt.learning_rate = lr;
        if let Some(o) = &mut self.push_opt {
            o.learning_rate = lr;
        }
    }

    fn fingerprint(&self) -> Result<String> {
        crate::net::fingerprint(self)
    }
}
