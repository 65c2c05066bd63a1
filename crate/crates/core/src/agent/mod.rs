//! Pixel-wise deep Q-learning over push and grasp primitives.

mod policy;
mod replay;
mod run;
mod train;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percept::{rotation_angle, HeightMap, Pixel};
use crate::sim::{step_grasp, step_push, GraspCommand, PushCommand, Scene, StepOutcome};

pub use policy::{predict_q, td_target, train_step, Policy, TrainReport, Transition};
pub(crate) use policy::{predict_rotations, single_pixel_grad};
pub use replay::{rank_probabilities, ReplayBuffer};
pub use run::{run_test, EpisodeResult, TraceEntry};
pub use train::{
    run_training, train_learner, EnvConfig, Learner, LogRow, PaletteKind, Trainer, TrainingLog, LOG_HEADER,
};

pub const REWARD_GRASP: f64 = 1.0;
pub const REWARD_PUSH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Primitive {
    Push,
    Grasp,
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Primitive::Push => "push",
            Primitive::Grasp => "grasp",
        })
    }
}

impl std::str::FromStr for Primitive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "push" => Ok(Primitive::Push),
            "grasp" => Ok(Primitive::Grasp),
            _ => Err(Error::Config(format!("unknown primitive {s:?}"))),
        }
    }
}

/// A primitive at rotation `rotation` and pixel `pixel` of the rotated map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub primitive: Primitive,
    pub rotation: usize,
    pub pixel: Pixel,
}

impl Action {
    /// World location of the action and the motion direction index.
    ///
    /// Rotated frame `r` shows the table turned by `r * 2π / k`, so a motion
    /// along the frame's +x axis is world direction `(k - r) mod k`.
    pub fn world_target(&self, map: &HeightMap, k: usize) -> Result<(crate::geometry::Vec2, usize)> {
        if self.rotation >= k {
            return Err(Error::Config(format!(
                "rotation {} out of range for k = {k}",
                self.rotation
            )));
        }
        if self.pixel.row >= map.resolution || self.pixel.col >= map.resolution {
            return Err(Error::PixelOutOfBounds {
                row: self.pixel.row as i64,
                col: self.pixel.col as i64,
                rows: map.resolution,
                cols: map.resolution,
            });
        }
        let world = map.rotated_pixel_to_world(self.pixel, rotation_angle(self.rotation, k));
        Ok((world, (k - self.rotation) % k))
    }

    pub fn execute(&self, scene: &Scene, map: &HeightMap, k: usize) -> Result<StepOutcome> {
        let (world, dir) = self.world_target(map, k)?;
        match self.primitive {
            Primitive::Push => step_push(scene, &PushCommand::new(world, dir, k)),
            Primitive::Grasp => step_grasp(scene, &GraspCommand::new(world, dir, k)),
        }
    }
}

/// `k` push and `k` grasp maps of `H x W` scores, rotation-major.
///
/// Policies without a push network leave `push` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct QMaps {
    pub k: usize,
    pub height: usize,
    pub width: usize,
    pub push: Option<Vec<f64>>,
    pub grasp: Vec<f64>,
}

impl QMaps {
    /// `(primitives, k, H, W)`
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        let prims = if self.push.is_some() { 2 } else { 1 };
        (prims, self.k, self.height, self.width)
    }

    pub fn map(&self, primitive: Primitive) -> Option<&[f64]> {
        match primitive {
            Primitive::Push => self.push.as_deref(),
            Primitive::Grasp => Some(&self.grasp),
        }
    }

    pub fn get(&self, a: &Action) -> Option<f64> {
        let m = self.map(a.primitive)?;
        let idx = (a.rotation * self.height + a.pixel.row) * self.width + a.pixel.col;
        m.get(idx).copied()
    }

    /// Available primitives in tie-break order.
    pub fn primitives(&self) -> Vec<Primitive> {
        let mut out = Vec::with_capacity(2);
        if self.push.is_some() {
            out.push(Primitive::Push);
        }
        out.push(Primitive::Grasp);
        out
    }

    /// Maximum over every entry.
    pub fn max(&self) -> f64 {
        self.primitives()
            .into_iter()
            .flat_map(|p| self.map(p).unwrap_or(&[]).iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Which (rotation, pixel) pairs land on the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidMask {
    pub k: usize,
    pub resolution: usize,
    valid: Vec<bool>,
    indices: Vec<usize>,
}

impl ValidMask {
    pub fn for_map(map: &HeightMap, k: usize) -> Self {
        let n = map.resolution;
        let side = map.workspace_side;
        let mut valid = Vec::with_capacity(k * n * n);
        for r in 0..k {
            let angle = rotation_angle(r, k);
            for row in 0..n {
                for col in 0..n {
                    let w = map.rotated_pixel_to_world(Pixel::new(row, col), angle);
                    valid.push(w.x >= 0.0 && w.y >= 0.0 && w.x <= side && w.y <= side);
                }
            }
        }
        Self::from_flags(k, n, valid)
    }

    /// Mask from explicit flags laid out `[k][row][col]`.
    pub fn from_flags(k: usize, resolution: usize, valid: Vec<bool>) -> Self {
        let indices = valid.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect();
        Self {
            k,
            resolution,
            valid,
            indices,
        }
    }

    pub fn is_valid(&self, rotation: usize, pixel: Pixel) -> bool {
        let n = self.resolution;
        self.valid
            .get((rotation * n + pixel.row) * n + pixel.col)
            .copied()
            .unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

fn action_at(primitive: Primitive, flat: usize, n: usize) -> Action {
    Action {
        primitive,
        rotation: flat / (n * n),
        pixel: Pixel::new(flat / n % n, flat % n),
    }
}

/// ε-greedy choice over every valid entry of the available maps.
///
/// Greedy ties go to push over grasp, then the lowest rotation, then the
/// lowest row-major pixel.
pub fn select_action<R: Rng>(qmaps: &QMaps, epsilon: f64, rng: &mut R, mask: &ValidMask) -> Result<Action> {
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    if mask.k != qmaps.k || mask.resolution != qmaps.height || qmaps.height != qmaps.width {
        return Err(Error::ShapeMismatch(format!(
            "mask {}x{}x{} vs maps {}x{}x{}",
            mask.k, mask.resolution, mask.resolution, qmaps.k, qmaps.height, qmaps.width
        )));
    }
    let prims = qmaps.primitives();
    let n = qmaps.height;
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        let p = prims[rng.gen_range(0..prims.len())];
        let flat = mask.indices[rng.gen_range(0..mask.indices.len())];
        return Ok(action_at(p, flat, n));
    }
    let mut best: Option<(f64, Primitive, usize)> = None;
    for p in prims {
        let m = qmaps.map(p).expect("listed primitive");
        for &i in &mask.indices {
            let v = m[i];
            if !v.is_finite() {
                return Err(Error::NonFinite("Q map".into()));
            }
            if best.is_none_or(|(b, _, _)| v > b) {
                best = Some((v, p, i));
            }
        }
    }
    let (_, p, i) = best.expect("non-empty mask");
    Ok(action_at(p, i, n))
}

/// Linear anneal from `start` to `end` over `steps` steps, then flat.
pub fn epsilon_schedule(step: usize, start: f64, end: f64, steps: usize) -> f64 {
    if steps == 0 || step >= steps {
        return end;
    }
    start + (end - start) * step as f64 / steps as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// When off, pushes never earn a reward.
    pub push_reward: bool,
    /// Change-detection threshold on summed absolute height difference.
    pub tau: f64,
}

pub fn compute_reward(
    action: &Action,
    outcome: &StepOutcome,
    h_before: &HeightMap,
    h_after: &HeightMap,
    config: &RewardConfig,
) -> Result<f64> {
    Ok(match action.primitive {
        Primitive::Grasp if outcome.grasp_success => REWARD_GRASP,
        Primitive::Grasp => 0.0,
        Primitive::Push => {
            if config.push_reward && crate::percept::detect_change(h_before, h_after, config.tau)? {
                REWARD_PUSH
            } else {
                0.0
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub k: usize,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_final: f64,
    pub epsilon_anneal_steps: usize,
    pub learning_rate: f64,
    pub test_learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub replay_alpha: f64,
    pub push_reward: bool,
    pub include_depth: bool,
    /// Gradient steps between target-network refreshes; 1 means the target
    /// is the snapshot taken just before each step.
    pub target_lag: usize,
    pub double_q: bool,
    /// `None` uses the resolution-based default.
    pub tau: Option<f64>,
    /// An episode stops once this many consecutive actions changed nothing
    /// and one more follows.
    pub no_change_limit: usize,
    pub max_test_actions: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            k: 16,
            gamma: 0.5,
            epsilon_start: 0.5,
            epsilon_final: 0.1,
            epsilon_anneal_steps: 2500,
            learning_rate: crate::net::DEFAULT_LEARNING_RATE,
            test_learning_rate: 1e-5,
            momentum: crate::net::DEFAULT_MOMENTUM,
            weight_decay: crate::net::DEFAULT_WEIGHT_DECAY,
            replay_alpha: 1.0,
            push_reward: true,
            include_depth: true,
            target_lag: 1,
            double_q: false,
            tau: None,
            no_change_limit: 10,
            max_test_actions: 50,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.k == 0 {
            return bad("k must be >= 1");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must be in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_final) {
            return bad("epsilon must be in [0, 1]");
        }
        if self.epsilon_final > self.epsilon_start {
            return bad("epsilon must not increase");
        }
        if self.target_lag == 0 {
            return bad("target_lag must be >= 1");
        }
        if self.replay_alpha < 0.0 {
            return bad("replay_alpha must be >= 0");
        }
        Ok(())
    }

    pub fn epsilon(&self, step: usize) -> f64 {
        epsilon_schedule(step, self.epsilon_start, self.epsilon_final, self.epsilon_anneal_steps)
    }

    pub fn in_channels(&self) -> usize {
        if self.include_depth {
            4
        } else {
            3
        }
    }

    pub fn reward_config(&self, resolution: usize) -> RewardConfig {
        RewardConfig {
            push_reward: self.push_reward,
            tau: self
                .tau
                .unwrap_or_else(|| crate::percept::default_change_threshold(resolution)),
        }
    }
}
