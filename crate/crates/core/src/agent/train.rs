use std::collections::VecDeque;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percept::{detect_change, render_heightmap, DepthStats, HeightMap};
use crate::sim::{block_palette, holdout_palette, spawn_random, DropRegion, ObjectSpec, Scene, WORKSPACE_SIDE};

use super::policy::{predict_q, train_step, Transition};
use super::{
    compute_reward, select_action, Action, AgentConfig, Policy, Primitive, QMaps, ReplayBuffer, RewardConfig,
    TrainReport, ValidMask,
};

/// Anything trainable by the shared trial-and-error loop.
pub trait Learner: Clone + Send + Sync {
    fn k(&self) -> usize;
    /// Per-pixel scores of the current learner for every rotation.
    fn predict(&self, map: &HeightMap) -> Result<QMaps>;
    /// Regression or classification target for `t`, given the current
    /// learner's scores on `t.state_after`.
    fn target(&self, t: &Transition, next: &QMaps) -> Result<f64>;
    fn train(&mut self, t: &Transition) -> Result<TrainReport>;
    fn epsilon(&self, step: usize) -> f64;
    fn reward_config(&self, resolution: usize) -> RewardConfig;
    fn no_change_limit(&self) -> usize;
    fn max_test_actions(&self) -> usize;
    /// Rank exponent for replay, `None` disables replay.
    fn replay_alpha(&self) -> Option<f64>;
    fn test_learning_rate(&self) -> f64;
    fn set_learning_rate(&mut self, lr: f64);
    /// Hash of every parameter, statistic and optimizer buffer.
    fn fingerprint(&self) -> Result<String>;
}

impl Learner for Policy {
    fn k(&self) -> usize {
        self.config.k
    }

    fn predict(&self, map: &HeightMap) -> Result<QMaps> {
        predict_q(self, map, false)
    }

    fn target(&self, t: &Transition, next: &QMaps) -> Result<f64> {
        if t.terminal {
            return Ok(t.reward);
        }
        let gamma = self.config.gamma;
        let Some(_) = self.target_nets else {
            return Ok(super::td_target(t.reward, gamma, next, false));
        };
        let lagged = predict_q(self, &t.state_after, true)?;
        if !self.config.double_q {
            return Ok(super::td_target(t.reward, gamma, &lagged, false));
        }
        // argmax by the online maps, value from the lagged ones
        let mask = ValidMask::for_map(&t.state_after, self.config.k);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let best = select_action(next, 0.0, &mut rng, &mask)?;
        let v = lagged
            .get(&best)
            .ok_or_else(|| Error::ShapeMismatch("lagged maps".into()))?;
        Ok(t.reward + gamma * v)
    }

    fn train(&mut self, t: &Transition) -> Result<TrainReport> {
        train_step(self, t)
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
        Policy::set_learning_rate(self, lr);
    }

    fn fingerprint(&self) -> Result<String> {
        crate::net::fingerprint(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PaletteKind {
    #[default]
    Blocks,
    Holdout,
}

impl PaletteKind {
    pub fn specs(self) -> Vec<ObjectSpec> {
        match self {
            PaletteKind::Blocks => block_palette(),
            PaletteKind::Holdout => holdout_palette(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub resolution: usize,
    pub num_objects: usize,
    pub workspace_side: f64,
    pub drop_margin: f64,
    pub palette: PaletteKind,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            resolution: 64,
            num_objects: 5,
            workspace_side: WORKSPACE_SIDE,
            drop_margin: DropRegion::default().margin,
            palette: PaletteKind::Blocks,
        }
    }
}

impl EnvConfig {
    pub fn drop_region(&self) -> DropRegion {
        DropRegion {
            workspace_side: self.workspace_side,
            margin: self.drop_margin,
        }
    }

    pub fn spawn(&self, seed: u64) -> Result<Scene> {
        spawn_random(self.num_objects, &self.palette.specs(), self.drop_region(), seed)
    }

    /// Height statistics over 100 freshly spawned scenes.
    pub fn depth_stats(&self, seed: u64) -> Result<DepthStats> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let maps = (0..100)
            .map(|_| render_heightmap(&self.spawn(rng.gen())?, self.resolution))
            .collect::<Result<Vec<_>>>()?;
        Ok(DepthStats::from_maps(&maps))
    }
}

pub const LOG_HEADER: &str =
    "step,primitive,rotation,pixel_row,pixel_col,reward,td_error,epsilon,grasp_rate_200,push_then_grasp_rate";

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub step: usize,
    pub primitive: Primitive,
    pub rotation: usize,
    pub pixel_row: usize,
    pub pixel_col: usize,
    pub reward: f64,
    pub td_error: f64,
    pub epsilon: f64,
    pub grasp_rate_200: f64,
    pub push_then_grasp_rate: f64,
}

impl LogRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.step,
            self.primitive,
            self.rotation,
            self.pixel_row,
            self.pixel_col,
            self.reward,
            self.td_error,
            self.epsilon,
            self.grasp_rate_200,
            self.push_then_grasp_rate
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
}

impl TrainingLog {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{LOG_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{}", r.to_csv())?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn final_grasp_rate(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.grasp_rate_200)
    }

    pub fn final_push_then_grasp_rate(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.push_then_grasp_rate)
    }
}

const WINDOW: usize = 200;

fn window_rate(w: &VecDeque<bool>) -> f64 {
    if w.is_empty() {
        0.0
    } else {
        w.iter().filter(|&&s| s).count() as f64 / w.len() as f64
    }
}

fn push_window(w: &mut VecDeque<bool>, v: bool) {
    if w.len() == WINDOW {
        w.pop_front();
    }
    w.push_back(v);
}

/// Step-wise trial-and-error training loop.
///
/// Each transition is trained one step late, once the scores of its next
/// state are available; the same scores drive the next action choice.
pub struct Trainer<L: Learner> {
    learner: L,
    env: EnvConfig,
    rng: ChaCha8Rng,
    scene: Scene,
    map: Arc<HeightMap>,
    mask: ValidMask,
    buffer: ReplayBuffer,
    pending: Option<(Transition, LogRow)>,
    step: usize,
    no_change: usize,
    log: TrainingLog,
    grasps: VecDeque<bool>,
    pushes_then_grasp: VecDeque<bool>,
    last_was_push: bool,
    respawns: usize,
}

impl<L: Learner> Trainer<L> {
    pub fn new(learner: L, env: EnvConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = env.spawn(rng.gen())?;
        let map = Arc::new(render_heightmap(&scene, env.resolution)?);
        let mask = ValidMask::for_map(&map, learner.k());
        let alpha = learner.replay_alpha().unwrap_or(0.0);
        Ok(Self {
            learner,
            env,
            rng,
            scene,
            map,
            mask,
            buffer: ReplayBuffer::new(alpha),
            pending: None,
            step: 0,
            no_change: 0,
            log: TrainingLog::default(),
            grasps: VecDeque::new(),
            pushes_then_grasp: VecDeque::new(),
            last_was_push: false,
            respawns: 0,
        })
    }

    pub fn learner(&self) -> &L {
        &self.learner
    }

    pub fn log(&self) -> &TrainingLog {
        &self.log
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn replay_len(&self) -> usize {
        self.buffer.len()
    }

    pub fn respawns(&self) -> usize {
        self.respawns
    }

    /// Trains the pending transition against `next`, then replays one sample.
    fn settle(&mut self, next: &QMaps, replay: bool) -> Result<()> {
        let Some((mut t, mut row)) = self.pending.take() else {
            return Ok(());
        };
        t.target = self.learner.target(&t, next)?;
        let report = self.learner.train(&t)?;
        t.td_error = report.td_error;
        row.td_error = report.td_error;
        self.log.rows.push(row);
        self.buffer.push(t);
        if replay && self.learner.replay_alpha().is_some() {
            let i = self.buffer.sample(&mut self.rng)?;
            let sample = self.buffer.get(i).expect("sampled index").clone();
            let r = self.learner.train(&sample)?;
            self.buffer.update_td_error(i, r.td_error);
        }
        Ok(())
    }

    /// Executes one action.
    pub fn step(&mut self) -> Result<()> {
        let q = self.learner.predict(&self.map)?;
        self.settle(&q, true)?;

        let epsilon = self.learner.epsilon(self.step);
        let action = select_action(&q, epsilon, &mut self.rng, &self.mask)?;
        let k = self.learner.k();
        let outcome = action.execute(&self.scene, &self.map, k)?;
        let after = Arc::new(render_heightmap(&outcome.scene_after, self.env.resolution)?);
        let rc = self.learner.reward_config(self.env.resolution);
        let reward = compute_reward(&action, &outcome, &self.map, &after, &rc)?;
        let changed = outcome.grasp_success || detect_change(&self.map, &after, rc.tau)?;

        if action.primitive == Primitive::Grasp {
            push_window(&mut self.grasps, outcome.grasp_success);
        }
        if self.last_was_push {
            let v = action.primitive == Primitive::Grasp && outcome.grasp_success;
            push_window(&mut self.pushes_then_grasp, v);
        }
        self.last_was_push = action.primitive == Primitive::Push;
        self.no_change = if changed { 0 } else { self.no_change + 1 };

        let cleared = outcome.scene_after.is_cleared();
        let stuck = self.no_change > self.learner.no_change_limit();
        let row = log_row(
            self.step,
            &action,
            reward,
            epsilon,
            &self.grasps,
            &self.pushes_then_grasp,
        );
        let t = Transition {
            state_before: self.map.clone(),
            action,
            reward,
            state_after: after.clone(),
            grasp_success: outcome.grasp_success,
            change_detected: changed,
            terminal: cleared || stuck,
            target: 0.0,
            td_error: 0.0,
            step_index: self.step,
        };
        self.pending = Some((t, row));
        if cleared || stuck {
            self.scene = self.env.spawn(self.rng.gen())?;
            self.map = Arc::new(render_heightmap(&self.scene, self.env.resolution)?);
            self.no_change = 0;
            self.respawns += 1;
        } else {
            self.scene = outcome.scene_after;
            self.map = after;
        }
        self.step += 1;
        Ok(())
    }

    /// Trains the last pending transition and returns the learner and log.
    pub fn finish(mut self) -> Result<(L, TrainingLog)> {
        if self.pending.is_some() {
            let q = self.learner.predict(&self.map)?;
            self.settle(&q, false)?;
        }
        Ok((self.learner, self.log))
    }

    /// Abandons training, keeping the rows logged so far.
    pub fn into_log(self) -> TrainingLog {
        self.log
    }
}

fn log_row(
    step: usize,
    a: &Action,
    reward: f64,
    epsilon: f64,
    grasps: &VecDeque<bool>,
    ptg: &VecDeque<bool>,
) -> LogRow {
    LogRow {
        step,
        primitive: a.primitive,
        rotation: a.rotation,
        pixel_row: a.pixel.row,
        pixel_col: a.pixel.col,
        reward,
        td_error: 0.0,
        epsilon,
        grasp_rate_200: window_rate(grasps),
        push_then_grasp_rate: window_rate(ptg),
    }
}

/// Trains a fresh VPG policy for `steps` actions.
pub fn run_training(env: &EnvConfig, config: &AgentConfig, steps: usize, seed: u64) -> Result<(Policy, TrainingLog)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stats = env.depth_stats(rng.gen())?;
    let policy = Policy::new(config.clone(), stats, rng.gen())?;
    train_learner(policy, env, steps, rng.gen())
}

/// Runs the training loop on any learner.
pub fn train_learner<L: Learner>(learner: L, env: &EnvConfig, steps: usize, seed: u64) -> Result<(L, TrainingLog)> {
    let mut trainer = Trainer::new(learner, env.clone(), seed)?;
    for _ in 0..steps {
        trainer.step()?;
    }
    trainer.finish()
}
