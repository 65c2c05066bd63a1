//! Benchmark metrics, scenario suites and policy variants.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{
    train_learner, AgentConfig, EnvConfig, EpisodeResult, Learner, Policy, QMaps, RewardConfig, TrainReport,
    TrainingLog, Transition,
};
use crate::baselines::{reactive_config, ReactivePolicy, ReactiveVariant};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::percept::{DepthStats, HeightMap};
use crate::sim::{load_scenario, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    Vpg,
    VpgNoReward,
    VpgMyopic,
    VpgNoDepth,
    GraspingOnly,
    PgReactive,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Vpg,
        PolicyKind::VpgNoReward,
        PolicyKind::VpgMyopic,
        PolicyKind::VpgNoDepth,
        PolicyKind::GraspingOnly,
        PolicyKind::PgReactive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Vpg => "vpg",
            PolicyKind::VpgNoReward => "vpg-noreward",
            PolicyKind::VpgMyopic => "vpg-myopic",
            PolicyKind::VpgNoDepth => "vpg-nodepth",
            PolicyKind::GraspingOnly => "grasping-only",
            PolicyKind::PgReactive => "pg-reactive",
        }
    }

    /// `base` with this variant's single knob applied.
    pub fn agent_config(self, base: &AgentConfig) -> AgentConfig {
        match self {
            PolicyKind::Vpg => base.clone(),
            PolicyKind::VpgNoReward => AgentConfig {
                push_reward: false,
                ..base.clone()
            },
            PolicyKind::VpgMyopic => AgentConfig {
                gamma: 0.2,
                ..base.clone()
            },
            PolicyKind::VpgNoDepth => AgentConfig {
                include_depth: false,
                ..base.clone()
            },
            PolicyKind::GraspingOnly => reactive_config(ReactiveVariant::GraspingOnly, base),
            PolicyKind::PgReactive => reactive_config(ReactiveVariant::PgReactive, base),
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

/// The base configuration plus the three single-knob ablations.
pub fn ablation_matrix(base: &AgentConfig) -> Vec<(PolicyKind, AgentConfig)> {
    [
        PolicyKind::Vpg,
        PolicyKind::VpgNoReward,
        PolicyKind::VpgMyopic,
        PolicyKind::VpgNoDepth,
    ]
    .into_iter()
    .map(|k| (k, k.agent_config(base)))
    .collect()
}

/// Either learner family, for storage and dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnyPolicy {
    Vpg(Policy),
    Reactive(ReactivePolicy),
}

impl AnyPolicy {
    pub fn new(kind: PolicyKind, base: &AgentConfig, depth_stats: DepthStats, seed: u64) -> Result<Self> {
        let config = kind.agent_config(base);
        Ok(match kind {
            PolicyKind::GraspingOnly => AnyPolicy::Reactive(ReactivePolicy::new(
                ReactiveVariant::GraspingOnly,
                config,
                depth_stats,
                seed,
            )?),
            PolicyKind::PgReactive => AnyPolicy::Reactive(ReactivePolicy::new(
                ReactiveVariant::PgReactive,
                config,
                depth_stats,
                seed,
            )?),
            _ => AnyPolicy::Vpg(Policy::new(config, depth_stats, seed)?),
        })
    }

    pub fn config(&self) -> &AgentConfig {
        match self {
            AnyPolicy::Vpg(p) => &p.config,
            AnyPolicy::Reactive(p) => &p.config,
        }
    }
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            AnyPolicy::Vpg($p) => $e,
            AnyPolicy::Reactive($p) => $e,
        }
    };
}

impl Learner for AnyPolicy {
    fn k(&self) -> usize {
        delegate!(self, p => p.k())
    }
    fn predict(&self, map: &HeightMap) -> Result<QMaps> {
        delegate!(self, p => p.predict(map))
    }
    fn target(&self, t: &Transition, next: &QMaps) -> Result<f64> {
        delegate!(self, p => p.target(t, next))
    }
    fn train(&mut self, t: &Transition) -> Result<TrainReport> {
        delegate!(self, p => p.train(t))
    }
    fn epsilon(&self, step: usize) -> f64 {
        delegate!(self, p => p.epsilon(step))
    }
    fn reward_config(&self, resolution: usize) -> RewardConfig {
        delegate!(self, p => p.reward_config(resolution))
    }
    fn no_change_limit(&self) -> usize {
        delegate!(self, p => p.no_change_limit())
    }
    fn max_test_actions(&self) -> usize {
        delegate!(self, p => p.max_test_actions())
    }
    fn replay_alpha(&self) -> Option<f64> {
        delegate!(self, p => p.replay_alpha())
    }
    fn test_learning_rate(&self) -> f64 {
        delegate!(self, p => p.test_learning_rate())
    }
    fn set_learning_rate(&mut self, lr: f64) {
        delegate!(self, p => Learner::set_learning_rate(p, lr))
    }
    fn fingerprint(&self) -> Result<String> {
        delegate!(self, p => p.fingerprint())
    }
}

/// A fresh policy of `kind` with seed-derived depth statistics and weights,
/// plus the seed for its training loop.
pub fn init_policy(kind: PolicyKind, env: &EnvConfig, base: &AgentConfig, seed: u64) -> Result<(AnyPolicy, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stats = env.depth_stats(rng.gen())?;
    let policy = AnyPolicy::new(kind, base, stats, rng.gen())?;
    Ok((policy, rng.gen()))
}

/// Trains a fresh policy of `kind` for `steps` actions.
pub fn train_policy(
    kind: PolicyKind,
    env: &EnvConfig,
    base: &AgentConfig,
    steps: usize,
    seed: u64,
) -> Result<(AnyPolicy, TrainingLog)> {
    let (policy, loop_seed) = init_policy(kind, env, base, seed)?;
    train_learner(policy, env, steps, loop_seed)
}

/// Checkpoint payload: a policy with the variant and environment it was trained in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedPolicy {
    pub variant: PolicyKind,
    pub env: EnvConfig,
    pub steps: usize,
    pub policy: AnyPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub completed: bool,
    pub actions: usize,
    pub grasp_attempts: usize,
    pub grasp_successes: usize,
    pub objects_initial: usize,
    pub objects_expelled: usize,
}

impl From<&EpisodeResult> for RunResult {
    fn from(e: &EpisodeResult) -> Self {
        Self {
            completed: e.completed,
            actions: e.actions,
            grasp_attempts: e.grasp_attempts,
            grasp_successes: e.grasp_successes,
            objects_initial: e.objects_initial,
            objects_expelled: e.objects_expelled,
        }
    }
}

/// Percentages; `None` where no completed run defines the quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub runs: usize,
    pub completed: usize,
    pub completion: f64,
    pub grasp_success: Option<f64>,
    pub action_efficiency: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

/// Completion over all runs; grasp success and action efficiency averaged
/// over completed runs only.
pub fn compute_metrics(results: &[RunResult]) -> Result<Metrics> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let done: Vec<&RunResult> = results.iter().filter(|r| r.completed).collect();
    Ok(Metrics {
        runs: results.len(),
        completed: done.len(),
        completion: 100.0 * done.len() as f64 / results.len() as f64,
        grasp_success: mean(
            done.iter()
                .filter(|r| r.grasp_attempts > 0)
                .map(|r| 100.0 * r.grasp_successes as f64 / r.grasp_attempts as f64),
        ),
        action_efficiency: mean(
            done.iter()
                .filter(|r| r.actions > 0)
                .map(|r| 100.0 * r.objects_initial as f64 / r.actions as f64),
        ),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub scene: Scene,
}

const ADVERSARIAL: [(&str, &str); 6] = [
    ("packed_row_3", include_str!("../scenarios/packed_row_3.txt")),
    ("packed_row_4", include_str!("../scenarios/packed_row_4.txt")),
    ("block_2x2", include_str!("../scenarios/block_2x2.txt")),
    ("l_cluster", include_str!("../scenarios/l_cluster.txt")),
    ("wall_pair", include_str!("../scenarios/wall_pair.txt")),
    ("isolated", include_str!("../scenarios/isolated.txt")),
];

/// The six shipped packed arrangements, including the isolated-object check.
pub fn adversarial_suite() -> Vec<Scenario> {
    ADVERSARIAL
        .iter()
        .map(|(name, text)| Scenario {
            name: name.to_string(),
            scene: load_scenario(text).expect("shipped scenario is valid"),
        })
        .collect()
}

/// The isolated single-object case on its own.
pub fn sanity_suite() -> Vec<Scenario> {
    adversarial_suite()
        .into_iter()
        .filter(|s| s.name == "isolated")
        .collect()
}

/// `count` random drops of `env.num_objects` objects.
pub fn random_suite(env: &EnvConfig, count: usize, seed: u64) -> Result<Vec<Scenario>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            Ok(Scenario {
                name: format!("random_{i:02}"),
                scene: env.spawn(rng.gen())?,
            })
        })
        .collect()
}

/// Loads every `*.txt` scenario in a directory, sorted by file name.
pub fn load_suite_dir(dir: &Path) -> Result<Vec<Scenario>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p)?;
            Ok(Scenario {
                name: p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                scene: load_scenario(&text)?,
            })
        })
        .collect()
}

/// Rigidly moves the whole arrangement by a random turn about the table
/// centre and a shift of up to 2 cm, keeping every centroid on the table.
pub fn jitter_scene(scene: &Scene, seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let turned = scene.rotated_about_center(angle);
    for _ in 0..20 {
        let shift = Vec2::new(rng.gen_range(-0.02..=0.02), rng.gen_range(-0.02..=0.02));
        let mut moved = turned.clone();
        for o in &mut moved.objects {
            o.pose = o.pose.translated(shift);
        }
        if moved.objects.iter().all(|o| moved.contains(o.world_centroid())) {
            return moved;
        }
    }
    turned
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub run: usize,
    pub seed: u64,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub method: String,
    pub scenarios: Vec<(String, Metrics)>,
    pub aggregate: Metrics,
    pub runs: Vec<RunRecord>,
}

pub const COMPLETION_RULE: &str =
    "completion: every initial object removed by a successful grasp; grasp success and action efficiency average completed runs only";

/// `n_runs` seeded test episodes per scenario, each on a jittered copy.
///
/// Runs fan out over the current rayon pool; results are folded in
/// (scenario, seed) order so the report does not depend on scheduling.
pub fn run_benchmark<L: Learner>(
    method: &str,
    learner: &L,
    suite: &[Scenario],
    seeds: &[u64],
    resolution: usize,
) -> Result<BenchmarkReport> {
    if suite.is_empty() {
        return Err(Error::Config("benchmark suite is empty".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Config("benchmark needs at least one seed".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..suite.len())
        .flat_map(|s| (0..seeds.len()).map(move |r| (s, r)))
        .collect();
    let results: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(s, r)| {
            let scene = jitter_scene(&suite[s].scene, seeds[r]);
            let episode = crate::agent::run_test(learner, &scene, resolution)?;
            Ok(RunRecord {
                scenario: suite[s].name.clone(),
                run: r,
                seed: seeds[r],
                result: RunResult::from(&episode),
            })
        })
        .collect::<Result<_>>()?;
    let mut scenarios = Vec::with_capacity(suite.len());
    for sc in suite {
        let rs: Vec<RunResult> = results
            .iter()
            .filter(|x| x.scenario == sc.name)
            .map(|x| x.result)
            .collect();
        scenarios.push((sc.name.clone(), compute_metrics(&rs)?));
    }
    let all: Vec<RunResult> = results.iter().map(|x| x.result).collect();
    Ok(BenchmarkReport {
        method: method.to_string(),
        scenarios,
        aggregate: compute_metrics(&all)?,
        runs: results,
    })
}

/// `n` deterministic episode seeds.
pub fn benchmark_seeds(n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen()).collect()
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.1}"))
}

impl BenchmarkReport {
    pub fn runs_csv(&self) -> String {
        let mut out = String::from(
            "method,scenario,run,seed,completed,actions,grasp_attempts,grasp_successes,objects_initial,objects_expelled\n",
        );
        for r in &self.runs {
            let x = &r.result;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                self.method,
                r.scenario,
                r.run,
                r.seed,
                x.completed,
                x.actions,
                x.grasp_attempts,
                x.grasp_successes,
                x.objects_initial,
                x.objects_expelled
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("method,scenario,runs,completion,grasp_success,action_efficiency\n");
        let rows = self
            .scenarios
            .iter()
            .map(|(n, m)| (n.as_str(), m))
            .chain([("all", &self.aggregate)]);
        for (name, m) in rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.1},{},{}",
                self.method,
                name,
                m.runs,
                m.completion,
                pct(m.grasp_success),
                pct(m.action_efficiency)
            );
        }
        out
    }
}

/// Aligned plain-text comparison of aggregate metrics, one row per report.
pub fn format_table(reports: &[BenchmarkReport]) -> String {
    let header = ["Method", "Completion", "Grasp Success", "Action Efficiency"];
    let rows: Vec<[String; 4]> = reports
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                format!("{:.1}", r.aggregate.completion),
                pct(r.aggregate.grasp_success),
                pct(r.aggregate.action_efficiency),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: [&str; 4]| {
        let mut s = format!("{:<w$}", cells[0], w = widths[0]);
        for (c, w) in cells[1..].iter().zip(&widths[1..]) {
            let _ = write!(s, " | {c:>w$}");
        }
        s
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(out.len() - 1));
    out.push('\n');
    for row in &rows {
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
        out.push('\n');
    }
    let _ = writeln!(out, "{COMPLETION_RULE}");
    out
}
