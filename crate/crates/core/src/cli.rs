//! Command implementations behind the `pushgrasp` binary.
//!
//! Every command takes a [`RunConfig`], a flat `key=value` document. Values
//! resolve as command-line override, then config file, then default.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{
    select_action, Action, AgentConfig, EnvConfig, Learner, PaletteKind, Primitive, QMaps, Trainer, TrainingLog,
    ValidMask,
};
use crate::error::{Error, Result};
use crate::eval::{
    adversarial_suite, benchmark_seeds, format_table, init_policy, load_suite_dir, random_suite, run_benchmark,
    sanity_suite, BenchmarkReport, PolicyKind, SavedPolicy, Scenario,
};
use crate::net::{load_checkpoint, save_checkpoint};
use crate::percept::{color_to_ppm, height_to_pgm, render_heightmap, rgb_to_ppm, Pixel};
use crate::sim::{load_scenario, save_scenario, StepOutcome};

/// Every recognised key with its meaning, in echo order.
pub const KEYS: &[(&str, &str)] = &[
    (
        "seed",
        "master seed for depth statistics, weights and the training loop",
    ),
    (
        "output_dir",
        "directory receiving logs, checkpoints, reports and the config echo",
    ),
    (
        "variant",
        "vpg | vpg-noreward | vpg-myopic | vpg-nodepth | grasping-only | pg-reactive",
    ),
    ("steps", "training actions"),
    ("checkpoint_every", "steps between checkpoints, 0 for final only"),
    ("resolution", "heightmap side in pixels"),
    ("num_objects", "objects per random scene"),
    ("palette", "blocks | holdout"),
    ("workspace_side", "table side in metres"),
    (
        "drop_margin",
        "keep-out band at the table edge when dropping objects, metres",
    ),
    ("k", "rotations of the heightmap"),
    ("gamma", "discount factor"),
    ("epsilon_start", "exploration rate at step 0"),
    ("epsilon_final", "exploration rate after annealing"),
    ("epsilon_anneal_steps", "steps of linear annealing"),
    ("learning_rate", "training learning rate"),
    ("test_learning_rate", "learning rate for updates during test runs"),
    ("momentum", "SGD momentum"),
    ("weight_decay", "L2 weight decay"),
    ("replay_alpha", "rank-replay exponent"),
    ("push_reward", "reward pushes that change the scene"),
    ("include_depth", "feed the height channel to the networks"),
    ("target_lag", "gradient steps between target-network refreshes"),
    ("double_q", "choose the bootstrap action with the online network"),
    ("tau", "change threshold in metres, or auto for the resolution default"),
    (
        "no_change_limit",
        "consecutive unchanged actions tolerated before a reset",
    ),
    ("max_test_actions", "action budget of one test run"),
    ("bench_runs", "test runs per scenario"),
    ("bench_seed", "seed of the benchmark episode seeds"),
    (
        "suite",
        "adversarial | sanity | random | path to a directory of scenario files",
    ),
    ("random_scenes", "scenes in the random suite"),
    ("workers", "worker threads; 1 keeps runs single-threaded"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub variant: PolicyKind,
    pub steps: usize,
    pub checkpoint_every: usize,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub bench_runs: usize,
    pub bench_seed: u64,
    pub suite: String,
    pub random_scenes: usize,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("runs/default"),
            variant: PolicyKind::Vpg,
            steps: 2500,
            checkpoint_every: 500,
            env: EnvConfig::default(),
            agent: AgentConfig::default(),
            bench_runs: 10,
            bench_seed: 0,
            suite: "adversarial".into(),
            random_scenes: 10,
            workers: 1,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn palette_name(p: PaletteKind) -> &'static str {
    match p {
        PaletteKind::Blocks => "blocks",
        PaletteKind::Holdout => "holdout",
    }
}

impl RunConfig {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "variant" => self.variant = v.parse()?,
            "steps" => self.steps = parse(key, v)?,
            "checkpoint_every" => self.checkpoint_every = parse(key, v)?,
            "resolution" => self.env.resolution = parse(key, v)?,
            "num_objects" => self.env.num_objects = parse(key, v)?,
            "palette" => {
                self.env.palette = match v {
                    "blocks" => PaletteKind::Blocks,
                    "holdout" => PaletteKind::Holdout,
                    _ => return Err(Error::Config(format!("palette: unknown {v:?}"))),
                }
            }
            "workspace_side" => self.env.workspace_side = parse(key, v)?,
            "drop_margin" => self.env.drop_margin = parse(key, v)?,
            "k" => self.agent.k = parse(key, v)?,
            "gamma" => self.agent.gamma = parse(key, v)?,
            "epsilon_start" => self.agent.epsilon_start = parse(key, v)?,
            "epsilon_final" => self.agent.epsilon_final = parse(key, v)?,
            "epsilon_anneal_steps" => self.agent.epsilon_anneal_steps = parse(key, v)?,
            "learning_rate" => self.agent.learning_rate = parse(key, v)?,
            "test_learning_rate" => self.agent.test_learning_rate = parse(key, v)?,
            "momentum" => self.agent.momentum = parse(key, v)?,
            "weight_decay" => self.agent.weight_decay = parse(key, v)?,
            "replay_alpha" => self.agent.replay_alpha = parse(key, v)?,
            "push_reward" => self.agent.push_reward = parse(key, v)?,
            "include_depth" => self.agent.include_depth = parse(key, v)?,
            "target_lag" => self.agent.target_lag = parse(key, v)?,
            "double_q" => self.agent.double_q = parse(key, v)?,
            "tau" => self.agent.tau = if v == "auto" { None } else { Some(parse(key, v)?) },
            "no_change_limit" => self.agent.no_change_limit = parse(key, v)?,
            "max_test_actions" => self.agent.max_test_actions = parse(key, v)?,
            "bench_runs" => self.bench_runs = parse(key, v)?,
            "bench_seed" => self.bench_seed = parse(key, v)?,
            "suite" => self.suite = v.to_string(),
            "random_scenes" => self.random_scenes = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Text value of one key, as written in the echo.
    pub fn get(&self, key: &str) -> Result<String> {
        let a = &self.agent;
        Ok(match key {
            "seed" => self.seed.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            "variant" => self.variant.to_string(),
            "steps" => self.steps.to_string(),
            "checkpoint_every" => self.checkpoint_every.to_string(),
            "resolution" => self.env.resolution.to_string(),
            "num_objects" => self.env.num_objects.to_string(),
            "palette" => palette_name(self.env.palette).to_string(),
            "workspace_side" => self.env.workspace_side.to_string(),
            "drop_margin" => self.env.drop_margin.to_string(),
            "k" => a.k.to_string(),
            "gamma" => a.gamma.to_string(),
            "epsilon_start" => a.epsilon_start.to_string(),
            "epsilon_final" => a.epsilon_final.to_string(),
            "epsilon_anneal_steps" => a.epsilon_anneal_steps.to_string(),
            "learning_rate" => a.learning_rate.to_string(),
            "test_learning_rate" => a.test_learning_rate.to_string(),
            "momentum" => a.momentum.to_string(),
            "weight_decay" => a.weight_decay.to_string(),
            "replay_alpha" => a.replay_alpha.to_string(),
            "push_reward" => a.push_reward.to_string(),
            "include_depth" => a.include_depth.to_string(),
            "target_lag" => a.target_lag.to_string(),
            "double_q" => a.double_q.to_string(),
            "tau" => a.tau.map_or_else(|| "auto".to_string(), |t| t.to_string()),
            "no_change_limit" => a.no_change_limit.to_string(),
            "max_test_actions" => a.max_test_actions.to_string(),
            "bench_runs" => self.bench_runs.to_string(),
            "bench_seed" => self.bench_seed.to_string(),
            "suite" => self.suite.clone(),
            "random_scenes" => self.random_scenes.to_string(),
            "workers" => self.workers.to_string(),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        })
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Defaults, then `file`, then `overrides`; the variant's knob is applied last.
    pub fn resolve(file: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut c = Self::default();
        if let Some(text) = file {
            c.apply_text(text)?;
        }
        for (k, v) in overrides {
            c.set(k, v)?;
        }
        c.agent = c.variant.agent_config(&c.agent);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.agent.validate()?;
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if self.env.resolution < crate::percept::MIN_RESOLUTION {
            return Err(Error::Config(format!(
                "resolution below {}",
                crate::percept::MIN_RESOLUTION
            )));
        }
        Ok(())
    }

    /// The full resolved document, one documented key per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, doc) in KEYS {
            let _ = writeln!(out, "# {doc}");
            let _ = writeln!(out, "{key}={}", self.get(key).expect("listed key"));
        }
        out
    }

    /// Writes the echo as `config.txt` in the output directory.
    pub fn echo(&self) -> Result<PathBuf> {
        fs::create_dir_all(&self.output_dir)?;
        let path = self.output_dir.join("config.txt");
        fs::write(&path, self.to_text())?;
        Ok(path)
    }
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got {s:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Runs `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// Steps between learning-curve samples.
pub const CURVE_EVERY: usize = 25;

pub fn learning_curve_csv(log: &TrainingLog) -> String {
    let mut out = String::from("step,epsilon,grasp_rate_200,push_then_grasp_rate\n");
    for r in log.rows.iter().filter(|r| (r.step + 1) % CURVE_EVERY == 0) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.step + 1,
            r.epsilon,
            r.grasp_rate_200,
            r.push_then_grasp_rate
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub steps: usize,
    pub final_grasp_rate: f64,
    pub final_push_then_grasp_rate: f64,
    pub checkpoints: Vec<PathBuf>,
}

fn saved(cfg: &RunConfig, steps: usize, policy: &crate::eval::AnyPolicy) -> SavedPolicy {
    SavedPolicy {
        variant: cfg.variant,
        env: cfg.env.clone(),
        steps,
        policy: policy.clone(),
    }
}

/// Trains the configured variant, writing `config.txt`, `log.csv`,
/// `curve.csv`, periodic `checkpoints/step_NNNNNN.json` and `policy.json`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    cfg.echo()?;
    let ckpt_dir = cfg.output_dir.join("checkpoints");
    with_workers(cfg.workers, || {
        let (policy, loop_seed) = init_policy(cfg.variant, &cfg.env, &cfg.agent, cfg.seed)?;
        let mut trainer = Trainer::new(policy, cfg.env.clone(), loop_seed)?;
        let mut checkpoints = Vec::new();
        for s in 1..=cfg.steps {
            trainer.step()?;
            if cfg.checkpoint_every > 0 && s % cfg.checkpoint_every == 0 && s < cfg.steps {
                fs::create_dir_all(&ckpt_dir)?;
                let path = ckpt_dir.join(format!("step_{s:06}.json"));
                save_checkpoint(&path, &saved(cfg, s, trainer.learner()))?;
                checkpoints.push(path);
            }
        }
        let (policy, log) = trainer.finish()?;
        fs::write(cfg.output_dir.join("log.csv"), log.to_csv())?;
        fs::write(cfg.output_dir.join("curve.csv"), learning_curve_csv(&log))?;
        let path = cfg.output_dir.join("policy.json");
        save_checkpoint(&path, &saved(cfg, cfg.steps, &policy))?;
        checkpoints.push(path);
        Ok(TrainSummary {
            steps: cfg.steps,
            final_grasp_rate: log.final_grasp_rate(),
            final_push_then_grasp_rate: log.final_push_then_grasp_rate(),
            checkpoints,
        })
    })?
}

/// The suite named by `cfg.suite`, spawning random scenes in `env`.
pub fn resolve_suite(cfg: &RunConfig, env: &EnvConfig) -> Result<Vec<Scenario>> {
    let suite = match cfg.suite.as_str() {
        "adversarial" => adversarial_suite(),
        "sanity" => sanity_suite(),
        "random" => random_suite(env, cfg.random_scenes, cfg.bench_seed)?,
        dir => load_suite_dir(Path::new(dir))?,
    };
    if suite.is_empty() {
        return Err(Error::Config(format!("suite {:?} has no scenarios", cfg.suite)));
    }
    Ok(suite)
}

/// Benchmarks each checkpoint, writing `table.txt`, `summary.csv` and `runs.csv`.
pub fn cmd_bench(cfg: &RunConfig, checkpoints: &[PathBuf]) -> Result<Vec<BenchmarkReport>> {
    if checkpoints.is_empty() {
        return Err(Error::Config("bench needs at least one checkpoint".into()));
    }
    let policies = checkpoints
        .iter()
        .map(|p| load_checkpoint::<SavedPolicy>(p))
        .collect::<Result<Vec<_>>>()?;
    cfg.echo()?;
    let seeds = benchmark_seeds(cfg.bench_runs, cfg.bench_seed);
    let reports = with_workers(cfg.workers, || {
        policies
            .iter()
            .map(|s| {
                let suite = resolve_suite(cfg, &s.env)?;
                run_benchmark(s.variant.as_str(), &s.policy, &suite, &seeds, s.env.resolution)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut runs = String::new();
    let mut summary = String::new();
    for (i, r) in reports.iter().enumerate() {
        let skip = usize::from(i > 0);
        for line in r.runs_csv().lines().skip(skip) {
            runs.push_str(line);
            runs.push('\n');
        }
        for line in r.summary_csv().lines().skip(skip) {
            summary.push_str(line);
            summary.push('\n');
        }
    }
    fs::write(cfg.output_dir.join("runs.csv"), runs)?;
    fs::write(cfg.output_dir.join("summary.csv"), summary)?;
    fs::write(cfg.output_dir.join("table.txt"), format_table(&reports))?;
    Ok(reports)
}

/// Color stops of the heat ramp, low to high: navy, blue, cyan, yellow, red.
pub const HEAT_RAMP: [[u8; 3]; 5] = [[0, 0, 96], [0, 0, 255], [0, 255, 255], [255, 255, 0], [255, 0, 0]];

/// Ramp color of `t` in [0, 1].
pub fn heat_color(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (HEAT_RAMP.len() - 1) as f64;
    let i = (x.floor() as usize).min(HEAT_RAMP.len() - 2);
    let f = x - i as f64;
    let (a, b) = (HEAT_RAMP[i], HEAT_RAMP[i + 1]);
    std::array::from_fn(|c| (a[c] as f64 + f * (b[c] as f64 - a[c] as f64)).round() as u8)
}

/// Heights at or above this map to white in `height.pgm`.
pub const RENDER_MAX_HEIGHT: f64 = 0.1;

fn heat_image(n: usize, values: &[f64], lo: f64, hi: f64, mark: Option<Pixel>) -> Vec<u8> {
    let span = hi - lo;
    let mut rgb = Vec::with_capacity(n * n * 3);
    for v in values {
        let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
        rgb.extend_from_slice(&heat_color(t));
    }
    if let Some(p) = mark {
        let mut put = |r: isize, c: isize| {
            if (0..n as isize).contains(&r) && (0..n as isize).contains(&c) {
                let i = (r as usize * n + c as usize) * 3;
                rgb[i..i + 3].copy_from_slice(&[255, 255, 255]);
            }
        };
        let (r, c) = (p.row as isize, p.col as isize);
        for d in -2..=2 {
            put(r + d, c);
            put(r, c + d);
        }
    }
    rgb_to_ppm(n, &rgb)
}

/// Writes `rgb.ppm`, `height.pgm`, one heat image per rotation and primitive
/// (`push_rNN.ppm`, `grasp_rNN.ppm`) and `q_range.txt`, which records the
/// shared value range of the heat images and the greedy action (marked with
/// a white cross).
pub fn cmd_render(checkpoint: &Path, scenario: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let saved: SavedPolicy = load_checkpoint(checkpoint)?;
    let scene = load_scenario(&fs::read_to_string(scenario)?)?;
    let n = saved.env.resolution;
    let map = render_heightmap(&scene, n)?;
    let policy = &saved.policy;
    let q = policy.predict(&map)?;
    let k = q.k;
    let mask = ValidMask::for_map(&map, k);
    let best = select_action(&q, 0.0, &mut ChaCha8Rng::seed_from_u64(0), &mask)?;

    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut write = |name: String, bytes: Vec<u8>| -> Result<()> {
        let p = out_dir.join(name);
        fs::write(&p, bytes)?;
        written.push(p);
        Ok(())
    };
    write("rgb.ppm".into(), color_to_ppm(&map))?;
    write("height.pgm".into(), height_to_pgm(&map, RENDER_MAX_HEIGHT))?;

    let all = q.push.iter().flatten().chain(&q.grasp);
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let plane = n * n;
    for prim in [Primitive::Push, Primitive::Grasp] {
        let values = q.map(prim);
        for r in 0..k {
            let slice = values.map_or_else(|| vec![lo; plane], |m| m[r * plane..(r + 1) * plane].to_vec());
            let mark = (best.primitive == prim && best.rotation == r).then_some(best.pixel);
            write(format!("{prim}_r{r:02}.ppm"), heat_image(n, &slice, lo, hi, mark))?;
        }
    }
    let mut side = format!("q_min={lo}\nq_max={hi}\n");
    let _ = writeln!(
        side,
        "best={},{},{},{} value={}",
        best.primitive,
        best.rotation,
        best.pixel.row,
        best.pixel.col,
        q.get(&best).unwrap_or(f64::NAN)
    );
    if q.push.is_none() {
        side.push_str("push=none\n");
    }
    let p = out_dir.join("q_range.txt");
    fs::write(&p, side)?;
    written.push(p);
    Ok(written)
}

/// Parses `primitive,rotation,row,col`, e.g. `grasp,3,20,31`.
pub fn parse_action_spec(s: &str) -> Result<Action> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [prim, r, row, col] = parts[..] else {
        return Err(Error::Config(format!(
            "action spec {s:?}: expected primitive,rotation,row,col"
        )));
    };
    Ok(Action {
        primitive: prim.parse()?,
        rotation: parse("rotation", r)?,
        pixel: Pixel::new(parse("row", row)?, parse("col", col)?),
    })
}

/// Applies one primitive to a scenario rendered at `resolution` with `k` rotations.
pub fn cmd_play(scenario_text: &str, action: &Action, k: usize, resolution: usize) -> Result<StepOutcome> {
    let scene = load_scenario(scenario_text)?;
    let map = render_heightmap(&scene, resolution)?;
    action.execute(&scene, &map, k)
}

/// Human-readable summary of one step.
pub fn describe_outcome(before: usize, outcome: &StepOutcome) -> String {
    format!(
        "grasp_success={}\nobjects_removed={}\nobjects_expelled={}\ncontact_made={}\nobjects_before={}\nobjects_after={}\n",
        outcome.grasp_success,
        outcome.objects_removed,
        outcome.objects_expelled,
        outcome.contact_made,
        before,
        outcome.scene_after.object_count()
    )
}

/// Writes `count` random scenes of `n` objects as `scene_NNN.txt`.
pub fn cmd_gen(env: &EnvConfig, n: usize, count: usize, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let env = EnvConfig {
        num_objects: n,
        ..env.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if count > 0 {
        fs::create_dir_all(out_dir)?;
    }
    (0..count)
        .map(|i| {
            let path = out_dir.join(format!("scene_{i:03}.txt"));
            fs::write(&path, save_scenario(&env.spawn(rng.gen())?))?;
            Ok(path)
        })
        .collect()
}

/// Q maps of a loaded policy; exposed for tooling.
pub fn predict_saved(saved: &SavedPolicy, scene_text: &str) -> Result<QMaps> {
    let scene = load_scenario(scene_text)?;
    saved.policy.predict(&render_heightmap(&scene, saved.env.resolution)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::resolve(
            None,
            &[("variant".into(), "vpg-myopic".into()), ("k".into(), "8".into())],
        )
        .unwrap();
        assert!(c.to_text().contains("\ngamma=0.2\n"));
        let again = RunConfig::resolve(Some(&c.to_text()), &[]).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn precedence_and_unknown_keys() {
        let c = RunConfig::resolve(Some("steps=10\nseed=4"), &[("steps".into(), "3".into())]).unwrap();
        assert_eq!((c.steps, c.seed), (3, 4));
        assert!(RunConfig::resolve(Some("stepz=1"), &[]).is_err());
        assert!(RunConfig::resolve(None, &[("gamma".into(), "x".into())]).is_err());
        for (key, _) in KEYS {
            RunConfig::default().get(key).unwrap();
        }
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(heat_color(0.0), HEAT_RAMP[0]);
        assert_eq!(heat_color(1.0), HEAT_RAMP[4]);
        assert_eq!(heat_color(0.5), HEAT_RAMP[2]);
        assert_eq!(heat_color(f64::NAN), HEAT_RAMP[0]);
    }

    #[test]
    fn action_specs() {
        let a = parse_action_spec("grasp, 3, 10, 20").unwrap();
        assert_eq!(
            (a.primitive, a.rotation, a.pixel),
            (Primitive::Grasp, 3, Pixel::new(10, 20))
        );
        assert!(parse_action_spec("grasp,3,10").is_err());
        assert!(parse_action_spec("poke,0,0,0").is_err());
    }
}
