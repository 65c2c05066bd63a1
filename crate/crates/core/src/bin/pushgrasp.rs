use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pushgrasp::cli::{self, RunConfig};
use pushgrasp::eval::format_table;
use pushgrasp::sim::{load_scenario, save_scenario};

#[derive(Parser)]
#[command(name = "pushgrasp", version, about = "Push-grasp Q-learning on a tabletop simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set gamma=0.2 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self, extra: &[(&str, Option<String>)]) -> pushgrasp::Result<RunConfig> {
        let file = self.config.as_ref().map(std::fs::read_to_string).transpose()?;
        let mut overrides = self
            .set
            .iter()
            .map(|s| cli::parse_override(s))
            .collect::<pushgrasp::Result<Vec<_>>>()?;
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("output_dir", self.out.as_ref().map(|p| p.display().to_string())),
            ("workers", self.workers.map(|v| v.to_string())),
        ];
        for (k, v) in flags.into_iter().chain(extra.iter().map(|(k, v)| (*k, v.clone()))) {
            if let Some(v) = v {
                overrides.push((k.to_string(), v));
            }
        }
        RunConfig::resolve(file.as_deref(), &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy variant; writes log, learning curve and checkpoints.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Benchmark trained checkpoints on a scenario suite.
    Bench {
        #[command(flatten)]
        config: ConfigArgs,
        /// Checkpoints to compare (repeatable).
        #[arg(long, required = true)]
        checkpoint: Vec<PathBuf>,
        /// adversarial, sanity, random or a directory of scenario files.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Export heightmap and per-rotation Q heat images.
    Render {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply one primitive to a scenario.
    Play {
        #[arg(long)]
        scenario: PathBuf,
        /// primitive,rotation,row,col
        #[arg(long)]
        action: String,
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        /// Write the resulting scenario here.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Write random scenario files.
    Gen {
        #[arg(long)]
        objects: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> pushgrasp::Result<()> {
    match cli.command {
        Command::Train { config, variant, steps } => {
            let cfg = config.resolve(&[("variant", variant), ("steps", steps.map(|s| s.to_string()))])?;
            print!("{}", cfg.to_text());
            let s = cli::cmd_train(&cfg)?;
            println!(
                "trained {} steps: grasp success (last 200) {:.3}, push-then-grasp {:.3}",
                s.steps, s.final_grasp_rate, s.final_push_then_grasp_rate
            );
            for p in &s.checkpoints {
                println!("checkpoint {}", p.display());
            }
        }
        Command::Bench {
            config,
            checkpoint,
            suite,
            runs,
        } => {
            let cfg = config.resolve(&[("suite", suite), ("bench_runs", runs.map(|r| r.to_string()))])?;
            let reports = cli::cmd_bench(&cfg, &checkpoint)?;
            print!("{}", format_table(&reports));
        }
        Command::Render {
            checkpoint,
            scenario,
            out,
        } => {
            let files = cli::cmd_render(&checkpoint, &scenario, &out)?;
            println!("wrote {} files to {}", files.len(), out.display());
        }
        Command::Play {
            scenario,
            action,
            k,
            resolution,
            save,
        } => {
            let text = std::fs::read_to_string(&scenario)?;
            let before = load_scenario(&text)?.object_count();
            let a = cli::parse_action_spec(&action)?;
            let outcome = cli::cmd_play(&text, &a, k, resolution)?;
            print!("{}", cli::describe_outcome(before, &outcome));
            if let Some(path) = save {
                std::fs::write(path, save_scenario(&outcome.scene_after))?;
            }
        }
        Command::Gen {
            objects,
            count,
            seed,
            out,
        } => {
            let files = cli::cmd_gen(&Default::default(), objects, count, seed, &out)?;
            println!("wrote {} scenarios to {}", files.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
