//! Trains the learner and the grasping-only baseline, then compares them on
//! the shipped packed arrangements.
//!
//! `cargo run --release --example benchmark -- [steps] [runs]`

use pushgrasp::agent::{AgentConfig, EnvConfig};
use pushgrasp::eval::{
    adversarial_suite, benchmark_seeds, format_table, run_benchmark, train_policy, PolicyKind, COMPLETION_RULE,
};

fn main() -> pushgrasp::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps = args.next().map_or(500, |s| s.parse().expect("step count"));
    let runs = args.next().map_or(3, |s| s.parse().expect("run count"));
    let env = EnvConfig::default();
    let config = AgentConfig {
        k: 8,
        ..AgentConfig::default()
    };
    let suite = adversarial_suite();
    let seeds = benchmark_seeds(runs, 0);
    let mut reports = Vec::new();
    for kind in [PolicyKind::Vpg, PolicyKind::GraspingOnly] {
        let (policy, log) = train_policy(kind, &env, &config, steps, 0)?;
        println!(
            "{}: trained, final grasp success {:.3}",
            kind.as_str(),
            log.final_grasp_rate()
        );
        reports.push(run_benchmark(kind.as_str(), &policy, &suite, &seeds, env.resolution)?);
    }
    print!("{}", format_table(&reports));
    println!("{COMPLETION_RULE}");
    Ok(())
}
