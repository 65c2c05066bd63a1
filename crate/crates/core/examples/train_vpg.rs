//! Trains the push-grasp learner for a few hundred steps and tests it on a packed row.
//!
//! `cargo run --release --example train_vpg -- [steps]`

use pushgrasp::agent::{run_test, AgentConfig, EnvConfig};
use pushgrasp::eval::{adversarial_suite, train_policy, PolicyKind};

fn main() -> pushgrasp::Result<()> {
    let steps = std::env::args().nth(1).map_or(300, |s| s.parse().expect("step count"));
    let env = EnvConfig::default();
    let config = AgentConfig {
        k: 8,
        ..AgentConfig::default()
    };
    let (policy, log) = train_policy(PolicyKind::Vpg, &env, &config, steps, 0)?;
    for row in log.rows.iter().filter(|r| (r.step + 1) % 50 == 0) {
        println!(
            "step {:>5}  epsilon {:.3}  grasp success {:.3}  push-then-grasp {:.3}",
            row.step + 1,
            row.epsilon,
            row.grasp_rate_200,
            row.push_then_grasp_rate
        );
    }
    let row = adversarial_suite()
        .into_iter()
        .find(|s| s.name == "packed_row_3")
        .expect("shipped");
    let episode = run_test(&policy, &row.scene, env.resolution)?;
    println!(
        "packed_row_3: completed {} in {} actions, {} of {} grasps succeeded",
        episode.completed, episode.actions, episode.grasp_successes, episode.grasp_attempts
    );
    Ok(())
}
