//! Lists the ablation variants and the one setting each changes.

use pushgrasp::agent::AgentConfig;
use pushgrasp::eval::ablation_matrix;

fn main() {
    let base = AgentConfig::default();
    for (kind, cfg) in ablation_matrix(&base) {
        let mut diff = Vec::new();
        if cfg.push_reward != base.push_reward {
            diff.push(format!("push_reward={}", cfg.push_reward));
        }
        if cfg.gamma != base.gamma {
            diff.push(format!("gamma={}", cfg.gamma));
        }
        if cfg.include_depth != base.include_depth {
            diff.push(format!(
                "include_depth={} ({} input channels)",
                cfg.include_depth,
                cfg.in_channels()
            ));
        }
        let what = if diff.is_empty() {
            "base".to_string()
        } else {
            diff.join(", ")
        };
        println!("{:<14} {what}", kind.as_str());
    }
}
