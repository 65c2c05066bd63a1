//! Saves a freshly built policy, reloads it and confirms identical predictions.

use pushgrasp::agent::{predict_q, AgentConfig, Policy};
use pushgrasp::net::{fingerprint, load_checkpoint, save_checkpoint};
use pushgrasp::percept::{render_heightmap, DepthStats};
use pushgrasp::sim::{block_palette, spawn_random, DropRegion};

fn main() -> pushgrasp::Result<()> {
    let config = AgentConfig {
        k: 4,
        ..AgentConfig::default()
    };
    let policy = Policy::new(config, DepthStats::default(), 11)?;
    let path = std::env::temp_dir().join("pushgrasp_example_policy.json");
    save_checkpoint(&path, &policy)?;
    let restored: Policy = load_checkpoint(&path)?;
    println!(
        "fingerprints match: {}",
        fingerprint(&policy)? == fingerprint(&restored)?
    );

    let scene = spawn_random(4, &block_palette(), DropRegion::default(), 1)?;
    let map = render_heightmap(&scene, 32)?;
    let same = predict_q(&policy, &map, false)? == predict_q(&restored, &map, false)?;
    println!("predictions match: {same}");
    std::fs::remove_file(path)?;
    Ok(())
}
