//! Renders a shipped scenario and writes its rotation stack as graymaps.
//!
//! `cargo run --example heightmaps -- [out_dir]`

use std::fs;
use std::path::PathBuf;

use pushgrasp::percept::*;
use pushgrasp::sim::load_scenario;

fn main() -> pushgrasp::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "heightmaps".into()));
    fs::create_dir_all(&out)?;
    let text = include_str!("../scenarios/l_cluster.txt");
    let map = render_heightmap(&load_scenario(text)?, 128)?;
    let covered = map.height.iter().filter(|&&h| h > 0.0).count();
    println!(
        "{} of {} pixels covered, pitch {:.4} m",
        covered,
        map.height.len(),
        map.pixel_size
    );

    fs::write(out.join("color.ppm"), color_to_ppm(&map))?;
    let stack = build_rotation_stack(&map, 8);
    for (r, m) in stack.maps.iter().enumerate() {
        fs::write(out.join(format!("height_r{r}.pgm")), height_to_pgm(m, 0.05))?;
    }
    println!("wrote {} files to {}", stack.maps.len() + 1, out.display());
    Ok(())
}
