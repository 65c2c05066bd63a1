//! Checks the network's backward pass against central differences.

use pushgrasp::net::{gradient_check, FcnConfig, FcnModel, GradCheckOptions, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pushgrasp::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = FcnModel::new(FcnConfig::compact(4), 1)?;
    let input = Tensor::from_vec(
        &[16, 16, 4],
        (0..16 * 16 * 4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )?;
    let opts = GradCheckOptions {
        max_per_tensor: Some(25),
        ..GradCheckOptions::default()
    };
    let report = gradient_check(&model, &input, (7, 9), 0.7, &opts)?;
    println!(
        "checked {} entries ({} skipped at relu kinks), max relative error {:.2e}",
        report.checked, report.skipped, report.max_rel_error
    );
    Ok(())
}
