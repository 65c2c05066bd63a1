//! Shows how rank-based prioritized replay favours large TD errors.

use std::sync::Arc;

use pushgrasp::agent::{rank_probabilities, Action, Primitive, ReplayBuffer, Transition};
use pushgrasp::percept::{HeightMap, Pixel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pushgrasp::Result<()> {
    let map = Arc::new(HeightMap::blank(16, 0.448));
    let mut buffer = ReplayBuffer::new(1.0);
    for (i, td) in [0.05, 0.9, 0.3, 0.01, 0.5].into_iter().enumerate() {
        buffer.push(Transition {
            state_before: map.clone(),
            action: Action {
                primitive: Primitive::Grasp,
                rotation: 0,
                pixel: Pixel::new(i, i),
            },
            reward: 0.0,
            state_after: map.clone(),
            grasp_success: false,
            change_detected: false,
            terminal: false,
            target: 0.0,
            td_error: td,
            step_index: i,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let draws = 50_000;
    let mut counts = vec![0usize; buffer.len()];
    for _ in 0..draws {
        counts[buffer.sample(&mut rng)?] += 1;
    }
    let probs = rank_probabilities(buffer.len(), 1.0);
    for (rank, &i) in buffer.ranked().iter().enumerate() {
        let t = buffer.get(i).expect("index");
        println!(
            "rank {} |td| {:.2}: drawn {:.3}, expected {:.3}",
            rank + 1,
            t.td_error,
            counts[i] as f64 / draws as f64,
            probs[rank]
        );
    }
    Ok(())
}
