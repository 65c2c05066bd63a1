use std::sync::Arc;

use pushgrasp::agent::{Action, AgentConfig, Primitive, Transition};
use pushgrasp::baselines::*;
use pushgrasp::percept::{render_heightmap, DepthStats, Pixel};
use pushgrasp::sim::{block_palette, spawn_random, DropRegion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config() -> AgentConfig {
    AgentConfig {
        k: 4,
        ..AgentConfig::default()
    }
}

fn transition(primitive: Primitive, grasp_success: bool, change_detected: bool) -> Transition {
    let scene = spawn_random(3, &block_palette(), DropRegion::default(), 12).unwrap();
    let map = Arc::new(render_heightmap(&scene, 32).unwrap());
    Transition {
        state_before: map.clone(),
        action: Action {
            primitive,
            rotation: 3,
            pixel: Pixel::new(17, 6),
        },
        reward: 0.0,
        state_after: map,
        grasp_success,
        change_detected,
        terminal: false,
        target: 0.0,
        td_error: 0.0,
        step_index: 0,
    }
}

#[test]
fn labels_come_from_success_or_change() {
    assert_eq!(reactive_label(&transition(Primitive::Grasp, true, true)), 1.0);
    assert_eq!(reactive_label(&transition(Primitive::Grasp, false, true)), 0.0);
    assert_eq!(reactive_label(&transition(Primitive::Push, false, true)), 1.0);
    assert_eq!(reactive_label(&transition(Primitive::Push, true, false)), 0.0);
}

#[test]
fn repeated_steps_drive_cross_entropy_down() {
    for (primitive, label) in [
        (Primitive::Grasp, true),
        (Primitive::Grasp, false),
        (Primitive::Push, true),
    ] {
        let mut policy = ReactivePolicy::new(ReactiveVariant::PgReactive, config(), DepthStats::default(), 4).unwrap();
        let t = transition(primitive, label, label);
        let losses: Vec<f64> = (0..100)
            .map(|_| reactive_train_step(&mut policy, &t).unwrap().loss)
            .collect();
        for w in losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{primitive} {label}: {losses:?}");
        }
        assert!(losses[99] < 0.5 * losses[0], "{primitive} {label}: {losses:?}");
    }
}

#[test]
fn only_the_executed_network_learns() {
    let mut policy = ReactivePolicy::new(ReactiveVariant::PgReactive, config(), DepthStats::default(), 4).unwrap();
    let before = policy.clone();
    let r = reactive_train_step(&mut policy, &transition(Primitive::Push, false, true)).unwrap();
    assert_eq!(policy.grasp_net, before.grasp_net);
    assert_ne!(policy.push_net, before.push_net);
    let nonzero = r.output_grad.data().iter().filter(|&&g| g != 0.0).count();
    assert_eq!(nonzero, 1);
    assert_ne!(r.output_grad.data()[17 * 32 + 6], 0.0);
}

#[test]
fn affordances_are_probabilities_and_grasping_only_never_pushes() {
    let scene = spawn_random(4, &block_palette(), DropRegion::default(), 2).unwrap();
    let map = render_heightmap(&scene, 32).unwrap();
    let go = ReactivePolicy::new(ReactiveVariant::GraspingOnly, config(), DepthStats::default(), 1).unwrap();
    let maps = go.affordances(&map).unwrap();
    assert!(maps.push.is_none());
    assert!(maps.grasp.iter().all(|&v| v > 0.0 && v < 1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for eps in [0.0, 0.5, 1.0] {
        for _ in 0..50 {
            assert_eq!(
                reactive_select(&go, &map, eps, &mut rng).unwrap().primitive,
                Primitive::Grasp
            );
        }
    }
    let pg = ReactivePolicy::new(ReactiveVariant::PgReactive, config(), DepthStats::default(), 1).unwrap();
    let greedy = reactive_select(&pg, &map, 0.0, &mut rng).unwrap();
    let a = pg.affordances(&map).unwrap();
    assert_eq!(a.get(&greedy).unwrap(), a.max());
}

#[test]
fn push_grasp_baseline_explores_more() {
    let base = AgentConfig::default();
    let pg = reactive_config(ReactiveVariant::PgReactive, &base);
    assert!(pg.epsilon_start > base.epsilon_start && pg.epsilon_final > base.epsilon_final);
    assert_eq!(reactive_config(ReactiveVariant::GraspingOnly, &base), base);
}
