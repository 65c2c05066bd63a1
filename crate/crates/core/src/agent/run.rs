use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::percept::{detect_change, render_heightmap};
use crate::sim::Scene;

use super::policy::Transition;
use super::{compute_reward, select_action, Action, Learner, Primitive, ValidMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub action: Action,
    pub reward: f64,
    pub grasp_success: bool,
    pub changed: bool,
    pub objects_left: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    /// Every initial object was removed by a successful grasp.
    pub completed: bool,
    pub actions: usize,
    pub grasp_attempts: usize,
    pub grasp_successes: usize,
    pub objects_initial: usize,
    pub objects_expelled: usize,
    pub trace: Vec<TraceEntry>,
}

/// One greedy test episode on a copy of `learner`, updated after every
/// action at the test learning rate. The caller's learner is untouched.
///
/// Ends when the table is empty, after `no_change_limit + 1` consecutive
/// actions that change nothing, or at `max_test_actions`.
pub fn run_test<L: Learner>(learner: &L, scene: &Scene, resolution: usize) -> Result<EpisodeResult> {
    let mut l = learner.clone();
    l.set_learning_rate(l.test_learning_rate());
    let k = l.k();
    let rc = l.reward_config(resolution);
    let mut scene = scene.clone();
    let mut map = Arc::new(render_heightmap(&scene, resolution)?);
    let mask = ValidMask::for_map(&map, k);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut result = EpisodeResult {
        completed: false,
        actions: 0,
        grasp_attempts: 0,
        grasp_successes: 0,
        objects_initial: scene.object_count(),
        objects_expelled: 0,
        trace: Vec::new(),
    };
    let mut pending: Option<Transition> = None;
    let mut no_change = 0;
    let mut grasped = 0;
    while !scene.is_cleared() && result.actions < l.max_test_actions() {
        let q = l.predict(&map)?;
        if let Some(mut t) = pending.take() {
            t.target = l.target(&t, &q)?;
            l.train(&t)?;
        }
        let action = select_action(&q, 0.0, &mut rng, &mask)?;
        let outcome = action.execute(&scene, &map, k)?;
        let after = Arc::new(render_heightmap(&outcome.scene_after, resolution)?);
        let reward = compute_reward(&action, &outcome, &map, &after, &rc)?;
        let changed = outcome.grasp_success || detect_change(&map, &after, rc.tau)?;

        result.actions += 1;
        if action.primitive == Primitive::Grasp {
            result.grasp_attempts += 1;
            if outcome.grasp_success {
                result.grasp_successes += 1;
                grasped += outcome.objects_removed;
            }
        }
        result.objects_expelled += outcome.objects_expelled;
        result.trace.push(TraceEntry {
            action,
            reward,
            grasp_success: outcome.grasp_success,
            changed,
            objects_left: outcome.scene_after.object_count(),
        });
        no_change = if changed { 0 } else { no_change + 1 };
        pending = Some(Transition {
            state_before: map.clone(),
            action,
            reward,
            state_after: after.clone(),
            grasp_success: outcome.grasp_success,
            change_detected: changed,
            terminal: outcome.scene_after.is_cleared(),
            target: 0.0,
            td_error: 0.0,
            step_index: result.actions - 1,
        });
        scene = outcome.scene_after;
        map = after;
        if no_change > l.no_change_limit() {
            break;
        }
    }
    result.completed = grasped == result.objects_initial;
    Ok(result)
}
