use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{penetration, Penetration, Pose2, Shape, Vec2};

use super::{Scene, StepOutcome};

/// Pusher travel per resolution substep, meters.
pub const PUSH_SUBSTEP: f64 = 0.002;
/// Resolution sweeps allowed per substep before the push stalls.
pub const RESOLVE_ITERATIONS: usize = 25;
/// Residual penetration accepted as resolved.
const RESOLVE_TOL: f64 = 1e-9;
/// Scales lever-arm torque into rotation.
const ROTATION_GAIN: f64 = 0.5;
/// Rotation cap per object per substep, radians.
const MAX_SUBSTEP_ROTATION: f64 = 0.2;

/// Straight push of a closed-gripper fingertip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushCommand {
    pub start: Vec2,
    pub direction_index: usize,
    /// Number of discrete directions.
    pub k: usize,
    pub push_length: f64,
    pub pusher_radius: f64,
}

impl PushCommand {
    pub fn new(start: Vec2, direction_index: usize, k: usize) -> Self {
        Self {
            start,
            direction_index,
            k,
            push_length: 0.10,
            pusher_radius: 0.01,
        }
    }

    pub fn angle(&self) -> f64 {
        self.direction_index as f64 * 2.0 * PI / self.k as f64
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.angle())
    }
}

struct World<'a> {
    shapes: Vec<&'a Shape>,
    poses: Vec<Pose2>,
    pusher: Shape,
    pusher_radius: f64,
}

impl World<'_> {
    fn centroid(&self, i: usize) -> Vec2 {
        self.poses[i].transform_point(self.shapes[i].centroid())
    }

    /// One pusher position: push objects out of the pusher and chain
    /// displacements outward. Returns false if penetrations persist.
    fn resolve(&mut self, pusher_at: Vec2, contact: &mut bool) -> bool {
        let n = self.poses.len();
        let pusher_pose = Pose2::new(pusher_at.x, pusher_at.y, 0.0);
        // distance from the pusher in the contact graph; lower levels push higher ones
        let mut level: Vec<Option<u32>> = vec![None; n];
        let mut rotated = vec![0.0f64; n];

        for _ in 0..RESOLVE_ITERATIONS {
            let mut moved = false;
            for i in 0..n {
                let Some(p) = penetration(&self.pusher, &pusher_pose, self.shapes[i], &self.poses[i]) else {
                    continue;
                };
                if p.depth <= RESOLVE_TOL {
                    continue;
                }
                *contact = true;
                moved = true;
                level[i] = Some(0);
                let tip = pusher_at + p.direction * self.pusher_radius;
                self.shove(i, p, Some(tip), &mut rotated[i]);
            }
            if !moved && level.iter().all(Option::is_none) {
                return true;
            }
            for i in 0..n {
                for j in i + 1..n {
                    let Some(p) = penetration(self.shapes[i], &self.poses[i], self.shapes[j], &self.poses[j]) else {
                        continue;
                    };
                    if p.depth <= RESOLVE_TOL {
                        continue;
                    }
                    moved = true;
                    let li = level[i].unwrap_or(u32::MAX);
                    let lj = level[j].unwrap_or(u32::MAX);
                    if li < lj {
                        level[j] = Some(li + 1);
                        self.shove(j, p, None, &mut rotated[j]);
                    } else if lj < li {
                        level[i] = Some(lj + 1);
                        let back = Penetration {
                            depth: p.depth,
                            direction: -p.direction,
                        };
                        self.shove(i, back, None, &mut rotated[i]);
                    } else {
                        let half = p.depth / 2.0;
                        self.poses[j] = self.poses[j].translated(p.direction * half);
                        self.poses[i] = self.poses[i].translated(p.direction * -half);
                    }
                }
            }
            if !moved {
                return true;
            }
        }
        self.max_depth(&pusher_pose) <= RESOLVE_TOL
    }

    /// Translate object `i` by the penetration vector; a pusher contact off the
    /// centroid line also turns it.
    fn shove(&mut self, i: usize, p: Penetration, contact_point: Option<Vec2>, rotated: &mut f64) {
        let displacement = p.direction * p.depth;
        self.poses[i] = self.poses[i].translated(displacement);
        if let Some(c) = contact_point {
            let centroid = self.centroid(i);
            let lever = c - centroid;
            let gyration = self.shapes[i].gyration_sq();
            let raw = ROTATION_GAIN * lever.cross(displacement) / gyration;
            let allowed = (MAX_SUBSTEP_ROTATION - rotated.abs()).max(0.0);
            let turn = raw.clamp(-allowed, allowed);
            if turn != 0.0 {
                *rotated += turn;
                self.poses[i] = self.poses[i].rotated_about(centroid, turn);
            }
        }
    }

    fn max_depth(&self, pusher_pose: &Pose2) -> f64 {
        let n = self.poses.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            if let Some(p) = penetration(&self.pusher, pusher_pose, self.shapes[i], &self.poses[i]) {
                worst = worst.max(p.depth);
            }
            for j in i + 1..n {
                if let Some(p) = penetration(self.shapes[i], &self.poses[i], self.shapes[j], &self.poses[j]) {
                    worst = worst.max(p.depth);
                }
            }
        }
        worst
    }
}

/// Sweeps the pusher disc along the command and resolves contacts quasi-statically.
///
/// If a substep cannot be resolved within [`RESOLVE_ITERATIONS`] sweeps the
/// push stalls and the scene keeps the last resolved configuration. Objects
/// whose centroid ends up off the table are expelled.
pub fn step_push(scene: &Scene, cmd: &PushCommand) -> Result<StepOutcome> {
    if !scene.contains(cmd.start) {
        return Err(Error::PointOutOfBounds {
            x: cmd.start.x,
            y: cmd.start.y,
        });
    }
    if !(cmd.push_length > 0.0 && cmd.pusher_radius > 0.0 && cmd.k > 0) {
        return Err(Error::Config(
            "push length, pusher radius and k must be positive".into(),
        ));
    }
    let mut world = World {
        shapes: scene.objects.iter().map(|o| &o.spec.shape).collect(),
        poses: scene.objects.iter().map(|o| o.pose).collect(),
        pusher: Shape::disc(cmd.pusher_radius)?,
        pusher_radius: cmd.pusher_radius,
    };
    let dir = cmd.direction();
    let substeps = (cmd.push_length / PUSH_SUBSTEP).ceil().max(1.0) as usize;
    let mut contact = false;
    for s in 0..=substeps {
        let at = cmd.start + dir * (cmd.push_length * s as f64 / substeps as f64);
        let checkpoint = world.poses.clone();
        if !world.resolve(at, &mut contact) {
            world.poses = checkpoint;
            break;
        }
    }

    if !contact {
        return Ok(StepOutcome {
            scene_after: scene.clone(),
            grasp_success: false,
            objects_removed: 0,
            objects_expelled: 0,
            contact_made: false,
        });
    }

    let mut after = scene.clone();
    after.objects.clear();
    let mut expelled = 0;
    for (obj, pose) in scene.objects.iter().zip(world.poses) {
        let mut moved = obj.clone();
        moved.pose = Pose2::new(pose.x, pose.y, pose.theta);
        if after.contains(moved.world_centroid()) {
            after.objects.push(moved);
        } else {
            expelled += 1;
        }
    }
    Ok(StepOutcome {
        scene_after: after,
        grasp_success: false,
        objects_removed: 0,
        objects_expelled: expelled,
        contact_made: true,
    })
}
