//! Deterministic 2.5D quasi-static tabletop world.
//!
//! Objects are extruded convex footprints resting on a square table
//! `[0, side] x [0, side]`. Pushes move a kinematic disc through the scene and
//! resolve penetrations substep by substep; grasps are an exact planar jaw
//! placement and antipodal squeeze test. Every operation is a pure function of
//! its inputs and returns a new [`Scene`].

mod grasp;
mod palette;
mod push;
mod scenario;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{penetration, shapes_overlap, Pose2, Shape, Vec2};

pub use grasp::{grasp_strip_interval, is_jammed, step_grasp, GraspCommand, StripInterval, JAM_DIRECTIONS};
pub use palette::{block_palette, holdout_palette, palette_rgb, PALETTE_SIZE};
pub use push::{step_push, PushCommand, PUSH_SUBSTEP, RESOLVE_ITERATIONS};
pub use scenario::{load_scenario, save_scenario, SCENARIO_MAGIC};

/// Default table side, meters.
pub const WORKSPACE_SIDE: f64 = 0.448;
/// Objects must fit in a circle of this radius about their body origin.
pub const MAX_OBJECT_RADIUS: f64 = 0.06;
/// Penetration tolerated by the no-overlap invariant, meters.
pub const OVERLAP_TOLERANCE: f64 = 1e-7;
/// Rejection-sampling budget per object in [`spawn_random`].
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    pub shape: Shape,
    /// Extrusion height, only used for the depth channel.
    pub height: f64,
    pub color_id: usize,
}

impl ObjectSpec {
    pub fn new(name: impl Into<String>, shape: Shape, height: f64, color_id: usize) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            shape,
            height,
            color_id,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidObject(format!("bad name {:?}", self.name)));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(Error::InvalidObject(format!("{}: height must be > 0", self.name)));
        }
        if self.color_id >= PALETTE_SIZE {
            return Err(Error::InvalidObject(format!(
                "{}: color_id {} outside palette",
                self.name, self.color_id
            )));
        }
        if self.shape.bounding_radius() > MAX_OBJECT_RADIUS {
            return Err(Error::InvalidObject(format!(
                "{}: footprint exceeds {MAX_OBJECT_RADIUS} m bounding radius",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedObject {
    pub spec: ObjectSpec,
    pub pose: Pose2,
}

impl PlacedObject {
    pub fn world_centroid(&self) -> Vec2 {
        self.pose.transform_point(self.spec.shape.centroid())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub workspace_side: f64,
    pub objects: Vec<PlacedObject>,
    pub seed: u64,
}

impl Scene {
    pub fn empty(workspace_side: f64) -> Self {
        Self {
            workspace_side,
            objects: Vec::new(),
            seed: 0,
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn is_cleared(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.workspace_side / 2.0, self.workspace_side / 2.0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (0.0..=self.workspace_side).contains(&p.x) && (0.0..=self.workspace_side).contains(&p.y)
    }

    /// Largest pairwise penetration depth (0 when nothing overlaps).
    pub fn max_penetration(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.objects.iter().enumerate() {
            for b in &self.objects[i + 1..] {
                if let Some(p) = penetration(&a.spec.shape, &a.pose, &b.spec.shape, &b.pose) {
                    worst = worst.max(p.depth);
                }
            }
        }
        worst
    }

    /// Checks the scene invariants: valid objects, no overlap beyond
    /// [`OVERLAP_TOLERANCE`], every centroid on the table.
    pub fn validate(&self) -> Result<()> {
        for (i, obj) in self.objects.iter().enumerate() {
            obj.spec.validate()?;
            if !self.contains(obj.world_centroid()) {
                return Err(Error::InvalidObject(format!(
                    "object {i} ({}) centroid outside the workspace",
                    obj.spec.name
                )));
            }
            for (j, other) in self.objects.iter().enumerate().skip(i + 1) {
                if let Some(p) = penetration(&obj.spec.shape, &obj.pose, &other.spec.shape, &other.pose) {
                    if p.depth > OVERLAP_TOLERANCE {
                        return Err(Error::InvalidObject(format!(
                            "objects {i} and {j} overlap by {:.3e} m",
                            p.depth
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The same arrangement rotated by `angle` about the table centre.
    pub fn rotated_about_center(&self, angle: f64) -> Scene {
        let c = self.center();
        let mut out = self.clone();
        for obj in &mut out.objects {
            obj.pose = obj.pose.rotated_about(c, angle);
        }
        out
    }
}

/// Result of one motion primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub scene_after: Scene,
    pub grasp_success: bool,
    pub objects_removed: usize,
    pub objects_expelled: usize,
    pub contact_made: bool,
}

/// Where [`spawn_random`] drops objects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropRegion {
    pub workspace_side: f64,
    /// Inset from each table edge of the square that object origins are drawn from.
    pub margin: f64,
}

impl Default for DropRegion {
    fn default() -> Self {
        Self {
            workspace_side: WORKSPACE_SIDE,
            margin: 0.1,
        }
    }
}

/// Drops `n` objects drawn from `palette` with uniformly random poses and colors.
///
/// Placement is rejection sampled; the result depends only on the arguments.
pub fn spawn_random(n: usize, palette: &[ObjectSpec], region: DropRegion, seed: u64) -> Result<Scene> {
    let mut scene = Scene {
        workspace_side: region.workspace_side,
        objects: Vec::with_capacity(n),
        seed,
    };
    if n == 0 {
        return Ok(scene);
    }
    if palette.is_empty() {
        return Err(Error::InvalidObject("empty palette".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for index in 0..n {
        let base = palette.choose(&mut rng).expect("non-empty palette");
        let mut spec = base.clone();
        spec.color_id = rng.gen_range(0..PALETTE_SIZE);
        spec.name = format!("{}_{index}", base.name);

        let lo = region.margin.max(spec.shape.bounding_radius());
        let hi = region.workspace_side - lo;
        if hi <= lo {
            return Err(Error::PlacementFailed { index, attempts: 0 });
        }
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let pose = Pose2::new(
                rng.gen_range(lo..hi),
                rng.gen_range(lo..hi),
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            );
            let clear = scene
                .objects
                .iter()
                .all(|o| !shapes_overlap(&o.spec.shape, &o.pose, &spec.shape, &pose));
            if clear {
                placed = Some(pose);
                break;
            }
        }
        let pose = placed.ok_or(Error::PlacementFailed {
            index,
            attempts: MAX_PLACEMENT_ATTEMPTS,
        })?;
        scene.objects.push(PlacedObject { spec, pose });
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spawn_zero_is_empty() {
        let s = spawn_random(0, &block_palette(), DropRegion::default(), 1).unwrap();
        assert_eq!(s.object_count(), 0);
        assert!(s.is_cleared());
    }

    #[test]
    fn spawn_is_deterministic() {
        let a = spawn_random(10, &block_palette(), DropRegion::default(), 42).unwrap();
        let b = spawn_random(10, &block_palette(), DropRegion::default(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.object_count(), 10);
        assert!(!a.is_cleared());
        let c = spawn_random(10, &block_palette(), DropRegion::default(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spawn_thirty_respects_invariants() {
        let region = DropRegion {
            margin: 0.0,
            ..DropRegion::default()
        };
        let s = spawn_random(30, &block_palette(), region, 5).unwrap();
        assert_eq!(s.object_count(), 30);
        for (i, a) in s.objects.iter().enumerate() {
            assert!(s.contains(a.world_centroid()));
            for b in &s.objects[i + 1..] {
                assert!(!shapes_overlap(&a.spec.shape, &a.pose, &b.spec.shape, &b.pose));
            }
        }
    }

    #[test]
    fn spawn_reports_placement_failure() {
        let big = ObjectSpec::new("big", Shape::disc(0.05).unwrap(), 0.03, 0).unwrap();
        let region = DropRegion {
            workspace_side: 0.2,
            margin: 0.0,
        };
        let err = spawn_random(50, &[big], region, 3).unwrap_err();
        assert!(matches!(err, Error::PlacementFailed { .. }));
    }

    #[test]
    fn object_spec_validation() {
        let disc = Shape::disc(0.02).unwrap();
        assert!(ObjectSpec::new("a", disc.clone(), 0.0, 0).is_err());
        assert!(ObjectSpec::new("a", disc.clone(), 0.02, PALETTE_SIZE).is_err());
        assert!(ObjectSpec::new("has space", disc.clone(), 0.02, 0).is_err());
        assert!(ObjectSpec::new("huge", Shape::disc(0.07).unwrap(), 0.02, 0).is_err());
    }
}
