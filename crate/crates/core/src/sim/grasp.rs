use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{shapes_overlap, Pose2, Shape, Vec2};

use super::{PlacedObject, Scene, StepOutcome};

/// Top-down parallel-jaw grasp.
///
/// The jaws close along `closing_axis()`. Before closing, their inner faces sit
/// at `±max_opening / 2` from `center`; each jaw is a `jaw_thickness` (along the
/// closing axis) by `jaw_width` (across it) rectangle.
///
/// A free object squeezed off-axis turns until its faces seat against the
/// jaws. A jammed object, one with a neighbour within `seat_clearance`,
/// cannot turn, so its squeeze holds only if each contact normal lies inside
/// the friction cone `atan(friction)` around the closing axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspCommand {
    pub center: Vec2,
    pub angle_index: usize,
    pub k: usize,
    pub max_opening: f64,
    pub min_closure: f64,
    pub jaw_width: f64,
    pub jaw_thickness: f64,
    pub friction: f64,
    pub seat_clearance: f64,
}

impl GraspCommand {
    pub fn new(center: Vec2, angle_index: usize, k: usize) -> Self {
        Self {
            center,
            angle_index,
            k,
            max_opening: 0.07,
            min_closure: 0.002,
            jaw_width: 0.02,
            jaw_thickness: 0.01,
            friction: 0.5,
            seat_clearance: 0.005,
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle_index as f64 * 2.0 * PI / self.k as f64
    }

    pub fn closing_axis(&self) -> Vec2 {
        Vec2::from_angle(self.angle())
    }

    /// Shape and pose of both open jaws (negative side first).
    pub fn jaws(&self) -> Result<[(Shape, Pose2); 2]> {
        let jaw = Shape::rectangle(self.jaw_thickness, self.jaw_width)?;
        let u = self.closing_axis();
        let offset = self.max_opening / 2.0 + self.jaw_thickness / 2.0;
        let place = |sign: f64| {
            let c = self.center + u * (sign * offset);
            Pose2::new(c.x, c.y, self.angle())
        };
        Ok([(jaw.clone(), place(-1.0)), (jaw, place(1.0))])
    }

    fn validate(&self) -> Result<()> {
        let ok = self.k > 0
            && self.min_closure > 0.0
            && self.max_opening > self.min_closure
            && self.jaw_width > 0.0
            && self.jaw_thickness > 0.0
            && self.friction >= 0.0
            && self.seat_clearance >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "grasp requires max_opening > min_closure > 0 and positive jaws".into(),
            ))
        }
    }
}

/// Clip a convex polygon to the half-plane `dot(p, normal) <= offset`.
fn clip(points: &[Vec2], normal: Vec2, offset: f64) -> Vec<Vec2> {
    let n = points.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let da = a.dot(normal) - offset;
        let db = b.dot(normal) - offset;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// The part of an object inside the jaws' strip, in closing-axis coordinates
/// relative to the grasp centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripInterval {
    pub lo: f64,
    pub hi: f64,
    /// Cosine between the surface normal at the `lo` contact and `-axis`.
    pub cos_lo: f64,
    /// Cosine between the surface normal at the `hi` contact and `+axis`.
    pub cos_hi: f64,
}

/// Normal cosine at a strip end that lies below the full support `full`:
/// the contact is where a strip edge crosses the object's boundary.
fn clipped_contact_cos(uv: &[Vec2], extreme: f64, full: f64, sign: f64, half_width: f64) -> f64 {
    const TOL: f64 = 1e-12;
    if sign * (full - extreme) <= TOL {
        return 1.0;
    }
    let n = uv.len();
    let mut best: f64 = -1.0;
    for c in [half_width, -half_width] {
        for i in 0..n {
            let (a, b) = (uv[i], uv[(i + 1) % n]);
            if (a.y - c) * (b.y - c) > 0.0 || a.y == b.y {
                continue;
            }
            let t = (c - a.y) / (b.y - a.y);
            let u = a.x + t * (b.x - a.x);
            if (u - extreme).abs() > 1e-9 {
                continue;
            }
            // outward normal of a counter-clockwise edge
            let d = b - a;
            let normal = Vec2::new(d.y, -d.x) * (1.0 / d.norm());
            best = best.max(sign * normal.x);
        }
    }
    best
}

/// Extent along the closing axis of the part of `obj` lying inside the jaws'
/// strip `|v| <= half_width`, with the contact normals at both ends.
pub fn grasp_strip_interval(obj: &PlacedObject, center: Vec2, axis: Vec2, half_width: f64) -> Option<StripInterval> {
    let v = axis.perp();
    match &obj.spec.shape {
        Shape::Disc { radius } => {
            let rel = obj.pose.translation() - center;
            let (uc, vc) = (rel.dot(axis), rel.dot(v));
            let excess = vc.abs() - half_width;
            let half_chord = if excess <= 0.0 {
                *radius
            } else if excess <= *radius {
                (radius * radius - excess * excess).sqrt()
            } else {
                return None;
            };
            let cos = if excess <= 0.0 { 1.0 } else { half_chord / radius };
            Some(StripInterval {
                lo: uc - half_chord,
                hi: uc + half_chord,
                cos_lo: cos,
                cos_hi: cos,
            })
        }
        Shape::ConvexPolygon { .. } => {
            let uv: Vec<Vec2> = obj
                .spec
                .shape
                .world_vertices(&obj.pose)
                .into_iter()
                .map(|p| {
                    let r = p - center;
                    Vec2::new(r.dot(axis), r.dot(v))
                })
                .collect();
            let clipped = clip(&uv, Vec2::new(0.0, 1.0), half_width);
            let clipped = clip(&clipped, Vec2::new(0.0, -1.0), half_width);
            if clipped.is_empty() {
                return None;
            }
            let (lo, hi) = crate::geometry::project_points(&clipped, Vec2::new(1.0, 0.0));
            let (full_lo, full_hi) = crate::geometry::project_points(&uv, Vec2::new(1.0, 0.0));
            Some(StripInterval {
                lo,
                hi,
                cos_lo: clipped_contact_cos(&uv, lo, full_lo, -1.0, half_width),
                cos_hi: clipped_contact_cos(&uv, hi, full_hi, 1.0, half_width),
            })
        }
    }
}

/// Directions probed by [`is_jammed`].
pub const JAM_DIRECTIONS: usize = 16;

/// True if shifting object `index` by `clearance` in any of
/// [`JAM_DIRECTIONS`] directions makes it overlap another object.
pub fn is_jammed(scene: &Scene, index: usize, clearance: f64) -> bool {
    let target = &scene.objects[index];
    (0..JAM_DIRECTIONS).any(|d| {
        let shift = Vec2::from_angle(d as f64 * 2.0 * PI / JAM_DIRECTIONS as f64) * clearance;
        let pose = target.pose.translated(shift);
        scene
            .objects
            .iter()
            .enumerate()
            .any(|(j, o)| j != index && shapes_overlap(&target.spec.shape, &pose, &o.spec.shape, &o.pose))
    })
}

/// Attempts a grasp; on success the squeezed object is removed.
///
/// Success needs (a) both open jaws collision free, (b) the first object
/// met by each closing jaw to be the same one, with its squeezed width in
/// `[min_closure, max_opening]`, and (c) both contacts inside the friction
/// cone unless the object is free to seat.
pub fn step_grasp(scene: &Scene, cmd: &GraspCommand) -> Result<StepOutcome> {
    if !scene.contains(cmd.center) {
        return Err(Error::PointOutOfBounds {
            x: cmd.center.x,
            y: cmd.center.y,
        });
    }
    cmd.validate()?;
    let failure = |contact: bool| StepOutcome {
        scene_after: scene.clone(),
        grasp_success: false,
        objects_removed: 0,
        objects_expelled: 0,
        contact_made: contact,
    };

    let jaws = cmd.jaws()?;
    let blocked = scene.objects.iter().any(|o| {
        jaws.iter()
            .any(|(shape, pose)| shapes_overlap(shape, pose, &o.spec.shape, &o.pose))
    });
    if blocked {
        return Ok(failure(true));
    }

    let axis = cmd.closing_axis();
    let inner = cmd.max_opening / 2.0;
    // everything between the open jaws
    let between: Vec<(usize, StripInterval)> = scene
        .objects
        .iter()
        .enumerate()
        .filter_map(|(i, o)| {
            let s = grasp_strip_interval(o, cmd.center, axis, cmd.jaw_width / 2.0)?;
            (s.hi >= -inner && s.lo <= inner).then_some((i, s))
        })
        .collect();
    let Some(&(left, first)) = between.iter().min_by(|a, b| a.1.lo.total_cmp(&b.1.lo)) else {
        return Ok(failure(false));
    };
    let &(right, _) = between
        .iter()
        .max_by(|a, b| a.1.hi.total_cmp(&b.1.hi))
        .expect("non-empty");
    let closure = first.hi - first.lo;
    if left != right || closure < cmd.min_closure || closure > cmd.max_opening {
        return Ok(failure(true));
    }
    let cone = 1.0 / (1.0 + cmd.friction * cmd.friction).sqrt();
    if (first.cos_lo < cone || first.cos_hi < cone) && is_jammed(scene, left, cmd.seat_clearance) {
        return Ok(failure(true));
    }

    let mut after = scene.clone();
    after.objects.remove(left);
    Ok(StepOutcome {
        scene_after: after,
        grasp_success: true,
        objects_removed: 1,
        objects_expelled: 0,
        contact_made: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ObjectSpec;

    fn block(name: &str, w: f64, d: f64, x: f64, y: f64) -> PlacedObject {
        PlacedObject {
            spec: ObjectSpec::new(name, Shape::rectangle(w, d).unwrap(), 0.03, 1).unwrap(),
            pose: Pose2::new(x, y, 0.0),
        }
    }

    fn scene(objects: Vec<PlacedObject>) -> Scene {
        Scene {
            workspace_side: 0.448,
            objects,
            seed: 0,
        }
    }

    #[test]
    fn isolated_narrow_block_is_grasped() {
        let s = scene(vec![
            block("a", 0.03, 0.03, 0.2, 0.2),
            block("b", 0.03, 0.03, 0.35, 0.35),
        ]);
        let out = step_grasp(&s, &GraspCommand::new(Vec2::new(0.2, 0.2), 0, 16)).unwrap();
        assert!(out.grasp_success);
        assert_eq!(out.objects_removed, 1);
        assert_eq!(out.scene_after.object_count(), 1);
        assert_eq!(out.scene_after.objects[0].spec.name, "b");
    }

    #[test]
    fn too_wide_block_fails() {
        let s = scene(vec![PlacedObject {
            spec: ObjectSpec::new("w", Shape::rectangle(0.10, 0.02).unwrap(), 0.03, 1).unwrap(),
            pose: Pose2::new(0.2, 0.2, 0.0),
        }]);
        let out = step_grasp(&s, &GraspCommand::new(Vec2::new(0.2, 0.2), 0, 16)).unwrap();
        assert!(!out.grasp_success);
        assert_eq!(out.scene_after, s);
    }

    #[test]
    fn packed_row_blocks_the_jaws() {
        // four 3cm x 8cm blocks side by side along x
        let s = scene(
            (0..4)
                .map(|i| block(&format!("r{i}"), 0.03, 0.08, 0.17 + 0.03 * i as f64, 0.2))
                .collect(),
        );
        for r in 0..16 {
            for obj in &s.objects {
                let c = obj.pose.translation();
                let out = step_grasp(&s, &GraspCommand::new(c, r, 16)).unwrap();
                assert!(!out.grasp_success, "grasp at {c:?} r={r} succeeded");
            }
        }
    }

    #[test]
    fn two_objects_between_jaws_fail() {
        let s = scene(vec![
            block("a", 0.01, 0.02, 0.19, 0.2),
            block("b", 0.01, 0.02, 0.21, 0.2),
        ]);
        let out = step_grasp(&s, &GraspCommand::new(Vec2::new(0.2, 0.2), 0, 16)).unwrap();
        assert!(!out.grasp_success);
    }

    #[test]
    fn corner_pinch_seats_only_when_free() {
        // 45 degree squeeze across one corner only
        let corner = Vec2::new(0.2 - 0.012, 0.2 - 0.027);
        let free = scene(vec![block("c", 0.035, 0.035, 0.2, 0.2)]);
        assert!(
            step_grasp(&free, &GraspCommand::new(corner, 7, 8))
                .unwrap()
                .grasp_success
        );

        let jammed = scene(vec![
            block("c", 0.035, 0.035, 0.2, 0.2),
            block("n", 0.035, 0.035, 0.236, 0.2),
        ]);
        assert!(is_jammed(&jammed, 0, 0.005));
        let out = step_grasp(&jammed, &GraspCommand::new(corner, 7, 8)).unwrap();
        assert!(!out.grasp_success);
        let frictionless = GraspCommand {
            friction: 10.0,
            ..GraspCommand::new(corner, 7, 8)
        };
        assert!(step_grasp(&jammed, &frictionless).unwrap().grasp_success);
        // through the middle the jaw lands on the neighbour
        let out = step_grasp(&jammed, &GraspCommand::new(Vec2::new(0.2, 0.2), 7, 8)).unwrap();
        assert!(!out.grasp_success);
    }

    #[test]
    fn empty_air_grasp_fails_without_contact() {
        let s = scene(vec![]);
        let out = step_grasp(&s, &GraspCommand::new(Vec2::new(0.2, 0.2), 3, 16)).unwrap();
        assert!(!out.grasp_success);
        assert!(!out.contact_made);
    }

    #[test]
    fn disc_grazing_the_strip() {
        let obj = PlacedObject {
            spec: ObjectSpec::new("d", Shape::disc(0.02).unwrap(), 0.03, 0).unwrap(),
            pose: Pose2::new(0.0, 0.025, 0.0),
        };
        let s = grasp_strip_interval(&obj, Vec2::ZERO, Vec2::new(1.0, 0.0), 0.01).unwrap();
        let h = (0.02f64.powi(2) - 0.015f64.powi(2)).sqrt();
        assert!((s.lo + h).abs() < 1e-15 && (s.hi - h).abs() < 1e-15);
        assert!((s.cos_hi - h / 0.02).abs() < 1e-15);
        assert!(grasp_strip_interval(&obj, Vec2::ZERO, Vec2::new(1.0, 0.0), 0.004).is_none());
    }
}
