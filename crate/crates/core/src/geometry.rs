//! Planar rigid-body geometry: poses, convex shapes and exact overlap queries.
//!
//! Point membership treats shapes as closed sets, overlap treats them as open
//! sets: two blocks that merely touch along an edge do not overlap.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Penetration depths at or below this are treated as touching.
pub const OVERLAP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from +x.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0).then(|| Vec2::new(self.x / n, self.y / n))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let wrapped = theta - two_pi * ((theta + PI) / two_pi).floor();
    // floor() rounding can land exactly on +pi
    if wrapped >= PI {
        wrapped - two_pi
    } else {
        wrapped
    }
}

/// Rigid planar transform: rotate by `theta`, then translate by `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Default for Pose2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub const fn identity() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let t = self.transform_point(other.translation());
        Pose2::new(t.x, t.y, self.theta + other.theta)
    }

    pub fn inverse(&self) -> Pose2 {
        let t = (-self.translation()).rotate(-self.theta);
        Pose2::new(t.x, t.y, -self.theta)
    }

    pub fn transform_point(&self, p: Vec2) -> Vec2 {
        p.rotate(self.theta) + self.translation()
    }

    pub fn inverse_transform_point(&self, p: Vec2) -> Vec2 {
        (p - self.translation()).rotate(-self.theta)
    }

    pub fn translated(&self, delta: Vec2) -> Pose2 {
        Pose2 {
            x: self.x + delta.x,
            y: self.y + delta.y,
            theta: self.theta,
        }
    }

    /// Rotates the whole frame by `angle` about the world point `pivot`.
    pub fn rotated_about(&self, pivot: Vec2, angle: f64) -> Pose2 {
        let t = pivot + (self.translation() - pivot).rotate(angle);
        Pose2::new(t.x, t.y, self.theta + angle)
    }
}

/// Free function form of [`Pose2::transform_point`].
pub fn transform_point(pose: &Pose2, point: Vec2) -> Vec2 {
    pose.transform_point(point)
}

/// Convex body-frame footprint of an object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Disc { radius: f64 },
    ConvexPolygon { vertices: Vec<Vec2> },
}

impl Shape {
    pub fn disc(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidShape(format!("disc radius {radius} must be > 0")));
        }
        Ok(Shape::Disc { radius })
    }

    /// Validates a counter-clockwise convex polygon.
    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidShape(format!("polygon needs >= 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::InvalidShape("non-finite vertex".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                if vertices[i] == vertices[j] {
                    return Err(Error::InvalidShape(format!("repeated vertex {i}/{j}")));
                }
            }
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) < 0.0 {
                return Err(Error::InvalidShape(format!(
                    "polygon not convex counter-clockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        let shape = Shape::ConvexPolygon { vertices };
        if shape.area() <= 0.0 {
            return Err(Error::InvalidShape("polygon has zero area".into()));
        }
        Ok(shape)
    }

    /// Axis-aligned rectangle centred on the body origin.
    pub fn rectangle(width: f64, depth: f64) -> Result<Self> {
        let (hw, hd) = (width / 2.0, depth / 2.0);
        Shape::polygon(vec![
            Vec2::new(-hw, -hd),
            Vec2::new(hw, -hd),
            Vec2::new(hw, hd),
            Vec2::new(-hw, hd),
        ])
    }

    /// Regular polygon with the given circumradius, first vertex on +x.
    pub fn regular(sides: usize, circumradius: f64) -> Result<Self> {
        let vertices = (0..sides)
            .map(|i| Vec2::from_angle(2.0 * PI * i as f64 / sides as f64) * circumradius)
            .collect();
        Shape::polygon(vertices)
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Disc { radius } => PI * radius * radius,
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum::<f64>()
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Shape::Disc { radius } => 2.0 * PI * radius,
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).sum()
            }
        }
    }

    /// Area centroid in the body frame.
    pub fn centroid(&self) -> Vec2 {
        match self {
            Shape::Disc { .. } => Vec2::ZERO,
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut c = Vec2::ZERO;
                let mut a2 = 0.0;
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    let w = p.cross(q);
                    a2 += w;
                    c = c + (p + q) * w;
                }
                c * (1.0 / (3.0 * a2))
            }
        }
    }

    /// Squared radius of gyration about the centroid (uniform density).
    pub fn gyration_sq(&self) -> f64 {
        match self {
            Shape::Disc { radius } => radius * radius / 2.0,
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut a2 = 0.0;
                let mut j_origin = 0.0;
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    let w = p.cross(q);
                    a2 += w;
                    j_origin += w * (p.dot(p) + p.dot(q) + q.dot(q));
                }
                let area = a2 / 2.0;
                let polar_origin = j_origin / 12.0;
                polar_origin / area - self.centroid().norm_sq()
            }
        }
    }

    /// Radius of the smallest origin-centred circle containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Disc { radius } => *radius,
            Shape::ConvexPolygon { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    pub fn world_vertices(&self, pose: &Pose2) -> Vec<Vec2> {
        match self {
            Shape::Disc { .. } => Vec::new(),
            Shape::ConvexPolygon { vertices } => vertices.iter().map(|v| pose.transform_point(*v)).collect(),
        }
    }

    /// Extent of the posed shape projected on a unit axis.
    pub fn project(&self, pose: &Pose2, axis: Vec2) -> (f64, f64) {
        match self {
            Shape::Disc { radius } => {
                let c = pose.translation().dot(axis);
                (c - radius, c + radius)
            }
            Shape::ConvexPolygon { .. } => project_points(&self.world_vertices(pose), axis),
        }
    }
}

pub(crate) fn project_points(points: &[Vec2], axis: Vec2) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.dot(axis);
        (lo.min(d), hi.max(d))
    })
}

/// Closed-set membership.
pub fn point_in_shape(shape: &Shape, pose: &Pose2, point: Vec2) -> bool {
    match shape {
        Shape::Disc { radius } => (point - pose.translation()).norm_sq() <= radius * radius,
        Shape::ConvexPolygon { vertices } => {
            let p = pose.inverse_transform_point(point);
            let n = vertices.len();
            (0..n).all(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                (b - a).cross(p - a) >= 0.0
            })
        }
    }
}

/// Minimum translation separating two posed shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penetration {
    pub depth: f64,
    /// Unit vector: moving `b` by `depth * direction` separates it from `a`.
    pub direction: Vec2,
}

/// True iff the interiors of the two posed shapes intersect.
pub fn shapes_overlap(a: &Shape, pa: &Pose2, b: &Shape, pb: &Pose2) -> bool {
    penetration(a, pa, b, pb).is_some()
}

/// Minimum translation of `b` that separates it from `a`; `None` when disjoint or touching.
pub fn penetration(a: &Shape, pa: &Pose2, b: &Shape, pb: &Pose2) -> Option<Penetration> {
    let reach = a.bounding_radius() + b.bounding_radius();
    if (pb.translation() - pa.translation()).norm_sq() >= reach * reach {
        return None;
    }
    match (a, b) {
        (Shape::Disc { radius: ra }, Shape::Disc { radius: rb }) => {
            let delta = pb.translation() - pa.translation();
            let dist = delta.norm();
            let depth = ra + rb - dist;
            (depth > OVERLAP_EPS).then(|| Penetration {
                depth,
                direction: delta.normalized().unwrap_or(Vec2::new(1.0, 0.0)),
            })
        }
        (Shape::ConvexPolygon { .. }, Shape::Disc { radius }) => {
            polygon_disc(&a.world_vertices(pa), pb.translation(), *radius)
        }
        (Shape::Disc { radius }, Shape::ConvexPolygon { .. }) => {
            polygon_disc(&b.world_vertices(pb), pa.translation(), *radius).map(|p| Penetration {
                depth: p.depth,
                direction: -p.direction,
            })
        }
        (Shape::ConvexPolygon { .. }, Shape::ConvexPolygon { .. }) => {
            polygon_polygon(&a.world_vertices(pa), &b.world_vertices(pb))
        }
    }
}

fn edge_normals(points: &[Vec2]) -> impl Iterator<Item = Vec2> + '_ {
    let n = points.len();
    (0..n).filter_map(move |i| {
        let e = points[(i + 1) % n] - points[i];
        // outward normal of a CCW edge
        Vec2::new(e.y, -e.x).normalized()
    })
}

fn polygon_polygon(a: &[Vec2], b: &[Vec2]) -> Option<Penetration> {
    let mut best: Option<Penetration> = None;
    for axis in edge_normals(a).chain(edge_normals(b)) {
        let (amin, amax) = project_points(a, axis);
        let (bmin, bmax) = project_points(b, axis);
        let forward = amax - bmin;
        let backward = bmax - amin;
        if forward <= OVERLAP_EPS || backward <= OVERLAP_EPS {
            return None;
        }
        let (depth, direction) = if forward <= backward {
            (forward, axis)
        } else {
            (backward, -axis)
        };
        if best.is_none_or(|p| depth < p.depth) {
            best = Some(Penetration { depth, direction });
        }
    }
    best
}

fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab * t
}

/// Penetration of a disc (as `b`) into a polygon (as `a`).
fn polygon_disc(poly: &[Vec2], center: Vec2, radius: f64) -> Option<Penetration> {
    let n = poly.len();
    let mut inside = true;
    let mut nearest_line = (f64::INFINITY, Vec2::ZERO);
    let mut nearest_point = (f64::INFINITY, Vec2::ZERO);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let e = b - a;
        let side = e.cross(center - a);
        if side < 0.0 {
            inside = false;
        }
        if let Some(normal) = Vec2::new(e.y, -e.x).normalized() {
            let line_dist = (center - a).dot(-normal);
            if line_dist < nearest_line.0 {
                nearest_line = (line_dist, normal);
            }
        }
        let q = closest_on_segment(center, a, b);
        let d = (center - q).norm();
        if d < nearest_point.0 {
            nearest_point = (d, q);
        }
    }
    if inside {
        let (line_dist, normal) = nearest_line;
        return Some(Penetration {
            depth: line_dist + radius,
            direction: normal,
        });
    }
    let (dist, q) = nearest_point;
    let depth = radius - dist;
    if depth <= OVERLAP_EPS {
        return None;
    }
    Some(Penetration {
        depth,
        direction: (center - q).normalized().unwrap_or(Vec2::new(1.0, 0.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn transform_point_examples() {
        let p = Vec2::new(1.0, 2.0);
        assert_eq!(transform_point(&Pose2::identity(), p), p);
        let q = transform_point(&Pose2::new(0.0, 0.0, PI / 2.0), Vec2::new(1.0, 0.0));
        assert!(close(q, Vec2::new(0.0, 1.0), 1e-12));
        let q = transform_point(&Pose2::new(1.0, 1.0, PI), Vec2::new(1.0, 0.0));
        assert!(close(q, Vec2::new(0.0, 1.0), 1e-12));
    }

    #[test]
    fn angle_wraps_to_half_open_interval() {
        assert_eq!(normalize_angle(PI), -PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(normalize_angle(0.25), 0.25);
        for k in -20..20 {
            let t = normalize_angle(0.1 * k as f64 * 7.3);
            assert!((-PI..PI).contains(&t));
        }
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let p = Pose2::new(0.3, -1.2, 2.5);
        let id = p.compose(&p.inverse());
        assert!(id.x.abs() < 1e-9 && id.y.abs() < 1e-9 && id.theta.abs() < 1e-9);
    }

    #[test]
    fn disc_examples() {
        let d = Shape::disc(0.5).unwrap();
        let far = Pose2::new(2.0, 0.0, 0.0);
        let near = Pose2::new(0.5, 0.0, 0.0);
        let o = Pose2::identity();
        assert!(!shapes_overlap(&d, &o, &d, &far));
        assert!(shapes_overlap(&d, &o, &d, &near));
        assert!(penetration(&d, &o, &d, &far).is_none());

        let p = penetration(&d, &o, &d, &Pose2::new(0.8, 0.0, 0.0)).unwrap();
        assert!((p.depth - 0.2).abs() < 1e-12);
        assert!(close(p.direction, Vec2::new(1.0, 0.0), 1e-12));

        assert!(point_in_shape(&d, &o, Vec2::new(0.4, 0.0)));
        assert!(!point_in_shape(&d, &o, Vec2::new(0.6, 0.0)));
    }

    #[test]
    fn touching_squares_do_not_overlap() {
        let s = Shape::rectangle(1.0, 1.0).unwrap();
        let a = Pose2::identity();
        let b = Pose2::new(1.0, 0.0, 0.0);
        assert!(!shapes_overlap(&s, &a, &s, &b));
        assert!(point_in_shape(&s, &a, Vec2::new(0.5, 0.0)));
        assert!(shapes_overlap(&s, &a, &s, &Pose2::new(0.999, 0.2, 0.0)));
    }

    #[test]
    fn rejects_invalid_shapes() {
        assert!(Shape::disc(0.0).is_err());
        assert!(Shape::disc(-1.0).is_err());
        assert!(Shape::polygon(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]).is_err());
        // clockwise
        assert!(Shape::polygon(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)]).is_err());
        // repeated vertex
        assert!(Shape::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0)
        ])
        .is_err());
        // concave dart
        assert!(Shape::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.3),
            Vec2::new(1.0, 2.0)
        ])
        .is_err());
    }

    #[test]
    fn polygon_mass_properties() {
        let r = Shape::rectangle(0.03, 0.08).unwrap();
        assert!((r.area() - 0.0024).abs() < 1e-15);
        assert!(r.centroid().norm() < 1e-15);
        let expect = (0.03f64.powi(2) + 0.08f64.powi(2)) / 12.0;
        assert!((r.gyration_sq() - expect).abs() < 1e-15);
    }

    #[test]
    fn disc_polygon_penetration_from_inside() {
        let sq = Shape::rectangle(1.0, 1.0).unwrap();
        let d = Shape::disc(0.1).unwrap();
        let p = penetration(&sq, &Pose2::identity(), &d, &Pose2::new(0.3, 0.0, 0.0)).unwrap();
        assert!((p.depth - 0.3).abs() < 1e-12);
        assert!(close(p.direction, Vec2::new(1.0, 0.0), 1e-12));
        let q = penetration(&d, &Pose2::new(0.3, 0.0, 0.0), &sq, &Pose2::identity()).unwrap();
        assert!(close(q.direction, Vec2::new(-1.0, 0.0), 1e-12));
    }
}
