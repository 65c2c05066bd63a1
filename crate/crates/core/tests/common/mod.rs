//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use pushgrasp::geometry::{Shape, Vec2};
use pushgrasp::sim::{GraspCommand, PlacedObject, Scene};

// ---------------------------------------------------------------------------
// point membership and ray casts, written against raw vertices

/// Outline of an object in world coordinates; discs stay analytic.
#[derive(Debug, Clone)]
pub enum Outline {
    Disc { center: Vec2, radius: f64 },
    Poly(Vec<Vec2>),
}

pub fn outline(obj: &PlacedObject) -> Outline {
    match &obj.spec.shape {
        Shape::Disc { radius } => Outline::Disc {
            center: obj.pose.translation(),
            radius: *radius,
        },
        other => Outline::Poly(other.world_vertices(&obj.pose)),
    }
}

impl Outline {
    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Outline::Disc { center, radius } => (p - *center).norm() <= *radius,
            Outline::Poly(v) => (0..v.len()).all(|i| {
                let a = v[i];
                let b = v[(i + 1) % v.len()];
                (b - a).cross(p - a) >= 0.0
            }),
        }
    }

    /// Points along the boundary no further than `step` apart.
    pub fn boundary(&self, step: f64) -> Vec<Vec2> {
        match self {
            Outline::Disc { center, radius } => {
                let n = ((2.0 * PI * radius) / step).ceil() as usize;
                (0..n)
                    .map(|i| *center + Vec2::from_angle(2.0 * PI * i as f64 / n as f64) * *radius)
                    .collect()
            }
            Outline::Poly(v) => {
                let mut out = Vec::new();
                for i in 0..v.len() {
                    let a = v[i];
                    let b = v[(i + 1) % v.len()];
                    let n = ((b - a).norm() / step).ceil().max(1.0) as usize;
                    out.extend((0..n).map(|j| a + (b - a) * (j as f64 / n as f64)));
                }
                out
            }
        }
    }

    /// Distance along `dir` (unit) from `p` to the first point of the shape,
    /// `Some(0)` if `p` is inside, `None` if the ray misses.
    pub fn ray_entry(&self, p: Vec2, dir: Vec2) -> Option<f64> {
        match self {
            Outline::Disc { center, radius } => {
                let m = p - *center;
                let b = m.dot(dir);
                let c = m.dot(m) - radius * radius;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let disc = b * b - c;
                if disc < 0.0 || b > 0.0 {
                    return None;
                }
                Some(-b - disc.sqrt())
            }
            Outline::Poly(v) => {
                // Cyrus-Beck against each edge's inward half-plane
                let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
                for i in 0..v.len() {
                    let a = v[i];
                    let e = v[(i + 1) % v.len()] - a;
                    let num = e.cross(p - a);
                    let den = e.cross(dir);
                    if den == 0.0 {
                        if num < 0.0 {
                            return None;
                        }
                    } else {
                        let t = -num / den;
                        if den > 0.0 {
                            t0 = t0.max(t);
                        } else {
                            t1 = t1.min(t);
                        }
                    }
                }
                (t0 <= t1).then_some(t0)
            }
        }
    }
}

/// Smallest translation of `a` along `dir` that makes it touch `b`, sampled
/// from both boundaries at spacing `step`.
pub fn directional_gap(a: &Outline, b: &Outline, dir: Vec2, step: f64) -> f64 {
    let forward = a.boundary(step).into_iter().filter_map(|p| b.ray_entry(p, dir));
    let backward = b.boundary(step).into_iter().filter_map(|p| a.ray_entry(p, dir * -1.0));
    forward.chain(backward).fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// grasp oracle

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTolerance {
    /// Geometric quantities closer than this to a threshold are undecided.
    pub margin: f64,
    /// Sampling pitch.
    pub step: f64,
    /// Cosine band around the friction cone treated as undecided.
    pub cos_margin: f64,
}

impl Default for OracleTolerance {
    fn default() -> Self {
        Self {
            margin: 0.002,
            step: 0.00025,
            cos_margin: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Success, removing the object at this index.
    Success(usize),
    Failure(&'static str),
    Undecided(&'static str),
}

/// Per-line extent of one object inside the jaw strip.
struct StripProfile {
    /// `(lo, hi)` along the closing axis for each sampled line, if hit.
    lines: Vec<Option<(f64, f64)>>,
}

/// Largest/smallest `u` at which the line is inside, refined by bisection.
fn line_extent(o: &Outline, center: Vec2, axis: Vec2, perp: Vec2, v: f64, reach: f64, step: f64) -> Option<(f64, f64)> {
    let at = |u: f64| center + axis * u + perp * v;
    let n = (2.0 * reach / step).ceil() as usize;
    let us: Vec<f64> = (0..=n).map(|i| -reach + 2.0 * reach * i as f64 / n as f64).collect();
    let first = us.iter().position(|&u| o.contains(at(u)))?;
    let last = us.iter().rposition(|&u| o.contains(at(u)))?;
    let refine = |mut inside: f64, mut outside: f64| {
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if o.contains(at(mid)) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = if first == 0 {
        us[0]
    } else {
        refine(us[first], us[first - 1])
    };
    let hi = if last == n {
        us[n]
    } else {
        refine(us[last], us[last + 1])
    };
    Some((lo, hi))
}

/// Contact cosine at one end of the squeezed interval; `None` if a kink sits
/// too close to the strip edge to tell which face is in contact.
fn contact_cos(profile: &StripProfile, pick: impl Fn((f64, f64)) -> f64, sign: f64, pitch: f64) -> Option<f64> {
    const TIE: f64 = 1e-7;
    let vals: Vec<Option<f64>> = profile.lines.iter().map(|l| l.map(&pick)).collect();
    let n = vals.len() - 1;
    // extreme in the "outward" sense: smallest lo (sign -1) or largest hi (sign +1)
    let score = |x: f64| sign * x;
    let interior = vals[1..n]
        .iter()
        .flatten()
        .map(|&x| score(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let edges: Vec<(usize, f64)> = [0, n].iter().filter_map(|&i| vals[i].map(|x| (i, score(x)))).collect();
    let edge_best = edges.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    if interior >= edge_best - TIE {
        // an interior support point, or a face flush across the strip
        return Some(1.0);
    }
    let mut best: Option<f64> = None;
    for &(i, s) in &edges {
        if s < edge_best - TIE {
            continue;
        }
        let inward: [usize; 3] = if i == 0 { [0, 1, 2] } else { [n, n - 1, n - 2] };
        let v: Vec<f64> = inward.iter().map(|&j| vals[j]).collect::<Option<Vec<_>>>()?;
        let s1 = (v[1] - v[0]) / pitch;
        let s2 = (v[2] - v[1]) / pitch;
        if (s1 - s2).abs() > 0.05 * (1.0 + s1.abs()) {
            return None;
        }
        // secant slopes extrapolated back to the edge
        let slope = s1 - 0.5 * (s2 - s1);
        let c = 1.0 / (1.0 + slope * slope).sqrt();
        best = Some(best.map_or(c, |b: f64| b.max(c)));
    }
    best
}

/// Decides a grasp by dense sampling, independent of the simulator's
/// clipping and separating-axis code.
pub fn oracle_grasp(scene: &Scene, cmd: &GraspCommand, tol: &OracleTolerance) -> Verdict {
    let outlines: Vec<Outline> = scene.objects.iter().map(outline).collect();
    let theta = cmd.angle_index as f64 * 2.0 * PI / cmd.k as f64;
    let axis = Vec2::from_angle(theta);
    let perp = Vec2::new(-axis.y, axis.x);
    let inner = cmd.max_opening / 2.0;
    let half_w = cmd.jaw_width / 2.0;

    // jaws, sampled shrunk and grown by the margin
    let jaw_hits = |grow: f64| {
        [-1.0, 1.0].iter().any(|&side| {
            let c = cmd.center + axis * (side * (inner + cmd.jaw_thickness / 2.0));
            let hu = cmd.jaw_thickness / 2.0 + grow;
            let hv = half_w + grow;
            if hu <= 0.0 || hv <= 0.0 {
                return false;
            }
            let nu = (2.0 * hu / tol.step).ceil() as usize;
            let nv = (2.0 * hv / tol.step).ceil() as usize;
            (0..=nu).any(|i| {
                (0..=nv).any(|j| {
                    let p = c
                        + axis * (-hu + 2.0 * hu * i as f64 / nu as f64)
                        + perp * (-hv + 2.0 * hv * j as f64 / nv as f64);
                    outlines.iter().any(|o| o.contains(p))
                })
            })
        })
    };
    if jaw_hits(-tol.margin) {
        return Verdict::Failure("jaw collision");
    }
    if jaw_hits(tol.margin) {
        return Verdict::Undecided("jaw near an object");
    }

    // strip profiles
    let nlines = (cmd.jaw_width / tol.step).round() as usize;
    let pitch = cmd.jaw_width / nlines as f64;
    let reach = inner + cmd.jaw_thickness + tol.margin;
    let profiles: Vec<StripProfile> = outlines
        .iter()
        .map(|o| StripProfile {
            lines: (0..=nlines)
                .map(|j| line_extent(o, cmd.center, axis, perp, -half_w + pitch * j as f64, reach, tol.step))
                .collect(),
        })
        .collect();
    let extents: Vec<Option<(f64, f64)>> = profiles
        .iter()
        .map(|p| {
            let lo = p.lines.iter().flatten().map(|l| l.0).fold(f64::INFINITY, f64::min);
            let hi = p.lines.iter().flatten().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
            lo.is_finite().then_some((lo, hi))
        })
        .collect();
    let between: Vec<(usize, f64, f64)> = extents
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|(lo, hi)| (i, lo, hi)))
        .collect();
    if between.is_empty() {
        return Verdict::Failure("nothing between the jaws");
    }
    let mut by_lo = between.clone();
    by_lo.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut by_hi = between.clone();
    by_hi.sort_by(|a, b| b.2.total_cmp(&a.2));
    let first = by_lo[0];
    let last = by_hi[0];
    if by_lo.len() > 1 && (by_lo[1].1 - first.1) < tol.margin {
        return Verdict::Undecided("two objects meet the first jaw together");
    }
    if by_hi.len() > 1 && (last.2 - by_hi[1].2) < tol.margin {
        return Verdict::Undecided("two objects meet the second jaw together");
    }
    if first.0 != last.0 {
        return Verdict::Failure("jaws meet different objects");
    }
    let target = first.0;
    let closure = first.2 - first.1;
    if (closure - cmd.min_closure).abs() < tol.margin || (closure - cmd.max_opening).abs() < tol.margin {
        return Verdict::Undecided("closure near a limit");
    }
    if closure < cmd.min_closure || closure > cmd.max_opening {
        return Verdict::Failure("closure out of range");
    }

    // contact normals against the friction cone
    let cone = 1.0 / (1.0 + cmd.friction * cmd.friction).sqrt();
    let prof = &profiles[target];
    let (Some(c_lo), Some(c_hi)) = (
        contact_cos(prof, |l| l.0, -1.0, pitch),
        contact_cos(prof, |l| l.1, 1.0, pitch),
    ) else {
        return Verdict::Undecided("kink at the strip edge");
    };
    if (c_lo - cone).abs() < tol.cos_margin || (c_hi - cone).abs() < tol.cos_margin {
        return Verdict::Undecided("contact normal near the cone");
    }
    if c_lo > cone && c_hi > cone {
        return Verdict::Success(target);
    }

    // outside the cone: held only if the object is free to seat
    let gap = (0..16)
        .map(|d| {
            let dir = Vec2::from_angle(d as f64 * 2.0 * PI / 16.0);
            outlines
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != target)
                .map(|(_, o)| directional_gap(&outlines[target], o, dir, tol.step))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    if (gap - cmd.seat_clearance).abs() < tol.margin {
        return Verdict::Undecided("neighbour near the seating clearance");
    }
    if gap < cmd.seat_clearance {
        Verdict::Failure("jammed outside the friction cone")
    } else {
        Verdict::Success(target)
    }
}
