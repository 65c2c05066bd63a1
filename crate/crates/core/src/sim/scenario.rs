//! Line-oriented scenario files.
//!
//! ```text
//! pushgrasp-scenario v1 workspace_side=0.448 seed=0
//! # name shape x y theta color_id height
//! left_block rect:0.03,0.08 0.17 0.2 0 1 0.03
//! peg disc:0.0175 0.3 0.3 0 3 0.04
//! wedge poly:-0.02,-0.01;0.02,-0.01;0,0.02 0.1 0.1 1.5707963267948966 4 0.025
//! ```
//!
//! `rect:` is accepted on input and written back as the equivalent `poly:`.
//! Numbers are written in shortest round-trip form, so `load(save(s)) == s`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Pose2, Shape, Vec2};

use super::{ObjectSpec, PlacedObject, Scene};

pub const SCENARIO_MAGIC: &str = "pushgrasp-scenario";
const VERSION: &str = "v1";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ScenarioParse {
        line,
        message: message.into(),
    }
}

fn num(line: usize, field: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| parse_err(line, format!("{field}: cannot parse {text:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{field}: non-finite value")));
    }
    Ok(v)
}

fn parse_shape(line: usize, text: &str) -> Result<Shape> {
    let (kind, params) = text
        .split_once(':')
        .ok_or_else(|| parse_err(line, format!("shape {text:?} lacks kind prefix")))?;
    let shape = match kind {
        "disc" => Shape::disc(num(line, "radius", params)?),
        "rect" => {
            let (w, d) = params
                .split_once(',')
                .ok_or_else(|| parse_err(line, "rect needs width,depth"))?;
            Shape::rectangle(num(line, "width", w)?, num(line, "depth", d)?)
        }
        "poly" => {
            let vertices = params
                .split(';')
                .map(|pair| {
                    let (x, y) = pair
                        .split_once(',')
                        .ok_or_else(|| parse_err(line, format!("vertex {pair:?} needs x,y")))?;
                    Ok(Vec2::new(num(line, "vertex x", x)?, num(line, "vertex y", y)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Shape::polygon(vertices)
        }
        other => return Err(parse_err(line, format!("unknown shape kind {other:?}"))),
    };
    shape.map_err(|e| parse_err(line, e.to_string()))
}

fn format_shape(shape: &Shape) -> String {
    match shape {
        Shape::Disc { radius } => format!("disc:{radius}"),
        Shape::ConvexPolygon { vertices } => {
            let pts: Vec<String> = vertices.iter().map(|v| format!("{},{}", v.x, v.y)).collect();
            format!("poly:{}", pts.join(";"))
        }
    }
}

fn parse_header(text: &str) -> Result<(f64, u64)> {
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some(SCENARIO_MAGIC) {
        return Err(parse_err(1, format!("missing {SCENARIO_MAGIC:?} header")));
    }
    match tokens.next() {
        Some(VERSION) => {}
        other => return Err(parse_err(1, format!("unsupported version {other:?}"))),
    }
    let mut side = None;
    let mut seed = 0;
    for tok in tokens {
        match tok.split_once('=') {
            Some(("workspace_side", v)) => side = Some(num(1, "workspace_side", v)?),
            Some(("seed", v)) => {
                seed = v.parse().map_err(|_| parse_err(1, format!("bad seed {v:?}")))?;
            }
            _ => return Err(parse_err(1, format!("unknown header field {tok:?}"))),
        }
    }
    let side = side.ok_or_else(|| parse_err(1, "header lacks workspace_side"))?;
    if side <= 0.0 {
        return Err(parse_err(1, "workspace_side must be > 0"));
    }
    Ok((side, seed))
}

/// Parses and validates a scenario.
pub fn load_scenario(text: &str) -> Result<Scene> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(1, "empty scenario"))?;
    if header.0 != 0 {
        return Err(parse_err(header.0 + 1, "header must be the first line"));
    }
    let (workspace_side, seed) = parse_header(header.1)?;
    let mut scene = Scene {
        workspace_side,
        objects: Vec::new(),
        seed,
    };
    for (idx, raw) in lines {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(parse_err(line, format!("expected 7 fields, found {}", fields.len())));
        }
        let shape = parse_shape(line, fields[1])?;
        let pose = Pose2::new(
            num(line, "x", fields[2])?,
            num(line, "y", fields[3])?,
            num(line, "theta", fields[4])?,
        );
        let color_id = fields[5]
            .parse()
            .map_err(|_| parse_err(line, format!("bad color_id {:?}", fields[5])))?;
        let height = num(line, "height", fields[6])?;
        let spec = ObjectSpec::new(fields[0], shape, height, color_id).map_err(|e| parse_err(line, e.to_string()))?;
        let obj = PlacedObject { spec, pose };
        if !scene.contains(obj.world_centroid()) {
            return Err(parse_err(line, "object centroid outside the workspace"));
        }
        for other in &scene.objects {
            if let Some(p) = crate::geometry::penetration(&other.spec.shape, &other.pose, &obj.spec.shape, &obj.pose) {
                if p.depth > super::OVERLAP_TOLERANCE {
                    return Err(parse_err(line, format!("overlaps {}", other.spec.name)));
                }
            }
        }
        scene.objects.push(obj);
    }
    Ok(scene)
}

pub fn save_scenario(scene: &Scene) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{SCENARIO_MAGIC} {VERSION} workspace_side={} seed={}",
        scene.workspace_side, scene.seed
    );
    out.push_str("# name shape x y theta color_id height\n");
    for obj in &scene.objects {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            obj.spec.name,
            format_shape(&obj.spec.shape),
            obj.pose.x,
            obj.pose.y,
            obj.pose.theta,
            obj.spec.color_id,
            obj.spec.height
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{block_palette, spawn_random, DropRegion};

    #[test]
    fn empty_body_loads_empty_scene() {
        let s = load_scenario("pushgrasp-scenario v1 workspace_side=0.448\n").unwrap();
        assert!(s.is_cleared());
        assert_eq!(s.workspace_side, 0.448);
    }

    #[test]
    fn random_scene_round_trips() {
        let s = spawn_random(10, &block_palette(), DropRegion::default(), 7).unwrap();
        let text = save_scenario(&s);
        assert_eq!(load_scenario(&text).unwrap(), s);
    }

    #[test]
    fn packed_row_loads() {
        let text = "pushgrasp-scenario v1 workspace_side=0.448 seed=3
# four bricks side by side
a rect:0.03,0.08 0.179 0.224 0 1 0.03
b rect:0.03,0.08 0.209 0.224 0 2 0.03  # touching a
c rect:0.03,0.08 0.239 0.224 0 3 0.03
d rect:0.03,0.08 0.269 0.224 0 4 0.03
";
        let s = load_scenario(text).unwrap();
        assert_eq!(s.object_count(), 4);
        assert!(s.max_penetration() <= 1e-7);
        assert_eq!(s.seed, 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "pushgrasp-scenario v1 workspace_side=0.448\n# ok\na disc:0.02 0.1 0.1 0 0\n";
        match load_scenario(bad) {
            Err(Error::ScenarioParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad = "pushgrasp-scenario v1 workspace_side=0.448\n\na blob:1 0.1 0.1 0 0 0.02\n";
        assert!(matches!(load_scenario(bad), Err(Error::ScenarioParse { line: 3, .. })));
        let overlapping = "pushgrasp-scenario v1 workspace_side=0.448
a disc:0.02 0.1 0.1 0 0 0.02
b disc:0.02 0.11 0.1 0 0 0.02
";
        assert!(matches!(
            load_scenario(overlapping),
            Err(Error::ScenarioParse { line: 3, .. })
        ));
        assert!(matches!(
            load_scenario("hello"),
            Err(Error::ScenarioParse { line: 1, .. })
        ));
        assert!(load_scenario("").is_err());
    }
}
