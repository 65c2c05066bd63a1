use crate::geometry::{Shape, Vec2};

use super::ObjectSpec;

pub const PALETTE_SIZE: usize = 9;

const RGB: [[u8; 3]; PALETTE_SIZE] = [
    [78, 121, 167],  // blue
    [89, 161, 79],   // green
    [156, 117, 95],  // brown
    [242, 142, 43],  // orange
    [237, 201, 72],  // yellow
    [186, 176, 172], // gray
    [255, 87, 89],   // red
    [176, 122, 161], // purple
    [118, 183, 178], // cyan
];

/// Palette color in `[0, 1]`; out-of-range ids map to black.
pub fn palette_rgb(color_id: usize) -> [f64; 3] {
    RGB.get(color_id)
        .map(|c| c.map(|v| f64::from(v) / 255.0))
        .unwrap_or([0.0; 3])
}

fn spec(name: &str, shape: Shape, height: f64, color_id: usize) -> ObjectSpec {
    ObjectSpec::new(name, shape, height, color_id).expect("built-in palette entries are valid")
}

/// The nine toy blocks used for training and random tests.
pub fn block_palette() -> Vec<ObjectSpec> {
    vec![
        spec("cube", Shape::rectangle(0.035, 0.035).unwrap(), 0.035, 0),
        spec("brick", Shape::rectangle(0.03, 0.06).unwrap(), 0.03, 1),
        spec("bar", Shape::rectangle(0.025, 0.08).unwrap(), 0.025, 2),
        spec("cylinder", Shape::disc(0.0175).unwrap(), 0.04, 3),
        spec("triangle", Shape::regular(3, 0.025).unwrap(), 0.03, 4),
        spec("hexagon", Shape::regular(6, 0.02).unwrap(), 0.03, 5),
        spec("pentagon", Shape::regular(5, 0.022).unwrap(), 0.03, 6),
        spec("slab", Shape::rectangle(0.05, 0.025).unwrap(), 0.02, 7),
        spec("disc", Shape::disc(0.025).unwrap(), 0.025, 8),
    ]
}

/// Shapes never seen during training, for generalization checks.
pub fn holdout_palette() -> Vec<ObjectSpec> {
    vec![
        spec("octagon", Shape::regular(8, 0.022).unwrap(), 0.03, 0),
        spec(
            "wedge",
            Shape::polygon(vec![
                Vec2::new(-0.025, -0.015),
                Vec2::new(0.025, -0.015),
                Vec2::new(0.0, 0.02),
            ])
            .unwrap(),
            0.025,
            3,
        ),
        spec("plank", Shape::rectangle(0.02, 0.065).unwrap(), 0.02, 6),
        spec(
            "kite",
            Shape::polygon(vec![
                Vec2::new(0.0, -0.03),
                Vec2::new(0.015, 0.0),
                Vec2::new(0.0, 0.015),
                Vec2::new(-0.015, 0.0),
            ])
            .unwrap(),
            0.03,
            8,
        ),
    ]
}
