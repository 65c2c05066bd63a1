//! Orthographic RGB-D heightmaps and their rotation stacks.
//!
//! Pixel `(row, col)` covers the world square whose centre is
//! `((col + 0.5) * pixel_size, (row + 0.5) * pixel_size)`: columns follow +x,
//! rows follow +y, so image rotations and world rotations share a sign.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{point_in_shape, Vec2};
use crate::net::Tensor;
use crate::sim::{palette_rgb, Scene};

pub const MIN_RESOLUTION: usize = 16;
pub const DEFAULT_RESOLUTION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    pub resolution: usize,
    pub workspace_side: f64,
    pub pixel_size: f64,
    /// `H * W * 3`, values in `[0, 1]`.
    pub color: Vec<f64>,
    /// `H * W`, meters above the table.
    pub height: Vec<f64>,
}

impl HeightMap {
    pub fn blank(resolution: usize, workspace_side: f64) -> Self {
        Self {
            resolution,
            workspace_side,
            pixel_size: workspace_side / resolution as f64,
            color: vec![0.0; resolution * resolution * 3],
            height: vec![0.0; resolution * resolution],
        }
    }

    pub fn height_at(&self, p: Pixel) -> f64 {
        self.height[p.row * self.resolution + p.col]
    }

    pub fn color_at(&self, p: Pixel) -> [f64; 3] {
        let i = (p.row * self.resolution + p.col) * 3;
        [self.color[i], self.color[i + 1], self.color[i + 2]]
    }

    fn check(&self, p: Pixel) -> Result<()> {
        if p.row < self.resolution && p.col < self.resolution {
            Ok(())
        } else {
            Err(Error::PixelOutOfBounds {
                row: p.row as i64,
                col: p.col as i64,
                rows: self.resolution,
                cols: self.resolution,
            })
        }
    }

    /// World point at the centre of pixel `p`.
    pub fn pixel_to_world(&self, p: Pixel) -> Result<Vec2> {
        self.check(p)?;
        Ok(Vec2::new(
            (p.col as f64 + 0.5) * self.pixel_size,
            (p.row as f64 + 0.5) * self.pixel_size,
        ))
    }

    /// Pixel containing world point `q`.
    pub fn world_to_pixel(&self, q: Vec2) -> Result<Pixel> {
        let col = (q.x / self.pixel_size).floor();
        let row = (q.y / self.pixel_size).floor();
        let n = self.resolution as f64;
        if !(0.0..n).contains(&col) || !(0.0..n).contains(&row) {
            return Err(Error::PointOutOfBounds { x: q.x, y: q.y });
        }
        Ok(Pixel::new(row as usize, col as usize))
    }

    /// World point shown at pixel `p` of this map rotated by `angle`
    /// (see [`rotate_heightmap`]). Not bounds-checked against the table.
    pub fn rotated_pixel_to_world(&self, p: Pixel, angle: f64) -> Vec2 {
        let half = self.workspace_side / 2.0;
        let c = Vec2::new(half, half);
        let u = Vec2::new(
            (p.col as f64 + 0.5) * self.pixel_size,
            (p.row as f64 + 0.5) * self.pixel_size,
        );
        let (s, co) = angle_sin_cos_exact(angle);
        let d = u - c;
        c + Vec2::new(co * d.x + s * d.y, -s * d.x + co * d.y)
    }
}

pub fn pixel_to_world(p: Pixel, map: &HeightMap) -> Result<Vec2> {
    map.pixel_to_world(p)
}

pub fn world_to_pixel(q: Vec2, map: &HeightMap) -> Result<Pixel> {
    map.world_to_pixel(q)
}

/// Angle of rotation index `r` out of `k`.
pub fn rotation_angle(r: usize, k: usize) -> f64 {
    r as f64 * 2.0 * PI / k as f64
}

/// `sin_cos` that is exact at multiples of a quarter turn.
fn angle_sin_cos_exact(angle: f64) -> (f64, f64) {
    let quarters = angle / (PI / 2.0);
    let rounded = quarters.round();
    if (quarters - rounded).abs() < 1e-12 {
        match (rounded as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        angle.sin_cos()
    }
}

/// Renders the top-down heightmap: each pixel takes the tallest object whose
/// footprint contains its centre.
pub fn render_heightmap(scene: &Scene, resolution: usize) -> Result<HeightMap> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Config(format!(
            "resolution {resolution} below minimum {MIN_RESOLUTION}"
        )));
    }
    let mut map = HeightMap::blank(resolution, scene.workspace_side);
    let ps = map.pixel_size;
    let last = resolution as f64 - 1.0;
    for obj in &scene.objects {
        let shape = &obj.spec.shape;
        let origin = obj.pose.translation();
        let reach = shape.bounding_radius();
        let span = |lo: f64, hi: f64| {
            let a = ((lo / ps) - 0.5).floor().clamp(0.0, last) as usize;
            let b = ((hi / ps) - 0.5).ceil().clamp(0.0, last) as usize;
            a..=b
        };
        let rgb = palette_rgb(obj.spec.color_id);
        for row in span(origin.y - reach, origin.y + reach) {
            for col in span(origin.x - reach, origin.x + reach) {
                let center = Vec2::new((col as f64 + 0.5) * ps, (row as f64 + 0.5) * ps);
                let i = row * resolution + col;
                if obj.spec.height > map.height[i] && point_in_shape(shape, &obj.pose, center) {
                    map.height[i] = obj.spec.height;
                    map.color[i * 3..i * 3 + 3].copy_from_slice(&rgb);
                }
            }
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Bilinear,
    Nearest,
}

/// Rotates the image content by `angle_index * 2π / k` about the image centre.
///
/// A scene rotated by that angle about the table centre renders (up to
/// resampling) to the same map. Samples falling outside the frame read as 0.
pub fn rotate_heightmap(map: &HeightMap, angle_index: usize, k: usize, interp: Interpolation) -> HeightMap {
    if angle_index.is_multiple_of(k) {
        return map.clone();
    }
    let n = map.resolution;
    let (s, c) = angle_sin_cos_exact(rotation_angle(angle_index, k));
    let half = n as f64 / 2.0;
    let mut out = HeightMap::blank(n, map.workspace_side);
    for row in 0..n {
        for col in 0..n {
            let dx = col as f64 + 0.5 - half;
            let dy = row as f64 + 0.5 - half;
            // inverse rotation to the source location, in index space
            let fx = c * dx + s * dy + half - 0.5;
            let fy = -s * dx + c * dy + half - 0.5;
            let i = row * n + col;
            match interp {
                Interpolation::Nearest => {
                    let (sx, sy) = (fx.round(), fy.round());
                    if sx >= 0.0 && sy >= 0.0 && sx < n as f64 && sy < n as f64 {
                        let j = sy as usize * n + sx as usize;
                        out.height[i] = map.height[j];
                        out.color[i * 3..i * 3 + 3].copy_from_slice(&map.color[j * 3..j * 3 + 3]);
                    }
                }
                Interpolation::Bilinear => {
                    let x0 = fx.floor();
                    let y0 = fy.floor();
                    let (wx, wy) = (fx - x0, fy - y0);
                    let mut h = 0.0;
                    let mut rgb = [0.0; 3];
                    for (oy, wyy) in [(0.0, 1.0 - wy), (1.0, wy)] {
                        for (ox, wxx) in [(0.0, 1.0 - wx), (1.0, wx)] {
                            let (sx, sy) = (x0 + ox, y0 + oy);
                            let w = wxx * wyy;
                            if w == 0.0 || sx < 0.0 || sy < 0.0 || sx >= n as f64 || sy >= n as f64 {
                                continue;
                            }
                            let j = sy as usize * n + sx as usize;
                            h += w * map.height[j];
                            for (ch, acc) in rgb.iter_mut().enumerate() {
                                *acc += w * map.color[j * 3 + ch];
                            }
                        }
                    }
                    out.height[i] = h;
                    out.color[i * 3..i * 3 + 3].copy_from_slice(&rgb);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationStack {
    pub k: usize,
    pub maps: Vec<HeightMap>,
    pub angles: Vec<f64>,
}

pub fn build_rotation_stack(map: &HeightMap, k: usize) -> RotationStack {
    RotationStack {
        k,
        maps: (0..k)
            .map(|r| rotate_heightmap(map, r, k, Interpolation::Bilinear))
            .collect(),
        angles: (0..k).map(|r| rotation_angle(r, k)).collect(),
    }
}

/// Depth normalization statistics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DepthStats {
    pub mean: f64,
    pub std: f64,
}

impl Default for DepthStats {
    fn default() -> Self {
        Self { mean: 0.0, std: 0.01 }
    }
}

impl DepthStats {
    /// Pixel-wise mean and standard deviation over a set of heightmaps.
    pub fn from_maps<'a>(maps: impl IntoIterator<Item = &'a HeightMap>) -> Self {
        let (mut n, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
        for m in maps {
            for &h in &m.height {
                n += 1;
                sum += h;
                sum_sq += h * h;
            }
        }
        if n == 0 {
            return Self::default();
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean).max(0.0);
        Self {
            mean,
            std: var.sqrt().max(1e-6),
        }
    }
}

/// Network input `[H, W, C]`: raw RGB, plus the normalized height channel
/// when `include_depth` is set.
pub fn normalize_for_network(map: &HeightMap, stats: DepthStats, include_depth: bool) -> Result<Tensor> {
    if stats.std.is_nan() || stats.std <= 0.0 {
        return Err(Error::Config("depth std must be > 0".into()));
    }
    let n = map.resolution;
    let c = if include_depth { 4 } else { 3 };
    let mut data = Vec::with_capacity(n * n * c);
    for i in 0..n * n {
        data.extend_from_slice(&map.color[i * 3..i * 3 + 3]);
        if include_depth {
            data.push((map.height[i] - stats.mean) / stats.std);
        }
    }
    Tensor::from_vec(&[n, n, c], data)
}

/// Default change threshold: 1% of pixels changing by 0.1 mm.
pub fn default_change_threshold(resolution: usize) -> f64 {
    0.01 * (resolution * resolution) as f64 * 1e-4
}

/// Summed absolute height difference between two maps.
pub fn height_difference(before: &HeightMap, after: &HeightMap) -> Result<f64> {
    if before.resolution != after.resolution {
        return Err(Error::ResolutionMismatch(before.resolution, after.resolution));
    }
    Ok(before
        .height
        .iter()
        .zip(&after.height)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

pub fn detect_change(before: &HeightMap, after: &HeightMap, tau: f64) -> Result<bool> {
    Ok(height_difference(before, after)? > tau)
}

fn netpbm(magic: &str, n: usize, maxval: u16, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("{magic}\n{n} {n}\n{maxval}\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Binary graymap of the height channel, `max_height` mapped to 255.
pub fn height_to_pgm(map: &HeightMap, max_height: f64) -> Vec<u8> {
    let px: Vec<u8> = map
        .height
        .iter()
        .map(|h| ((h / max_height).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    netpbm("P5", map.resolution, 255, &px)
}

/// Binary pixmap of the color channels.
pub fn color_to_ppm(map: &HeightMap) -> Vec<u8> {
    let px: Vec<u8> = map
        .color
        .iter()
        .map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    netpbm("P6", map.resolution, 255, &px)
}

/// Binary pixmap from raw RGB bytes of an `n x n` image.
pub fn rgb_to_ppm(n: usize, rgb: &[u8]) -> Vec<u8> {
    netpbm("P6", n, 255, rgb)
}
