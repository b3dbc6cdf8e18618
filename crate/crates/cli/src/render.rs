//! Space-time heatmaps as binary PPM (P6).
//!
//! Axes: time runs left to right (column = snapshot), x runs bottom to top
//! (row 0 is the largest x). Colors come from a fixed 256-entry diverging
//! table:
//!
//! | index `i`  | RGB                          |
//! |------------|------------------------------|
//! | 0..=127    | `(2i, 2i, 255)`              |
//! | 128..=255  | `(255, 510 - 2i, 510 - 2i)`  |
//!
//! so 0 is pure blue, 255 pure red and the middle pair is near white. A value
//! `u` maps to `i = min(255, floor((clamp(u / scale, -1, 1) + 1) * 128))`.

use std::fmt::Write as _;

pub type Rgb = [u8; 3];

/// Blend target for stripe pixels in overlays.
pub const OVERLAY_TINT: Rgb = [0, 160, 0];

pub fn lut_entry(i: u8) -> Rgb {
    let i = i as u16;
    if i < 128 {
        let c = (2 * i) as u8;
        [c, c, 255]
    } else {
        let c = (510 - 2 * i) as u8;
        [255, c, c]
    }
}

pub fn lut() -> [Rgb; 256] {
    std::array::from_fn(|i| lut_entry(i as u8))
}

pub fn color_index(u: f64, scale: f64) -> u8 {
    let s = if scale > 0.0 { (u / scale).clamp(-1.0, 1.0) } else { 0.0 };
    ((s + 1.0) * 128.0).floor().min(255.0) as u8
}

pub fn color(u: f64, scale: f64) -> Rgb {
    lut_entry(color_index(u, scale))
}

/// Even split between the base color and [`OVERLAY_TINT`].
pub fn tint(c: Rgb) -> Rgb {
    std::array::from_fn(|k| ((c[k] as u16 + OVERLAY_TINT[k] as u16) / 2) as u8)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major from the top-left pixel.
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn pixel(&self, col: usize, row: usize) -> Rgb {
        self.pixels[row * self.width + col]
    }

    /// P6 bytes; `comment` lines (if any) go into the header as `#` lines.
    pub fn to_ppm(&self, comment: &str) -> Vec<u8> {
        let mut header = String::from("P6\n");
        for line in comment.lines() {
            let _ = writeln!(header, "# {line}");
        }
        let _ = write!(header, "{} {}\n255\n", self.width, self.height);
        let mut out = header.into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }
}

/// Largest |u| over all rows; the default symmetric color range.
pub fn auto_scale(rows: &[&[f64]]) -> f64 {
    rows.iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HeatmapSpec {
    /// Color range `[-scale, scale]`; `None` or non-positive uses [`auto_scale`].
    pub scale: Option<f64>,
    /// Output size; `None` uses one pixel per sample. Resampling is nearest-sample.
    pub width: Option<usize>,
    pub height: Option<usize>,
    /// Tint masked pixels with [`OVERLAY_TINT`].
    pub overlay: bool,
}

/// `rows[s][j]` is the sample at snapshot `s`, point `j`. `mask`, if given, has
/// the same shape and marks the pixels tinted when `spec.overlay` is set.
pub fn heatmap(rows: &[&[f64]], spec: &HeatmapSpec, mask: Option<&[Vec<bool>]>) -> Image {
    let cols = rows.len();
    let points = rows.first().map_or(0, |r| r.len());
    assert!(rows.iter().all(|r| r.len() == points), "ragged rows");
    if let Some(m) = mask {
        assert!(m.len() == cols && m.iter().all(|r| r.len() == points), "mask shape");
    }
    let width = spec.width.filter(|&w| w > 0).unwrap_or(cols);
    let height = spec.height.filter(|&h| h > 0).unwrap_or(points);
    let scale = spec
        .scale
        .filter(|s| *s > 0.0)
        .unwrap_or_else(|| auto_scale(rows));

    let mut pixels = Vec::with_capacity(width * height);
    for row in 0..height {
        let j = (height - 1 - row) * points / height.max(1);
        for col in 0..width {
            let s = col * cols / width.max(1);
            let mut c = color(rows[s][j], scale);
            if spec.overlay && mask.is_some_and(|m| m[s][j]) {
                c = tint(c);
            }
            pixels.push(c);
        }
    }
    Image { width, height, pixels }
}

/// Black/white raster of a stripe mask, same axes as [`heatmap`].
pub fn mask_image(mask: &[Vec<bool>]) -> Image {
    let width = mask.len();
    let height = mask.first().map_or(0, |r| r.len());
    let mut pixels = Vec::with_capacity(width * height);
    for row in 0..height {
        for col in mask {
            pixels.push(if col[height - 1 - row] { [0, 0, 0] } else { [255, 255, 255] });
        }
    }
    Image { width, height, pixels }
}
