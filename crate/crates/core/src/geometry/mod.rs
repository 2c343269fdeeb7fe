//! Polygons, rotated rectangles, shrink/expand offsets and IoU.

mod clip;
mod offset;
mod polygon;
mod rect;

pub use clip::{clip_convex, clip_to_box, intersection_area, polygon_iou, triangulate};
pub use offset::{offset_polygon, MITER_LIMIT};
pub use polygon::{signed_area, Point2, Polygon};
pub use rect::{convex_hull, min_area_rect, wrap_half_turn, RotatedRect};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shrink ratio `r`: a shrunk polygon keeps roughly `r^2` of the original
/// area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkParams {
    pub r: f64,
}

impl Default for ShrinkParams {
    fn default() -> Self {
        Self { r: 0.4 }
    }
}

impl ShrinkParams {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Config(format!("shrink ratio must be in (0, 1], got {r}")));
        }
        Ok(Self { r })
    }

    fn k(&self) -> f64 {
        1.0 - self.r * self.r
    }
}

/// Inward clip distance `d = Area(P) (1 - r^2) / Perimeter(P)`.
pub fn shrink_offset(p: &Polygon, params: ShrinkParams) -> Result<f64> {
    let area = p.area();
    let perimeter = p.perimeter();
    if !(area > 0.0 && perimeter > 0.0) {
        return Err(Error::degenerate("polygon has zero area or perimeter"));
    }
    Ok(area * params.k() / perimeter)
}

/// Shrinks a polygon by its own clip distance. `None` when the word vanishes.
pub fn shrink_polygon(p: &Polygon, params: ShrinkParams) -> Result<Option<Polygon>> {
    let d = shrink_offset(p, params)?;
    Ok(offset_polygon(p, -d))
}

/// Inverts the shrink for a rectangle.
///
/// A `W x H` rectangle is clipped by `d = k W H / (2 (W + H))`, `k = 1 - r^2`,
/// leaving `w = W - 2d`, `h = H - 2d`. Substituting gives
/// `(8 - 4k) d^2 + 2 (1 - k)(w + h) d - k w h = 0`, whose positive root is
/// added back on every side.
pub fn expand_shrunk_rect(s: &RotatedRect, params: ShrinkParams) -> Result<RotatedRect> {
    let (w, h) = (s.width, s.height);
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::degenerate(format!(
            "cannot expand a {w}x{h} rectangle"
        )));
    }
    let k = params.k();
    let a = 8.0 - 4.0 * k;
    let b = 2.0 * (1.0 - k) * (w + h);
    let c = -k * w * h;
    // Positive root, written to avoid cancellation when b dominates.
    let disc = (b * b - 4.0 * a * c).sqrt();
    let d = if c == 0.0 { 0.0 } else { -2.0 * c / (b + disc) };
    RotatedRect::new(s.cx, s.cy, w + 2.0 * d, h + 2.0 * d, s.angle)
}
