use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::polygon::{Point2, Polygon};
use crate::error::{Error, Result};

/// Oriented rectangle. `width` runs along `angle`, `height` is the smaller
/// axis and doubles as the word scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedRect {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    pub angle: f64,
}

/// Wraps an angle into `[-pi/2, pi/2)`.
pub fn wrap_half_turn(angle: f64) -> f64 {
    let a = angle - PI * ((angle + FRAC_PI_2) / PI).floor();
    if a >= FRAC_PI_2 {
        a - PI
    } else {
        a
    }
}

impl RotatedRect {
    /// Builds a rect and normalizes it so that `width >= height` and the
    /// angle lies in `[-pi/2, pi/2)`.
    pub fn new(cx: f64, cy: f64, width: f64, height: f64, angle: f64) -> Result<Self> {
        if ![cx, cy, width, height, angle].iter().all(|v| v.is_finite()) {
            return Err(Error::degenerate("non-finite rotated rect"));
        }
        if width <= 0.0 || height <= 0.0 {
            return Err(Error::degenerate(format!(
                "rotated rect needs positive dims, got {width}x{height}"
            )));
        }
        let (w, h, a) = if height > width {
            (height, width, angle + FRAC_PI_2)
        } else {
            (width, height, angle)
        };
        Ok(Self {
            cx,
            cy,
            width: w,
            height: h,
            angle: wrap_half_turn(a),
        })
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.cx, self.cy)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Corners in positive orientation, starting at the (-w/2, -h/2) corner.
    pub fn corners(&self) -> [Point2; 4] {
        let (s, c) = self.angle.sin_cos();
        let u = Point2::new(c, s).scale(self.width * 0.5);
        let v = Point2::new(-s, c).scale(self.height * 0.5);
        let o = self.center();
        [
            o.sub(u).sub(v),
            o.add(u).sub(v),
            o.add(u).add(v),
            o.sub(u).add(v),
        ]
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::from_ring_unchecked(self.corners().to_vec())
            .expect("rotated rect with positive dims has positive area")
    }

    /// Uniformly scales the rect about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.cx * s,
            self.cy * s,
            self.width * s,
            self.height * s,
            self.angle,
        )
    }
}

/// Andrew's monotone chain. Collinear points are dropped; the result is in
/// positive orientation.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2, a: Point2, b: Point2| a.sub(o).cross(b.sub(o));
    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Minimum-area enclosing rectangle by rotating calipers over the convex
/// hull. Among equal-area candidates the one with the smallest `|angle|`
/// wins.
pub fn min_area_rect(points: &[Point2]) -> Result<RotatedRect> {
    if points.len() < 3 {
        return Err(Error::degenerate(format!(
            "min_area_rect needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::degenerate("non-finite point"));
    }
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::degenerate("points are collinear"));
    }

    let n = hull.len();
    let mut candidates: Vec<(f64, RotatedRect)> = Vec::with_capacity(n);
    for i in 0..n {
        let e = hull[(i + 1) % n].sub(hull[i]);
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        let u = e.scale(1.0 / len);
        let v = Point2::new(-u.y, u.x);
        let (mut umin, mut umax, mut vmin, mut vmax) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &hull {
            let pu = p.dot(u);
            let pv = p.dot(v);
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let w = umax - umin;
        let h = vmax - vmin;
        if w <= 0.0 || h <= 0.0 {
            continue;
        }
        let mu = 0.5 * (umin + umax);
        let mv = 0.5 * (vmin + vmax);
        let c = u.scale(mu).add(v.scale(mv));
        let rect = RotatedRect::new(c.x, c.y, w, h, u.y.atan2(u.x))?;
        candidates.push((w * h, rect));
    }
    let best_area = candidates
        .iter()
        .map(|(a, _)| *a)
        .fold(f64::INFINITY, f64::min);
    if !best_area.is_finite() {
        return Err(Error::degenerate("points are collinear"));
    }
    let tol = best_area * 1e-9;
    candidates
        .into_iter()
        .filter(|(a, _)| *a <= best_area + tol)
        .map(|(_, r)| r)
        .min_by(|a, b| {
            a.angle
                .abs()
                .total_cmp(&b.angle.abs())
                .then(a.angle.total_cmp(&b.angle))
        })
        .ok_or_else(|| Error::degenerate("no enclosing rectangle"))
}
