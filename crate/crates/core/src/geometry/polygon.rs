use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const AREA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        self.sub(o).norm()
    }
}

/// Shoelace sum over a closed ring. Positive for the orientation this crate
/// treats as canonical.
pub fn signed_area(pts: &[Point2]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a.cross(b);
    }
    0.5 * acc
}

/// Simple polygon with positive signed area.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Validates and orients a vertex ring. Repeated consecutive vertices are
    /// collapsed before validation.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::degenerate("non-finite polygon vertex"));
        }
        let mut vs: Vec<Point2> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if vs.last().is_none_or(|q: &Point2| q.dist(p) > 0.0) {
                vs.push(p);
            }
        }
        while vs.len() > 1 && vs[0].dist(vs[vs.len() - 1]) == 0.0 {
            vs.pop();
        }
        if vs.len() < 3 {
            return Err(Error::degenerate(format!(
                "polygon needs at least 3 distinct vertices, got {}",
                vs.len()
            )));
        }
        let area = signed_area(&vs);
        if area.abs() <= AREA_EPS {
            return Err(Error::degenerate("polygon has zero area"));
        }
        if area < 0.0 {
            vs.reverse();
        }
        if !is_simple(&vs) {
            return Err(Error::degenerate("polygon is self-intersecting"));
        }
        Ok(Self { vertices: vs })
    }

    /// Skips the simplicity check. Only for rings produced by clipping or
    /// offsetting a polygon that was already validated.
    pub(crate) fn from_ring_unchecked(mut vs: Vec<Point2>) -> Option<Self> {
        vs.dedup_by(|a, b| a.dist(*b) <= 1e-12);
        while vs.len() > 1 && vs[0].dist(vs[vs.len() - 1]) <= 1e-12 {
            vs.pop();
        }
        if vs.len() < 3 {
            return None;
        }
        let area = signed_area(&vs);
        if area.abs() <= AREA_EPS {
            return None;
        }
        if area < 0.0 {
            vs.reverse();
        }
        Some(Self { vertices: vs })
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn centroid(&self) -> Point2 {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (a, b) in self.edges() {
            let c = a.cross(b);
            cx += (a.x + b.x) * c;
            cy += (a.y + b.y) * c;
        }
        let k = 1.0 / (6.0 * self.area());
        Point2::new(cx * k, cy * k)
    }

    /// Axis-aligned bounds as `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.vertices.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
        )
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            b.sub(a).cross(c.sub(b)) >= -1e-12 * (1.0 + b.sub(a).norm() * c.sub(b).norm())
        })
    }

    /// Even-odd containment test.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Option<Self> {
        Self::from_ring_unchecked(self.vertices.iter().map(|&p| f(p)).collect())
    }
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = q2.sub(q1).cross(p1.sub(q1));
    let d2 = q2.sub(q1).cross(p2.sub(q1));
    let d3 = p2.sub(p1).cross(q1.sub(p1));
    let d4 = p2.sub(p1).cross(q2.sub(p1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point2, b: Point2, p: Point2, d: f64| {
        d == 0.0
            && p.x >= a.x.min(b.x)
            && p.x <= a.x.max(b.x)
            && p.y >= a.y.min(b.y)
            && p.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn is_simple(vs: &[Point2]) -> bool {
    let n = vs.len();
    if n == 3 {
        return true;
    }
    for i in 0..n {
        let (a, b) = (vs[i], vs[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (vs[j], vs[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}
