//! Convex clipping, ear-clipping triangulation and polygon IoU.

use super::polygon::{signed_area, Point2, Polygon};

/// Keeps the part of `subject` on the left of the directed line `a -> b`
/// (the interior side for positively oriented clippers).
pub(crate) fn clip_half_plane(subject: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let dir = b.sub(a);
    let side = |p: Point2| dir.cross(p.sub(a));
    let mut out = Vec::with_capacity(subject.len() + 2);
    let n = subject.len();
    for i in 0..n {
        let cur = subject[i];
        let nxt = subject[(i + 1) % n];
        let sc = side(cur);
        let sn = side(nxt);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc >= 0.0) != (sn >= 0.0) {
            let t = sc / (sc - sn);
            out.push(cur.add(nxt.sub(cur).scale(t)));
        }
    }
    out
}

/// Sutherland-Hodgman clipping of any ring against a convex, positively
/// oriented clipper.
pub fn clip_convex(subject: &[Point2], clipper: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    let n = clipper.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        out = clip_half_plane(&out, clipper[i], clipper[(i + 1) % n]);
    }
    out
}

/// Clips a polygon to an axis-aligned box. Returns `None` when nothing with
/// positive area survives.
pub fn clip_to_box(p: &Polygon, x0: f64, y0: f64, x1: f64, y1: f64) -> Option<Polygon> {
    let clipper = [
        Point2::new(x0, y0),
        Point2::new(x1, y0),
        Point2::new(x1, y1),
        Point2::new(x0, y1),
    ];
    Polygon::from_ring_unchecked(clip_convex(p.vertices(), &clipper))
}

/// Ear clipping on a positively oriented simple polygon.
pub fn triangulate(p: &Polygon) -> Vec<[Point2; 3]> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    let vs = p.vertices();
    let mut tris = Vec::with_capacity(p.len().saturating_sub(2));
    let mut guard = 0usize;
    while idx.len() > 3 && guard < 4 * vs.len() * vs.len() {
        guard += 1;
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let a = vs[idx[(i + m - 1) % m]];
            let b = vs[idx[i]];
            let c = vs[idx[(i + 1) % m]];
            if b.sub(a).cross(c.sub(b)) <= 0.0 {
                continue;
            }
            let tri = [a, b, c];
            let blocked = idx.iter().any(|&j| {
                let q = vs[j];
                q != a && q != b && q != c && point_in_triangle(q, &tri)
            });
            if blocked {
                continue;
            }
            tris.push(tri);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            // Numerically stuck on a near-degenerate ring; fan the rest.
            break;
        }
    }
    if idx.len() >= 3 {
        for k in 1..idx.len() - 1 {
            tris.push([vs[idx[0]], vs[idx[k]], vs[idx[k + 1]]]);
        }
    }
    tris
}

fn point_in_triangle(p: Point2, t: &[Point2; 3]) -> bool {
    let d1 = t[1].sub(t[0]).cross(p.sub(t[0]));
    let d2 = t[2].sub(t[1]).cross(p.sub(t[1]));
    let d3 = t[0].sub(t[2]).cross(p.sub(t[2]));
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

fn boxes_overlap(a: &[Point2], b: &[Point2]) -> bool {
    let bb = |s: &[Point2]| {
        s.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
        )
    };
    let (ax0, ay0, ax1, ay1) = bb(a);
    let (bx0, by0, bx1, by1) = bb(b);
    ax0 < bx1 && bx0 < ax1 && ay0 < by1 && by0 < ay1
}

/// Area of the intersection of two simple polygons.
pub fn intersection_area(a: &Polygon, b: &Polygon) -> f64 {
    if !boxes_overlap(a.vertices(), b.vertices()) {
        return 0.0;
    }
    if b.is_convex() {
        return signed_area(&clip_convex(a.vertices(), b.vertices())).max(0.0);
    }
    if a.is_convex() {
        return signed_area(&clip_convex(b.vertices(), a.vertices())).max(0.0);
    }
    let ta = triangulate(a);
    let tb = triangulate(b);
    let mut acc = 0.0;
    for x in &ta {
        for y in &tb {
            if boxes_overlap(x, y) {
                acc += signed_area(&clip_convex(x, y)).max(0.0);
            }
        }
    }
    acc
}

/// Intersection over union of two polygons, in `[0, 1]`.
pub fn polygon_iou(a: &Polygon, b: &Polygon) -> f64 {
    let aa = a.area();
    let ab = b.area();
    if !(aa > 0.0 && ab > 0.0) {
        return 0.0;
    }
    let inter = intersection_area(a, b).min(aa).min(ab);
    let union = aa + ab - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
