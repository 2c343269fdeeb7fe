use super::clip::clip_half_plane;
use super::polygon::{Point2, Polygon};

/// Miter length over offset distance above which a vertex is beveled.
pub const MITER_LIMIT: f64 = 4.0;

fn outward_normal(a: Point2, b: Point2) -> Point2 {
    let e = b.sub(a);
    let len = e.norm();
    Point2::new(e.y / len, -e.x / len)
}

/// Offsets a polygon by `delta` pixels: negative shrinks inward, positive
/// grows outward. Joins are mitered, falling back to a bevel when the miter
/// would exceed [`MITER_LIMIT`] times `|delta|`.
///
/// Returns `None` when the result is empty: the shrink consumed the whole
/// polygon, or an edge of a non-convex polygon vanished.
pub fn offset_polygon(p: &Polygon, delta: f64) -> Option<Polygon> {
    if delta == 0.0 {
        return Some(p.clone());
    }
    if delta < 0.0 && p.is_convex() {
        return shrink_convex(p, -delta);
    }
    offset_by_joins(p, delta)
}

/// Exact inward offset of a convex polygon: intersection of the inward-shifted
/// edge half-planes.
fn shrink_convex(p: &Polygon, dist: f64) -> Option<Polygon> {
    let mut ring = p.vertices().to_vec();
    for (a, b) in p.edges() {
        let n = outward_normal(a, b).scale(-dist);
        ring = clip_half_plane(&ring, a.add(n), b.add(n));
        if ring.len() < 3 {
            return None;
        }
    }
    let out = Polygon::from_ring_unchecked(ring)?;
    // Anything thinner than this is numerical residue of a collapse.
    if out.area() <= 1e-9 * p.area() {
        return None;
    }
    Some(out)
}

fn line_intersection(p: Point2, d: Point2, q: Point2, e: Point2) -> Option<Point2> {
    let den = d.cross(e);
    if den.abs() < 1e-15 {
        return None;
    }
    let t = q.sub(p).cross(e) / den;
    Some(p.add(d.scale(t)))
}

fn offset_by_joins(p: &Polygon, delta: f64) -> Option<Polygon> {
    let vs = p.vertices();
    let n = vs.len();
    // One or two output points per source vertex.
    let mut joins: Vec<Vec<Point2>> = Vec::with_capacity(n);
    for i in 0..n {
        let prev = vs[(i + n - 1) % n];
        let cur = vs[i];
        let next = vs[(i + 1) % n];
        let n1 = outward_normal(prev, cur);
        let n2 = outward_normal(cur, next);
        let turn = cur.sub(prev).cross(next.sub(cur));
        // Joins on the outside of the offset direction may be beveled; joins
        // on the inside are always the crossing of the two shifted edges.
        let outer = turn * delta > 0.0;
        let cos = n1.dot(n2).clamp(-1.0, 1.0);
        let ratio = if cos > -1.0 {
            (2.0 / (1.0 + cos)).sqrt()
        } else {
            f64::INFINITY
        };
        if outer && ratio > MITER_LIMIT {
            joins.push(vec![cur.add(n1.scale(delta)), cur.add(n2.scale(delta))]);
            continue;
        }
        let a = prev.add(n1.scale(delta));
        let b = next.add(n2.scale(delta));
        let x = line_intersection(a, cur.sub(prev), b, next.sub(cur))
            .unwrap_or_else(|| cur.add(n1.scale(delta)));
        joins.push(vec![x]);
    }
    // The output segment between consecutive joins lies on a shifted source
    // edge; if it points backwards the offset swallowed that edge.
    for i in 0..n {
        let from = *joins[i].last().expect("non-empty join");
        let to = joins[(i + 1) % n][0];
        if to.sub(from).dot(vs[(i + 1) % n].sub(vs[i])) <= 0.0 {
            return None;
        }
    }
    let ring: Vec<Point2> = joins.into_iter().flatten().collect();
    if super::polygon::signed_area(&ring) <= 0.0 {
        return None;
    }
    Polygon::new(ring).ok()
}
