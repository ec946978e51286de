//! Sutherland–Hodgman clipping of convex polygons and shoelace areas.
//!
//! The clip keeps points on the boundary (inclusive half-plane test) and
//! uses exact floating comparisons; a shared edge with no interior
//! overlap simply yields a polygon of zero shoelace area.

use super::{Point, Quad};
use arrayvec::ArrayVec;

/// Clipping an exactly convex n-gon against a quad adds at most one
/// vertex per clip edge (4 + 4 = 8 for quads). Floating noise can make
/// intermediate polygons microscopically non-convex near shared edges,
/// which admits a few extra boundary crossings; 32 is far above
/// anything reachable.
pub(crate) type ClipBuf = ArrayVec<Point, 32>;

#[inline]
fn halfplane_side(p: Point, a: Point, b: Point) -> f64 {
    (b - a).cross(p - a)
}

/// Crossing point of the segment `prev -> cur` with the clip line,
/// interpolated by the signed side values. The parameter
/// `d_prev / (d_prev - d_cur)` is in [0, 1] whenever the signs differ,
/// so the point always lies on the subject segment even when the edges
/// are nearly collinear (where a line-line solve would blow up).
#[inline]
fn edge_crossing(prev: Point, cur: Point, d_prev: f64, d_cur: f64) -> Point {
    let t = d_prev / (d_prev - d_cur);
    prev + (cur - prev) * t
}

/// Clip `subject` by the half-plane left of the directed edge `a -> b`
/// (inside for counter-clockwise clip polygons). Points exactly on the
/// edge are kept.
fn clip_halfplane(subject: &[Point], a: Point, b: Point, out: &mut ClipBuf) {
    out.clear();
    let n = subject.len();
    for i in 0..n {
        let cur = subject[i];
        let prev = subject[(i + n - 1) % n];
        let d_cur = halfplane_side(cur, a, b);
        let d_prev = halfplane_side(prev, a, b);
        let cur_in = d_cur >= 0.0;
        let prev_in = d_prev >= 0.0;
        if cur_in {
            if !prev_in {
                out.push(edge_crossing(prev, cur, d_prev, d_cur));
            }
            out.push(cur);
        } else if prev_in {
            out.push(edge_crossing(prev, cur, d_prev, d_cur));
        }
    }
}

/// Clip a convex polygon (up to 12 vertices) by a counter-clockwise quad.
pub(crate) fn clip_convex_by_quad(subject: &[Point], clip: &Quad) -> ClipBuf {
    debug_assert!(subject.len() <= 12);
    let mut cur = ClipBuf::new();
    cur.try_extend_from_slice(subject).expect("subject fits clip buffer");
    let mut next = ClipBuf::new();
    let cv = clip.vertices();
    for i in 0..4 {
        if cur.is_empty() {
            break;
        }
        clip_halfplane(&cur, cv[i], cv[(i + 1) % 4], &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Unsigned shoelace area of a counter-clockwise polygon. Fewer than
/// three vertices have zero area; tiny negative rounding is clamped.
pub fn polygon_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    let n = poly.len();
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    (acc * 0.5).max(0.0)
}

/// Area of the intersection of two convex quads.
///
/// Symmetric in its arguments up to floating rounding; disjoint quads
/// return exactly zero.
pub fn convex_intersection_area(a: &Quad, b: &Quad) -> f64 {
    let clipped = clip_convex_by_quad(a.vertices(), b);
    polygon_area(&clipped)
}

/// Clip a convex polygon by a quad, returning the (possibly empty)
/// intersection polygon. Used by the tiler to cut annotation quads down
/// to patch windows.
pub fn clip_polygon_to_quad(subject: &[Point], clip: &Quad) -> Vec<Point> {
    clip_convex_by_quad(subject, clip).to_vec()
}
