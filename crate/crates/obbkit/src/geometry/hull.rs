//! Convex hull and minimum-area enclosing rectangle.

use super::{point, Point, RotatedBox};
use crate::error::{Error, Result};

/// Andrew's monotone chain. Returns hull vertices counter-clockwise with
/// collinear points dropped. Fewer than three non-collinear input points
/// yield a hull with fewer than three vertices.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if (b - a).cross(p - a) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if (b - a).cross(p - a) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Minimum-area oriented rectangle enclosing a point set.
///
/// Rotating calipers: the optimum has a side collinear with a hull edge,
/// so it suffices to scan hull-edge directions. Collinear input is
/// rejected as degenerate.
pub fn min_area_rect(points: &[Point]) -> Result<RotatedBox> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::geometry(
            "cannot fit a rectangle to collinear or empty points",
        ));
    }
    let mut best: Option<(f64, f64, f64, f64, Point)> = None; // (area, w, h, angle, center)
    let n = hull.len();
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let edge = b - a;
        let angle = edge.y.atan2(edge.x);
        let u = point(angle.cos(), angle.sin());
        let v = point(-u.y, u.x);
        let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for &p in &hull {
            let s = p.dot(u);
            let t = p.dot(v);
            smin = smin.min(s);
            smax = smax.max(s);
            tmin = tmin.min(t);
            tmax = tmax.max(t);
        }
        let w = smax - smin;
        let h = tmax - tmin;
        let area = w * h;
        if best.map_or(true, |(ba, ..)| area < ba) {
            let mid_s = (smin + smax) * 0.5;
            let mid_t = (tmin + tmax) * 0.5;
            let center = u * mid_s + v * mid_t;
            best = Some((area, w, h, angle, center));
        }
    }
    let (_, w, h, angle, center) = best.expect("hull has at least one edge");
    if w <= 0.0 || h <= 0.0 {
        return Err(Error::geometry("degenerate point set (zero-extent hull)"));
    }
    RotatedBox::new(center.x, center.y, w, h, angle)
}
