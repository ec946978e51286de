//! Oriented-rectangle geometry: representations, conversions, convex
//! clipping, and rotated IoU.
//!
//! The universal currency is [`RotatedBox`], an oriented rectangle stored
//! as center, size, and angle. Every box is kept in a canonical form:
//! `w >= h > 0` (the width is always the long side) and
//! `theta` in `(-pi/2, pi/2]`, measured as the orientation of the long
//! side. A raw `(cx, cy, w, h, theta)` tuple describing the same point
//! set always normalizes to the same field values, so plain field
//! comparison is meaningful after construction.
//!
//! All computation is in `f64`. Everything here is a pure function over
//! immutable values and safe to call from any number of threads.
//!
//! ```
//! use obbkit::geometry::RotatedBox;
//!
//! // A 4x2 box: constructing it sideways yields the same canonical form.
//! let a = RotatedBox::new(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
//! let b = RotatedBox::new(0.0, 0.0, 2.0, 4.0, std::f64::consts::FRAC_PI_2).unwrap();
//! assert!((a.w() - b.w()).abs() < 1e-12);
//! assert!((obbkit::geometry::rotated_iou(&a, &b) - 1.0).abs() < 1e-9);
//! ```

mod clip;
mod hull;
mod iou;

pub use clip::{clip_polygon_to_quad, convex_intersection_area, polygon_area};
pub use hull::{convex_hull, min_area_rect};
pub use iou::{iou_matrix, rotated_iou, PreparedBox};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A 2-D point (or vector) in pixel coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Shorthand constructor for [`Point`].
#[inline]
pub const fn point(x: f64, y: f64) -> Point {
    Point { x, y }
}

impl Point {
    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, positive when `other` is
    /// counter-clockwise from `self`.
    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Point) -> Point {
        point(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Point) -> Point {
        point(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        point(self.x * s, self.y * s)
    }
}

/// Wrap an angle into the canonical long-side range `(-pi/2, pi/2]`.
///
/// A rectangle is unchanged by rotating it half a turn, so angles are
/// identified modulo pi. The wrap is idempotent.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    let mut t = theta % PI;
    if t <= -FRAC_PI_2 {
        t += PI;
    } else if t > FRAC_PI_2 {
        t -= PI;
    }
    t
}

/// An oriented rectangle: center `(cx, cy)`, long side `w`, short side
/// `h`, and `theta`, the angle of the long side in radians.
///
/// Invariants (enforced on construction): `w >= h > 0`, `theta` in
/// `(-pi/2, pi/2]`, all fields finite. Construction normalizes raw
/// values, swapping sides and rotating a quarter turn when the given
/// width is the short side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatedBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

impl RotatedBox {
    /// Normalize raw values into a canonical box.
    ///
    /// The returned box describes exactly the point set of the input;
    /// only the parametrization changes. Applying `new` to an already
    /// canonical box is the identity.
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self> {
        if !(cx.is_finite() && cy.is_finite() && w.is_finite() && h.is_finite() && theta.is_finite())
        {
            return Err(Error::geometry(format!(
                "non-finite box ({cx}, {cy}, {w}, {h}, {theta})"
            )));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::geometry(format!("non-positive size {w}x{h}")));
        }
        let (w, h, theta) = if w >= h {
            (w, h, wrap_angle(theta))
        } else {
            (h, w, wrap_angle(theta + std::f64::consts::FRAC_PI_2))
        };
        Ok(RotatedBox { cx, cy, w, h, theta })
    }

    #[inline]
    pub fn cx(&self) -> f64 {
        self.cx
    }
    #[inline]
    pub fn cy(&self) -> f64 {
        self.cy
    }
    /// Long side.
    #[inline]
    pub fn w(&self) -> f64 {
        self.w
    }
    /// Short side.
    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }
    /// Orientation of the long side, in `(-pi/2, pi/2]`.
    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn center(&self) -> Point {
        point(self.cx, self.cy)
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Unit vector along the long side.
    #[inline]
    pub fn long_axis(&self) -> Point {
        point(self.theta.cos(), self.theta.sin())
    }

    /// Unit vector along the short side (long axis rotated +90 degrees).
    #[inline]
    pub fn short_axis(&self) -> Point {
        point(-self.theta.sin(), self.theta.cos())
    }

    /// The four corners, counter-clockwise.
    pub fn corners(&self) -> [Point; 4] {
        let u = self.long_axis();
        let v = self.short_axis();
        let c = self.center();
        let eu = u * (self.w * 0.5);
        let ev = v * (self.h * 0.5);
        [
            c + eu + ev,
            c - eu + ev,
            c - eu - ev,
            c + eu - ev,
        ]
    }

    /// Closed point-in-box test (boundary counts as inside).
    pub fn contains(&self, p: Point) -> bool {
        self.contains_with_tol(p, 0.0)
    }

    /// Point-in-box test with an absolute slack on both half-extents.
    pub fn contains_with_tol(&self, p: Point, tol: f64) -> bool {
        let d = p - self.center();
        let s = d.dot(self.long_axis());
        let t = d.dot(self.short_axis());
        s.abs() <= self.w * 0.5 + tol && t.abs() <= self.h * 0.5 + tol
    }

    /// Translate the center, leaving size and angle unchanged.
    pub fn translated(&self, dx: f64, dy: f64) -> RotatedBox {
        RotatedBox {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }
}

/// A quadrilateral as used by DOTA-style 8-coordinate annotations.
///
/// The winding is normalized to counter-clockwise (positive shoelace
/// area) on construction; degenerate quads are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quad {
    vertices: [Point; 4],
}

impl Quad {
    pub fn new(mut vertices: [Point; 4]) -> Result<Self> {
        for v in &vertices {
            if !(v.x.is_finite() && v.y.is_finite()) {
                return Err(Error::geometry("non-finite quad vertex"));
            }
        }
        let signed = signed_area(&vertices);
        if signed == 0.0 {
            return Err(Error::geometry("degenerate quad (zero area)"));
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        Ok(Quad { vertices })
    }

    #[inline]
    pub fn vertices(&self) -> &[Point; 4] {
        &self.vertices
    }

    /// Unsigned area via the shoelace formula.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let mut c = point(0.0, 0.0);
        for v in &self.vertices {
            c = c + *v;
        }
        c * 0.25
    }

    pub(crate) fn from_corners_unchecked(vertices: [Point; 4]) -> Self {
        Quad { vertices }
    }
}

fn signed_area(vertices: &[Point; 4]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let a = vertices[i];
        let b = vertices[(i + 1) % 4];
        acc += a.cross(b);
    }
    acc * 0.5
}

/// An axis-aligned rectangle, used as a cheap envelope around rotated
/// boxes for overlap prefiltering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl AxisBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        if !(xmin.is_finite() && ymin.is_finite() && xmax.is_finite() && ymax.is_finite()) {
            return Err(Error::geometry("non-finite axis box"));
        }
        if xmin > xmax || ymin > ymax {
            return Err(Error::geometry(format!(
                "inverted axis box [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(AxisBox { xmin, ymin, xmax, ymax })
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// True when the closed rectangles share at least one point.
    #[inline]
    pub fn intersects(&self, other: &AxisBox) -> bool {
        self.xmin <= other.xmax
            && other.xmin <= self.xmax
            && self.ymin <= other.ymax
            && other.ymin <= self.ymax
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }
}

/// Expand an oriented box into its corner quad.
///
/// Corners are `center + R(theta) * (+-w/2, +-h/2)` in counter-clockwise
/// order; the quad area equals `w * h`.
pub fn obb_to_quad(b: &RotatedBox) -> Quad {
    Quad::from_corners_unchecked(b.corners())
}

/// Fit the minimum-area oriented rectangle around a quad.
///
/// This is rotating calipers over the convex hull; for a quad whose
/// corners form an exact rectangle it recovers that rectangle. Collinear
/// input is rejected.
pub fn quad_to_obb(q: &Quad) -> Result<RotatedBox> {
    min_area_rect(q.vertices())
}

/// Tightest axis-aligned box containing the four corners.
///
/// Envelope disjointness implies zero rotated IoU, which is what makes
/// the envelope a sound prefilter.
pub fn hbb_envelope(b: &RotatedBox) -> AxisBox {
    let ex = (b.w() * 0.5 * b.theta().cos()).abs() + (b.h() * 0.5 * b.theta().sin()).abs();
    let ey = (b.w() * 0.5 * b.theta().sin()).abs() + (b.h() * 0.5 * b.theta().cos()).abs();
    AxisBox {
        xmin: b.cx() - ex,
        ymin: b.cy() - ey,
        xmax: b.cx() + ex,
        ymax: b.cy() + ey,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn assert_box_eq(b: &RotatedBox, cx: f64, cy: f64, w: f64, h: f64, theta: f64, tol: f64) {
        assert!((b.cx() - cx).abs() <= tol, "cx {} vs {}", b.cx(), cx);
        assert!((b.cy() - cy).abs() <= tol, "cy {} vs {}", b.cy(), cy);
        assert!((b.w() - w).abs() <= tol, "w {} vs {}", b.w(), w);
        assert!((b.h() - h).abs() <= tol, "h {} vs {}", b.h(), h);
        let dt = wrap_angle(b.theta() - theta).abs();
        assert!(dt <= tol, "theta {} vs {}", b.theta(), theta);
    }

    #[test]
    fn normalize_swaps_short_width() {
        let b = RotatedBox::new(0.0, 0.0, 2.0, 4.0, 0.0).unwrap();
        assert_box_eq(&b, 0.0, 0.0, 4.0, 2.0, FRAC_PI_2, 0.0);
    }

    #[test]
    fn normalize_wraps_angle() {
        let b = RotatedBox::new(0.0, 0.0, 4.0, 2.0, FRAC_PI_2 + 0.1).unwrap();
        assert_box_eq(&b, 0.0, 0.0, 4.0, 2.0, -FRAC_PI_2 + 0.1, 1e-15);
    }

    #[test]
    fn normalize_is_idempotent() {
        let b = RotatedBox::new(5.0, 5.0, 3.0, 3.0, 0.3).unwrap();
        assert_box_eq(&b, 5.0, 5.0, 3.0, 3.0, 0.3, 0.0);
        let again = RotatedBox::new(b.cx(), b.cy(), b.w(), b.h(), b.theta()).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert!(RotatedBox::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(RotatedBox::new(0.0, 0.0, -1.0, 1.0, 0.0).is_err());
        assert!(RotatedBox::new(f64::NAN, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(RotatedBox::new(0.0, 0.0, 1.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn quad_of_axis_aligned_box() {
        let b = RotatedBox::new(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
        let q = obb_to_quad(&b);
        let expect = [point(2.0, 1.0), point(-2.0, 1.0), point(-2.0, -1.0), point(2.0, -1.0)];
        // Same cyclic order, any starting corner.
        let verts = q.vertices();
        let start = (0..4)
            .find(|&i| (verts[i].x - expect[0].x).abs() < 1e-12 && (verts[i].y - expect[0].y).abs() < 1e-12)
            .expect("missing corner");
        for k in 0..4 {
            let v = verts[(start + k) % 4];
            assert!((v.x - expect[k].x).abs() < 1e-12);
            assert!((v.y - expect[k].y).abs() < 1e-12);
        }
        assert!((q.area() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn quad_of_diamond() {
        let b = RotatedBox::new(0.0, 0.0, 2.0, 2.0, FRAC_PI_4).unwrap();
        let q = obb_to_quad(&b);
        let r = 2f64.sqrt();
        for v in q.vertices() {
            let on_axis = (v.x.abs() < 1e-12 && (v.y.abs() - r).abs() < 1e-12)
                || (v.y.abs() < 1e-12 && (v.x.abs() - r).abs() < 1e-12);
            assert!(on_axis, "corner {v:?} not on an axis at radius sqrt(2)");
        }
    }

    #[test]
    fn quad_centroid_matches_center() {
        let b = RotatedBox::new(10.0, 20.0, 6.0, 2.0, 0.0).unwrap();
        let c = obb_to_quad(&b).centroid();
        assert!((c.x - 10.0).abs() < 1e-12 && (c.y - 20.0).abs() < 1e-12);
    }

    #[test]
    fn quad_to_obb_round_trips_exact_rectangle() {
        let b = RotatedBox::new(0.0, 0.0, 4.0, 2.0, 0.3).unwrap();
        let back = quad_to_obb(&obb_to_quad(&b)).unwrap();
        assert_box_eq(&back, 0.0, 0.0, 4.0, 2.0, 0.3, 1e-9);
    }

    #[test]
    fn quad_to_obb_unit_square() {
        let q = Quad::new([point(0.0, 0.0), point(1.0, 0.0), point(1.0, 1.0), point(0.0, 1.0)])
            .unwrap();
        let b = quad_to_obb(&q).unwrap();
        assert!((b.cx() - 0.5).abs() < 1e-12 && (b.cy() - 0.5).abs() < 1e-12);
        assert!((b.w() - 1.0).abs() < 1e-12 && (b.h() - 1.0).abs() < 1e-12);
        // Axis-aligned: theta is a multiple of pi/2, so cos*sin == 0.
        assert!((b.theta().cos() * b.theta().sin()).abs() < 1e-12);
    }

    #[test]
    fn quad_rejects_degenerate() {
        assert!(Quad::new([point(0.0, 0.0), point(1.0, 1.0), point(2.0, 2.0), point(3.0, 3.0)])
            .is_err());
    }

    #[test]
    fn quad_normalizes_winding() {
        // Clockwise input gets reversed.
        let q = Quad::new([point(0.0, 0.0), point(0.0, 1.0), point(1.0, 1.0), point(1.0, 0.0)])
            .unwrap();
        assert!(q.area() > 0.0);
        assert!(signed_area(q.vertices()) > 0.0);
    }

    #[test]
    fn envelope_axis_aligned() {
        let b = RotatedBox::new(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
        let e = hbb_envelope(&b);
        assert_eq!(e, AxisBox { xmin: -2.0, ymin: -1.0, xmax: 2.0, ymax: 1.0 });
    }

    #[test]
    fn envelope_diamond() {
        let b = RotatedBox::new(0.0, 0.0, 2.0, 2.0, FRAC_PI_4).unwrap();
        let e = hbb_envelope(&b);
        let r = 2f64.sqrt();
        assert!((e.xmin + r).abs() < 1e-12 && (e.xmax - r).abs() < 1e-12);
        assert!((e.ymin + r).abs() < 1e-12 && (e.ymax - r).abs() < 1e-12);
    }

    #[test]
    fn envelope_area_dominates_box_area() {
        let b = RotatedBox::new(3.0, -7.0, 9.0, 4.0, 1.1).unwrap();
        assert!(hbb_envelope(&b).area() >= b.area() - 1e-12);
    }

    #[test]
    fn wrap_angle_boundaries() {
        assert_eq!(wrap_angle(FRAC_PI_2), FRAC_PI_2);
        assert_eq!(wrap_angle(-FRAC_PI_2), FRAC_PI_2);
        assert_eq!(wrap_angle(PI), 0.0);
        assert!((wrap_angle(PI + 0.25) - 0.25).abs() < 1e-15);
    }
}
