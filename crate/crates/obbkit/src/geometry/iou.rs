//! Rotated intersection-over-union.
//!
//! The exact kernel clips one corner quad against the other and measures
//! the overlap with the shoelace formula. Pairwise batch computation
//! first tests the axis-aligned envelopes: disjoint envelopes imply zero
//! rotated IoU, so the expensive clip only runs for candidate pairs.

use super::clip::{clip_convex_by_quad, polygon_area};
use super::{hbb_envelope, obb_to_quad, AxisBox, Quad, RotatedBox};

/// A box with its derived corner quad, envelope, and shoelace area
/// cached for repeated IoU queries (NMS, assignment matrices).
#[derive(Clone, Debug)]
pub struct PreparedBox {
    quad: Quad,
    envelope: AxisBox,
    area: f64,
}

impl PreparedBox {
    pub fn new(b: &RotatedBox) -> Self {
        let quad = obb_to_quad(b);
        PreparedBox {
            envelope: hbb_envelope(b),
            area: quad.area(),
            quad,
        }
    }

    #[inline]
    pub fn envelope(&self) -> &AxisBox {
        &self.envelope
    }

    /// IoU against another prepared box, with the envelope prefilter.
    ///
    /// The clip direction is canonicalized so that `a.iou(b)` and
    /// `b.iou(a)` run bit-identical arithmetic.
    pub fn iou(&self, other: &PreparedBox) -> f64 {
        if !self.envelope.intersects(&other.envelope) {
            return 0.0;
        }
        let (subject, clip) = if quad_key_le(&self.quad, &other.quad) {
            (self, other)
        } else {
            (other, self)
        };
        let clipped = clip_convex_by_quad(subject.quad.vertices(), &clip.quad);
        let inter = polygon_area(&clipped);
        if inter <= 0.0 {
            return 0.0;
        }
        let union = self.area + other.area - inter;
        (inter / union).clamp(0.0, 1.0)
    }
}

impl From<&RotatedBox> for PreparedBox {
    fn from(b: &RotatedBox) -> Self {
        PreparedBox::new(b)
    }
}

/// Lexicographic order on the quads' coordinates; any total order works,
/// it only has to pick the same operand roles for both argument orders.
fn quad_key_le(a: &Quad, b: &Quad) -> bool {
    let va = a.vertices();
    let vb = b.vertices();
    for i in 0..4 {
        if va[i].x != vb[i].x {
            return va[i].x < vb[i].x;
        }
        if va[i].y != vb[i].y {
            return va[i].y < vb[i].y;
        }
    }
    true
}

/// Intersection-over-union of two oriented rectangles, in `[0, 1]`.
///
/// Exactly 1.0 when the boxes describe the same point set, exactly 0.0
/// when they are disjoint or touch only along boundaries.
pub fn rotated_iou(a: &RotatedBox, b: &RotatedBox) -> f64 {
    PreparedBox::new(a).iou(&PreparedBox::new(b))
}

/// Dense pairwise IoU, row-major `[a0 x b0, a0 x b1, ...]`.
///
/// Deterministic: entries depend only on their own pair of boxes.
pub fn iou_matrix(a: &[RotatedBox], b: &[RotatedBox]) -> Vec<f64> {
    let pa: Vec<PreparedBox> = a.iter().map(PreparedBox::new).collect();
    let pb: Vec<PreparedBox> = b.iter().map(PreparedBox::new).collect();
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &pa {
        for y in &pb {
            out.push(x.iou(y));
        }
    }
    out
}
