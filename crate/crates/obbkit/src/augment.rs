//! Geometry-preserving augmentation transforms and class-balanced
//! resampling plans.
//!
//! Transforms here are deterministic; random scheduling belongs to the
//! training loop that consumes them. Flips stay exact. General affine
//! maps push the box corners through the matrix and refit a
//! minimum-area rotated box, since shear breaks rectangularity.
//!
//! The balance planner fights long-tail class distributions with
//! square-root damped repeat factors: an image is repeated as often as
//! its rarest class asks for, and classes at or above the target
//! frequency are never repeated.

use crate::annotations::AnnotationSet;
use crate::error::{Error, Result};
use crate::geometry::{min_area_rect, point, Point, RotatedBox};
use serde::{Deserialize, Serialize};

/// A 2x3 affine map `p -> L p + t`, rows `[a b tx]`, `[c d ty]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub m: [[f64; 3]; 2],
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform =
        AffineTransform { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]] };

    pub fn uniform_scale(s: f64) -> Self {
        AffineTransform { m: [[s, 0.0, 0.0], [0.0, s, 0.0]] }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        AffineTransform { m: [[1.0, 0.0, tx], [0.0, 1.0, ty]] }
    }

    pub fn rotation_about(center: Point, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let tx = center.x - c * center.x + s * center.y;
        let ty = center.y - s * center.x - c * center.y;
        AffineTransform { m: [[c, -s, tx], [s, c, ty]] }
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        point(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.m[0][2],
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.m[1][2],
        )
    }

    /// Determinant of the linear part.
    #[inline]
    pub fn linear_det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self.then(after)` applies `self` first, then `after`.
    pub fn then(&self, after: &AffineTransform) -> AffineTransform {
        let a = after.m;
        let b = self.m;
        AffineTransform {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                    a[0][0] * b[0][2] + a[0][1] * b[1][2] + a[0][2],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                    a[1][0] * b[0][2] + a[1][1] * b[1][2] + a[1][2],
                ],
            ],
        }
    }
}

/// Mirror axis for [`flip_obb`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipAxis {
    /// Mirror left-right: `cx -> image_w - cx`.
    Horizontal,
    /// Mirror top-bottom: `cy -> image_h - cy`.
    Vertical,
}

/// Flip every box across the image axis. Sizes are unchanged; the angle
/// negates (then normalizes). Applying the same flip twice restores the
/// input.
pub fn flip_obb(set: &AnnotationSet, axis: FlipAxis) -> AnnotationSet {
    let mut out = set.clone();
    for obj in &mut out.objects {
        let b = &obj.bbox;
        let (cx, cy) = match axis {
            FlipAxis::Horizontal => (set.image_w - b.cx(), b.cy()),
            FlipAxis::Vertical => (b.cx(), set.image_h - b.cy()),
        };
        obj.bbox = RotatedBox::new(cx, cy, b.w(), b.h(), -b.theta())
            .expect("flip of a valid box is valid");
    }
    out
}

/// Map every box through an affine transform and refit.
///
/// Boxes whose refit center lands outside `[0, out_w) x [0, out_h)` are
/// dropped; the center test (rather than a corner test) keeps partially
/// visible objects. The matrix must be invertible.
pub fn affine_obb(
    set: &AnnotationSet,
    m: &AffineTransform,
    out_w: f64,
    out_h: f64,
) -> Result<AnnotationSet> {
    if m.linear_det().abs() <= 1e-12 {
        return Err(Error::argument("affine matrix is singular"));
    }
    let mut out = AnnotationSet::new(set.image_id.clone(), out_w, out_h);
    for obj in &set.objects {
        let corners = obj.bbox.corners();
        let mapped: Vec<Point> = corners.iter().map(|&p| m.apply(p)).collect();
        let refit = min_area_rect(&mapped)?;
        let c = refit.center();
        if c.x < 0.0 || c.x >= out_w || c.y < 0.0 || c.y >= out_h {
            continue;
        }
        out.objects.push(crate::annotations::Object {
            bbox: refit,
            class_id: obj.class_id,
            difficult: obj.difficult,
        });
    }
    Ok(out)
}

/// One uniform-scale matrix per requested scale. Scales must be
/// positive.
pub fn multiscale_plan(scales: &[f64]) -> Vec<AffineTransform> {
    assert!(
        scales.iter().all(|&s| s > 0.0 && s.is_finite()),
        "scales must be positive and finite"
    );
    scales.iter().map(|&s| AffineTransform::uniform_scale(s)).collect()
}

/// Repeat-factor plan balancing a long-tail class distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancePlan {
    /// Repeat factor per input image, parallel to the input slice.
    pub repeat_factors: Vec<u32>,
    /// Per-class repeat factor (1 for classes at or above the target
    /// frequency).
    pub class_repeats: Vec<u32>,
    /// Instance counts before the plan.
    pub counts_before: Vec<u64>,
    /// Instance counts after applying every image's repeat factor.
    pub counts_after: Vec<u64>,
    /// Classes present in the input (others are excluded from planning).
    pub present: Vec<bool>,
    /// The target ratio the plan was built for.
    pub target_ratio: f64,
}

impl BalancePlan {
    /// Total images after repetition divided by images before.
    pub fn image_inflation(&self) -> f64 {
        let n = self.repeat_factors.len();
        if n == 0 {
            return 1.0;
        }
        let total: u64 = self.repeat_factors.iter().map(|&r| r as u64).sum();
        total as f64 / n as f64
    }

    /// Smallest nonzero class count divided by the largest, before the
    /// plan.
    pub fn ratio_before(&self) -> f64 {
        min_max_ratio(&self.counts_before)
    }

    /// Smallest nonzero class count divided by the largest, after.
    pub fn ratio_after(&self) -> f64 {
        min_max_ratio(&self.counts_after)
    }
}

fn min_max_ratio(counts: &[u64]) -> f64 {
    let nonzero: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    match (nonzero.iter().min(), nonzero.iter().max()) {
        (Some(&min), Some(&max)) if max > 0 => min as f64 / max as f64,
        _ => 1.0,
    }
}

/// Build a repeat-factor balance plan over a dataset.
///
/// With class frequency `f_c` and threshold `t = target_ratio /
/// num_present_classes`, the class repeat is
/// `max(1, ceil(sqrt(t / f_c)))` and an image repeats as the max over
/// its classes. Classes with zero instances are excluded from planning.
pub fn balance_plan(sets: &[AnnotationSet], num_classes: usize, target_ratio: f64) -> Result<BalancePlan> {
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(Error::argument(format!(
            "target_ratio must be in (0, 1], got {target_ratio}"
        )));
    }
    let mut counts_before = vec![0u64; num_classes];
    for set in sets {
        for obj in &set.objects {
            if obj.class_id >= num_classes {
                return Err(Error::ClassTable(format!(
                    "class id {} out of range ({} classes)",
                    obj.class_id, num_classes
                )));
            }
            counts_before[obj.class_id] += 1;
        }
    }
    let total: u64 = counts_before.iter().sum();
    if total == 0 {
        return Err(Error::argument("balance plan needs at least one instance"));
    }
    let present: Vec<bool> = counts_before.iter().map(|&c| c > 0).collect();
    let num_present = present.iter().filter(|&&p| p).count();
    let threshold = target_ratio / num_present as f64;

    let class_repeats: Vec<u32> = counts_before
        .iter()
        .map(|&c| {
            if c == 0 {
                1
            } else {
                let freq = c as f64 / total as f64;
                (threshold / freq).sqrt().ceil().max(1.0) as u32
            }
        })
        .collect();

    let mut repeat_factors = Vec::with_capacity(sets.len());
    let mut counts_after = vec![0u64; num_classes];
    for set in sets {
        let image_counts = set.class_counts(num_classes);
        let factor = image_counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(class_id, _)| class_repeats[class_id])
            .max()
            .unwrap_or(1);
        repeat_factors.push(factor);
        for (class_id, &c) in image_counts.iter().enumerate() {
            counts_after[class_id] += c * factor as u64;
        }
    }

    Ok(BalancePlan {
        repeat_factors,
        class_repeats,
        counts_before,
        counts_after,
        present,
        target_ratio,
    })
}
