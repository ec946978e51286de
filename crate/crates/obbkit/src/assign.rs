//! Dense anchor generation and max-IoU training-sample assignment.
//!
//! An anchor becomes positive to its highest-IoU ground truth when that
//! IoU clears the positive threshold, negative when it falls below the
//! negative threshold, and is ignored in between. Lowering the positive
//! threshold can only grow the positive set, which is the recall lever
//! the thresholds exist to tune. Optional low-quality matching forces
//! each ground truth's single best anchor positive so no object is left
//! without a training sample.

use crate::error::{Error, Result};
use crate::geometry::{PreparedBox, RotatedBox};
use serde::{Deserialize, Serialize};

/// A regular grid of square anchors, one per cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorGrid {
    /// Pixels per feature cell.
    pub stride: f64,
    /// Side length of every anchor.
    pub base_size: f64,
    /// Grid width in cells.
    pub grid_w: usize,
    /// Grid height in cells.
    pub grid_h: usize,
    /// Orientation given to every anchor.
    pub base_theta: f64,
}

impl AnchorGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.stride > 0.0 && self.base_size > 0.0) {
            return Err(Error::argument("anchor grid needs positive stride and base size"));
        }
        if self.grid_w == 0 || self.grid_h == 0 {
            return Err(Error::argument("anchor grid needs at least one cell per axis"));
        }
        Ok(())
    }

    pub fn anchor_count(&self) -> usize {
        self.grid_w * self.grid_h
    }
}

/// One square anchor per cell, centered on the cell, in row-major order.
pub fn generate_anchors(grid: &AnchorGrid) -> Result<Vec<RotatedBox>> {
    grid.validate()?;
    let mut anchors = Vec::with_capacity(grid.anchor_count());
    for j in 0..grid.grid_h {
        for i in 0..grid.grid_w {
            let cx = (i as f64 + 0.5) * grid.stride;
            let cy = (j as f64 + 0.5) * grid.stride;
            anchors.push(RotatedBox::new(cx, cy, grid.base_size, grid.base_size, grid.base_theta)?);
        }
    }
    Ok(anchors)
}

/// Training label of one anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnchorLabel {
    /// Assigned to the ground truth with this index.
    Positive(usize),
    Negative,
    Ignore,
}

/// Output of [`max_iou_assign`]: one label and max IoU per anchor, plus
/// each ground truth's best anchor (present whenever some anchor
/// overlaps it at all).
#[derive(Clone, Debug)]
pub struct AssignmentResult {
    pub labels: Vec<AnchorLabel>,
    pub max_iou: Vec<f64>,
    pub gt_best_anchor: Vec<Option<usize>>,
}

/// Summary counts of an assignment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AssignStats {
    pub positives: usize,
    pub negatives: usize,
    pub ignored: usize,
    /// Fraction of ground truths with at least one positive anchor.
    pub gt_recall: f64,
    /// Mean max-IoU over positive anchors (0 when there are none).
    pub mean_pos_iou: f64,
}

/// Threshold-based max-IoU assignment.
///
/// Ties in an anchor's argmax ground truth break toward the lowest
/// ground-truth index; ties for a ground truth's best anchor break
/// toward the lowest anchor index. With `low_quality_match`, ground
/// truths are visited in index order and each forces its best anchor
/// positive, so a later ground truth wins a contested anchor.
pub fn max_iou_assign(
    anchors: &[RotatedBox],
    gts: &[RotatedBox],
    pos_thr: f64,
    neg_thr: f64,
    low_quality_match: bool,
) -> Result<AssignmentResult> {
    if !(0.0 < neg_thr && neg_thr <= pos_thr && pos_thr <= 1.0) {
        return Err(Error::argument(format!(
            "need 0 < neg_thr <= pos_thr <= 1, got neg {neg_thr} pos {pos_thr}"
        )));
    }
    let n = anchors.len();
    let m = gts.len();
    if m == 0 {
        return Ok(AssignmentResult {
            labels: vec![AnchorLabel::Negative; n],
            max_iou: vec![0.0; n],
            gt_best_anchor: Vec::new(),
        });
    }

    let pa: Vec<PreparedBox> = anchors.iter().map(PreparedBox::new).collect();
    let pg: Vec<PreparedBox> = gts.iter().map(PreparedBox::new).collect();

    let mut labels = vec![AnchorLabel::Negative; n];
    let mut max_iou = vec![0.0f64; n];
    let mut gt_best = vec![(0.0f64, None::<usize>); m];

    for (ai, a) in pa.iter().enumerate() {
        let mut best = 0.0f64;
        let mut best_gt = 0usize;
        for (gi, g) in pg.iter().enumerate() {
            let iou = a.iou(g);
            if iou > best {
                best = iou;
                best_gt = gi;
            }
            if iou > gt_best[gi].0 {
                gt_best[gi] = (iou, Some(ai));
            }
        }
        max_iou[ai] = best;
        labels[ai] = if best >= pos_thr {
            AnchorLabel::Positive(best_gt)
        } else if best < neg_thr {
            AnchorLabel::Negative
        } else {
            AnchorLabel::Ignore
        };
    }

    if low_quality_match {
        for (gi, &(iou, best_anchor)) in gt_best.iter().enumerate() {
            if iou > 0.0 {
                if let Some(ai) = best_anchor {
                    labels[ai] = AnchorLabel::Positive(gi);
                }
            }
        }
    }

    Ok(AssignmentResult {
        labels,
        max_iou,
        gt_best_anchor: gt_best.into_iter().map(|(_, a)| a).collect(),
    })
}

impl AssignmentResult {
    /// Exact label counts, ground-truth recall, and mean positive IoU.
    pub fn stats(&self) -> AssignStats {
        let mut positives = 0;
        let mut negatives = 0;
        let mut ignored = 0;
        let mut pos_iou_sum = 0.0;
        let gt_count = self.gt_best_anchor.len();
        let mut gt_hit = vec![false; gt_count];
        for (label, &iou) in self.labels.iter().zip(&self.max_iou) {
            match label {
                AnchorLabel::Positive(gi) => {
                    positives += 1;
                    pos_iou_sum += iou;
                    if *gi < gt_count {
                        gt_hit[*gi] = true;
                    }
                }
                AnchorLabel::Negative => negatives += 1,
                AnchorLabel::Ignore => ignored += 1,
            }
        }
        let recalled = gt_hit.iter().filter(|&&h| h).count();
        AssignStats {
            positives,
            negatives,
            ignored,
            gt_recall: if gt_count == 0 {
                0.0
            } else {
                recalled as f64 / gt_count as f64
            },
            mean_pos_iou: if positives == 0 {
                0.0
            } else {
                pos_iou_sum / positives as f64
            },
        }
    }
}

/// Summary counts for an assignment; see [`AssignmentResult::stats`].
pub fn assignment_stats(result: &AssignmentResult) -> AssignStats {
    result.stats()
}
