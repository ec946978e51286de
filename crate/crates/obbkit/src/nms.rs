//! Rotated non-maximum suppression and confidence filtering.
//!
//! Greedy NMS in score order: keep the best remaining detection,
//! suppress everything overlapping it beyond the IoU threshold, repeat.
//! Class-aware mode compares only same-class pairs; class-agnostic mode
//! compares everything. Suppression is strictly greater than the
//! threshold, which makes `iou_thr = 1.0` an exact no-op and the kept
//! set monotone in the threshold. Ties in score break toward the lower
//! original index so output never depends on sort internals.

use crate::geometry::{PreparedBox, RotatedBox};
use serde::{Deserialize, Serialize};

/// A scored, classified oriented box. Scores live in `[0, 1]`; the file
/// parsers enforce the range at the I/O boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: RotatedBox,
    pub class_id: usize,
    pub score: f64,
}

/// Whether NMS suppresses across class boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NmsMode {
    /// Only same-class pairs suppress each other.
    ClassAware,
    /// Any pair can suppress.
    ClassAgnostic,
}

impl std::fmt::Display for NmsMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NmsMode::ClassAware => "class-aware",
            NmsMode::ClassAgnostic => "class-agnostic",
        })
    }
}

impl std::str::FromStr for NmsMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "class-aware" | "aware" => Ok(NmsMode::ClassAware),
            "class-agnostic" | "agnostic" => Ok(NmsMode::ClassAgnostic),
            other => Err(format!("unknown NMS mode '{other}'")),
        }
    }
}

/// Keep detections with `score >= conf_thr`, preserving input order.
pub fn score_filter(dets: &[Detection], conf_thr: f64) -> Vec<Detection> {
    dets.iter().filter(|d| d.score >= conf_thr).cloned().collect()
}

/// Greedy rotated NMS. Returns indices into `dets` of the kept
/// detections, ordered by descending score (ties by lower index).
pub fn rotated_nms(dets: &[Detection], iou_thr: f64, mode: NmsMode) -> Vec<usize> {
    let n = dets.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .score
            .partial_cmp(&dets[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.cmp(&b))
    });

    let prepared: Vec<PreparedBox> = dets.iter().map(|d| PreparedBox::new(&d.bbox)).collect();
    let mut suppressed = vec![false; n];
    let mut kept = Vec::new();
    for (rank, &idx) in order.iter().enumerate() {
        if suppressed[idx] {
            continue;
        }
        kept.push(idx);
        let keeper = &prepared[idx];
        for &other in &order[rank + 1..] {
            if suppressed[other] {
                continue;
            }
            if mode == NmsMode::ClassAware && dets[other].class_id != dets[idx].class_id {
                continue;
            }
            if keeper.iou(&prepared[other]) > iou_thr {
                suppressed[other] = true;
            }
        }
    }
    kept
}

/// Convenience wrapper returning the kept detections themselves.
pub fn rotated_nms_filter(dets: &[Detection], iou_thr: f64, mode: NmsMode) -> Vec<Detection> {
    rotated_nms(dets, iou_thr, mode)
        .into_iter()
        .map(|i| dets[i].clone())
        .collect()
}
