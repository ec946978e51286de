//! Rotated-box detection evaluation: greedy matching, precision/recall
//! curves, per-class average precision, and mAP.
//!
//! Matching walks detections in descending score and pairs each with
//! the unmatched same-class ground truth of highest rotated IoU, when
//! that IoU clears the threshold. Difficult ground truths can be
//! excluded from scoring entirely: detections landing on them are
//! neither true nor false positives, and they never count toward recall
//! denominators.
//!
//! Both the all-point envelope AP and the legacy eleven-point
//! interpolation are first-class; every report records which one it
//! used. Classes without ground truth are excluded from the mAP mean
//! and flagged.

use crate::annotations::AnnotationSet;
use crate::classes::ClassTable;
use crate::error::{Error, Result};
use crate::geometry::PreparedBox;
use crate::nms::Detection;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Average-precision interpolation convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApMode {
    /// Area under the precision envelope over all recall points.
    AllPoint,
    /// Mean of interpolated precision at recalls 0.0, 0.1, ..., 1.0.
    ElevenPoint,
}

impl std::fmt::Display for ApMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ApMode::AllPoint => "all-point",
            ApMode::ElevenPoint => "eleven-point",
        })
    }
}

impl std::str::FromStr for ApMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "all-point" | "all" => Ok(ApMode::AllPoint),
            "eleven-point" | "11-point" | "eleven" => Ok(ApMode::ElevenPoint),
            other => Err(format!("unknown AP mode '{other}'")),
        }
    }
}

/// Outcome of one scored detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchKind {
    /// Matched the ground truth with this index.
    TruePositive(usize),
    FalsePositive,
}

/// One detection's match record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchRecord {
    /// Index into the input detection list.
    pub det_index: usize,
    pub score: f64,
    pub kind: MatchKind,
}

/// Result of matching one scene's detections against its ground truths.
#[derive(Clone, Debug, Default)]
pub struct MatchResult {
    /// Scored records, sorted by descending score (ties by input index).
    /// Detections absorbed by difficult ground truths are absent.
    pub records: Vec<MatchRecord>,
    /// Per-ground-truth matched flag.
    pub gt_matched: Vec<bool>,
    /// Detection indices removed from scoring by the difficult rule.
    pub ignored_dets: Vec<usize>,
}

/// Ground truth for matching: box, class, difficulty.
#[derive(Clone, Copy, Debug)]
pub struct GroundTruth {
    pub bbox: crate::geometry::RotatedBox,
    pub class_id: usize,
    pub difficult: bool,
}

/// Greedy matching of one scene.
///
/// Detections run in descending score; each pairs with the same-class
/// ground truth of maximal IoU among those still available. Difficult
/// ground truths (when `ignore_difficult`) are never consumed and
/// absorb any detection whose best available match they are.
pub fn match_detections(
    dets: &[Detection],
    gts: &[GroundTruth],
    iou_thr: f64,
    ignore_difficult: bool,
) -> MatchResult {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .score
            .partial_cmp(&dets[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.cmp(&b))
    });

    let prepared_gts: Vec<PreparedBox> = gts.iter().map(|g| PreparedBox::new(&g.bbox)).collect();
    let mut gt_matched = vec![false; gts.len()];
    let mut records = Vec::with_capacity(dets.len());
    let mut ignored = Vec::new();

    for &di in &order {
        let det = &dets[di];
        let det_box = PreparedBox::new(&det.bbox);
        let mut best_iou = 0.0f64;
        let mut best_gt: Option<usize> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if gt.class_id != det.class_id {
                continue;
            }
            let absorbing_difficult = ignore_difficult && gt.difficult;
            if gt_matched[gi] && !absorbing_difficult {
                continue;
            }
            let iou = det_box.iou(&prepared_gts[gi]);
            if iou > best_iou {
                best_iou = iou;
                best_gt = Some(gi);
            }
        }
        match best_gt {
            Some(gi) if best_iou >= iou_thr => {
                if ignore_difficult && gts[gi].difficult {
                    ignored.push(di);
                } else {
                    gt_matched[gi] = true;
                    records.push(MatchRecord {
                        det_index: di,
                        score: det.score,
                        kind: MatchKind::TruePositive(gi),
                    });
                }
            }
            _ => records.push(MatchRecord {
                det_index: di,
                score: det.score,
                kind: MatchKind::FalsePositive,
            }),
        }
    }

    MatchResult { records, gt_matched, ignored_dets: ignored }
}

/// A precision/recall curve point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Cumulative precision/recall over score-sorted match records.
///
/// With `gt_count == 0` every recall is reported as 0; the class AP is
/// then 0 and flagged upstream.
pub fn pr_curve(records: &[MatchRecord], gt_count: usize) -> Vec<PrPoint> {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        match r.kind {
            MatchKind::TruePositive(_) => tp += 1,
            MatchKind::FalsePositive => fp += 1,
        }
        out.push(PrPoint {
            recall: if gt_count == 0 { 0.0 } else { tp as f64 / gt_count as f64 },
            precision: tp as f64 / (tp + fp) as f64,
        });
    }
    out
}

/// Average precision of a curve under the chosen convention.
pub fn average_precision(curve: &[PrPoint], mode: ApMode) -> f64 {
    if curve.is_empty() {
        return 0.0;
    }
    match mode {
        ApMode::AllPoint => {
            // Precision envelope: at each point take the max precision at
            // equal-or-greater recall, then sum rectangle areas between
            // distinct recall levels.
            let mut ap = 0.0;
            let mut max_prec = 0.0f64;
            let mut prev_recall = f64::NAN;
            let mut spans: Vec<(f64, f64)> = Vec::new(); // (recall, envelope)
            for p in curve.iter().rev() {
                max_prec = max_prec.max(p.precision);
                if p.recall != prev_recall {
                    spans.push((p.recall, max_prec));
                    prev_recall = p.recall;
                } else {
                    // Same recall level: the envelope value may still rise.
                    spans.last_mut().expect("span pushed").1 = max_prec;
                }
            }
            spans.reverse();
            let mut last_recall = 0.0;
            for (recall, envelope) in spans {
                ap += (recall - last_recall).max(0.0) * envelope;
                last_recall = recall;
            }
            ap
        }
        ApMode::ElevenPoint => {
            let mut total = 0.0;
            for i in 0..=10 {
                let r = i as f64 / 10.0;
                let p = curve
                    .iter()
                    .filter(|pt| pt.recall >= r - 1e-12)
                    .map(|pt| pt.precision)
                    .fold(0.0f64, f64::max);
                total += p;
            }
            total / 11.0
        }
    }
}

/// Evaluation settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub iou_thr: f64,
    pub mode: ApMode,
    pub ignore_difficult: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { iou_thr: 0.5, mode: ApMode::AllPoint, ignore_difficult: true }
    }
}

/// Detections of one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionSet {
    pub image_id: String,
    pub detections: Vec<Detection>,
}

/// Per-class evaluation outcome.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub class_id: usize,
    pub name: String,
    pub gt_count: usize,
    pub det_count: usize,
    pub ap: f64,
    /// False when the class had no ground truth and was excluded from
    /// the mAP mean.
    pub included_in_map: bool,
    pub curve: Vec<PrPoint>,
}

/// Full evaluation report.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub iou_thr: f64,
    pub mode: ApMode,
    pub ignore_difficult: bool,
    pub classes: Vec<ClassReport>,
    /// Unweighted mean AP over classes with at least one ground truth.
    pub map: f64,
}

/// Evaluate detections against ground truth over a whole dataset.
///
/// Detections and ground truths pair up by image id; matching runs per
/// image and per class, then records pool globally per class for the
/// curve and AP.
pub fn evaluate(
    dets: &[DetectionSet],
    gts: &[AnnotationSet],
    table: &ClassTable,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if !(cfg.iou_thr > 0.0 && cfg.iou_thr <= 1.0) {
        return Err(Error::argument(format!(
            "eval iou_thr must be in (0, 1], got {}",
            cfg.iou_thr
        )));
    }
    let num_classes = table.len();
    for set in dets {
        for d in &set.detections {
            if d.class_id >= num_classes {
                return Err(Error::ClassTable(format!(
                    "detection in image '{}' references class id {} ({} classes)",
                    set.image_id, d.class_id, num_classes
                )));
            }
        }
    }
    for set in gts {
        for o in &set.objects {
            if o.class_id >= num_classes {
                return Err(Error::ClassTable(format!(
                    "annotation in image '{}' references class id {} ({} classes)",
                    set.image_id, o.class_id, num_classes
                )));
            }
        }
    }

    let mut gt_by_image: BTreeMap<&str, &AnnotationSet> = BTreeMap::new();
    for set in gts {
        gt_by_image.insert(set.image_id.as_str(), set);
    }
    let mut det_by_image: BTreeMap<&str, &DetectionSet> = BTreeMap::new();
    for set in dets {
        det_by_image.insert(set.image_id.as_str(), set);
    }
    let mut image_ids: Vec<&str> = gt_by_image
        .keys()
        .chain(det_by_image.keys())
        .copied()
        .collect();
    image_ids.sort_unstable();
    image_ids.dedup();

    // Pool match records per class across images.
    let mut class_records: Vec<Vec<MatchRecord>> = vec![Vec::new(); num_classes];
    let mut class_gt_counts = vec![0usize; num_classes];
    let mut class_det_counts = vec![0usize; num_classes];

    for image_id in image_ids {
        let empty_dets = Vec::new();
        let image_dets = det_by_image
            .get(image_id)
            .map(|s| &s.detections)
            .unwrap_or(&empty_dets);
        let image_gts: Vec<GroundTruth> = gt_by_image
            .get(image_id)
            .map(|s| {
                s.objects
                    .iter()
                    .map(|o| GroundTruth {
                        bbox: o.bbox,
                        class_id: o.class_id,
                        difficult: o.difficult,
                    })
                    .collect()
            })
            .unwrap_or_default();

        for gt in &image_gts {
            if !(cfg.ignore_difficult && gt.difficult) {
                class_gt_counts[gt.class_id] += 1;
            }
        }
        for d in image_dets {
            class_det_counts[d.class_id] += 1;
        }

        let matched = match_detections(image_dets, &image_gts, cfg.iou_thr, cfg.ignore_difficult);
        for r in matched.records {
            class_records[image_dets[r.det_index].class_id].push(r);
        }
    }

    let mut classes = Vec::with_capacity(num_classes);
    let mut ap_sum = 0.0;
    let mut ap_classes = 0usize;
    for class_id in 0..num_classes {
        let mut records = std::mem::take(&mut class_records[class_id]);
        records.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.det_index.cmp(&b.det_index))
        });
        let gt_count = class_gt_counts[class_id];
        let curve = pr_curve(&records, gt_count);
        let ap = if gt_count == 0 { 0.0 } else { average_precision(&curve, cfg.mode) };
        let included = gt_count > 0;
        if included {
            ap_sum += ap;
            ap_classes += 1;
        }
        classes.push(ClassReport {
            class_id,
            name: table.name(class_id)?.to_string(),
            gt_count,
            det_count: class_det_counts[class_id],
            ap,
            included_in_map: included,
            curve,
        });
    }

    Ok(EvalReport {
        iou_thr: cfg.iou_thr,
        mode: cfg.mode,
        ignore_difficult: cfg.ignore_difficult,
        classes,
        map: if ap_classes == 0 { 0.0 } else { ap_sum / ap_classes as f64 },
    })
}

impl EvalReport {
    /// Render the human-readable table. The interpolation mode is always
    /// printed so reports from different conventions cannot be confused
    /// silently.
    pub fn to_table(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# rotated-box evaluation: iou_thr {:.2}, mode {}, difficult {}",
            self.iou_thr,
            self.mode,
            if self.ignore_difficult { "ignored" } else { "scored" }
        );
        let _ = writeln!(out, "{:<22} {:>8} {:>8} {:>9}", "class", "gts", "dets", "AP");
        for c in &self.classes {
            let flag = if c.included_in_map { "" } else { "  (no gt, excluded)" };
            let _ = writeln!(
                out,
                "{:<22} {:>8} {:>8} {:>8.4}{}",
                c.name,
                c.gt_count,
                c.det_count,
                c.ap * 100.0,
                flag
            );
        }
        let _ = writeln!(out, "mAP: {:.2}", self.map * 100.0);
        out
    }
}
