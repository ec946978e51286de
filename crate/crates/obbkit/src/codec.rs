//! Rotated box delta coding and the two-stage refinement cascade.
//!
//! Regression targets are expressed relative to an anchor: the center
//! displacement is measured in the anchor's own rotated frame and scaled
//! by the anchor's sides, sizes are log-ratios, and the angle is a
//! wrapped residual. Measuring displacement in the anchor frame makes
//! the encoding covariant under rigid motion: moving anchor and target
//! together leaves the delta unchanged.
//!
//! ```
//! use obbkit::codec::{decode_delta, encode_delta};
//! use obbkit::geometry::RotatedBox;
//!
//! let anchor = RotatedBox::new(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
//! let target = RotatedBox::new(1.0, 0.0, 4.0, 2.0, 0.0).unwrap();
//! let d = encode_delta(&anchor, &target);
//! assert!((d.dx - 0.25).abs() < 1e-12);
//! let back = decode_delta(&anchor, &d).unwrap();
//! assert!((back.bbox.cx() - 1.0).abs() < 1e-12);
//! ```

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, RotatedBox};
use serde::{Deserialize, Serialize};

/// Decoded size ratios are clamped to `exp(+-MAX_LOG_RATIO)` so hostile
/// deltas cannot blow a box up to infinity.
pub const MAX_LOG_RATIO: f64 = 4.0;

/// Regression target connecting an anchor to a target box.
///
/// `dx`/`dy` are the center displacement projected on the anchor's
/// long/short axes, in units of the anchor's sides; `dw`/`dh` are log
/// size ratios; `dtheta` is the angle residual wrapped to
/// `(-pi/2, pi/2]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoxDelta {
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
    pub dh: f64,
    pub dtheta: f64,
}

/// A decoded box plus a flag reporting whether the size ratio clamp
/// fired.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodedBox {
    pub bbox: RotatedBox,
    pub clamped: bool,
}

/// Per-stage IoU thresholds of a refinement cascade, ordered first
/// stage to last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub stages: Vec<StageThresholds>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageThresholds {
    pub pos_iou_threshold: f64,
    pub neg_iou_threshold: f64,
}

impl CascadeConfig {
    pub fn new(stages: Vec<StageThresholds>) -> Result<Self> {
        let cfg = CascadeConfig { stages };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::argument("cascade needs at least one stage"));
        }
        for (i, s) in self.stages.iter().enumerate() {
            if !(0.0 < s.neg_iou_threshold
                && s.neg_iou_threshold <= s.pos_iou_threshold
                && s.pos_iou_threshold <= 1.0)
            {
                return Err(Error::argument(format!(
                    "stage {i}: need 0 < neg <= pos <= 1, got neg {} pos {}",
                    s.neg_iou_threshold, s.pos_iou_threshold
                )));
            }
        }
        Ok(())
    }
}

impl Default for CascadeConfig {
    /// Two stages: a recall-oriented first stage and a stricter second
    /// stage.
    fn default() -> Self {
        CascadeConfig {
            stages: vec![
                StageThresholds { pos_iou_threshold: 0.5, neg_iou_threshold: 0.4 },
                StageThresholds { pos_iou_threshold: 0.6, neg_iou_threshold: 0.4 },
            ],
        }
    }
}

/// Encode the delta that regresses `anchor` onto `target`.
pub fn encode_delta(anchor: &RotatedBox, target: &RotatedBox) -> BoxDelta {
    let u = anchor.long_axis();
    let v = anchor.short_axis();
    let dc = target.center() - anchor.center();
    BoxDelta {
        dx: dc.dot(u) / anchor.w(),
        dy: dc.dot(v) / anchor.h(),
        dw: (target.w() / anchor.w()).ln(),
        dh: (target.h() / anchor.h()).ln(),
        dtheta: wrap_angle(target.theta() - anchor.theta()),
    }
}

/// Apply a delta to an anchor; exact inverse of [`encode_delta`] as long
/// as the size ratios stay inside the clamp.
pub fn decode_delta(anchor: &RotatedBox, delta: &BoxDelta) -> Result<DecodedBox> {
    let dw = delta.dw.clamp(-MAX_LOG_RATIO, MAX_LOG_RATIO);
    let dh = delta.dh.clamp(-MAX_LOG_RATIO, MAX_LOG_RATIO);
    let clamped = dw != delta.dw || dh != delta.dh;
    let u = anchor.long_axis();
    let v = anchor.short_axis();
    let c = anchor.center() + u * (delta.dx * anchor.w()) + v * (delta.dy * anchor.h());
    let bbox = RotatedBox::new(
        c.x,
        c.y,
        anchor.w() * dw.exp(),
        anchor.h() * dh.exp(),
        anchor.theta() + delta.dtheta,
    )?;
    Ok(DecodedBox { bbox, clamped })
}

/// Outcome of a multi-stage refinement.
///
/// `stages[0]` is the anchor set itself; `stages[k]` is the output of
/// the k-th delta application, so the last entry is the final
/// refinement.
#[derive(Clone, Debug)]
pub struct CascadeOutput {
    pub stages: Vec<Vec<RotatedBox>>,
    /// True when any decode clamped a size ratio.
    pub clamped: bool,
}

impl CascadeOutput {
    pub fn final_boxes(&self) -> &[RotatedBox] {
        self.stages.last().expect("cascade output has stages").as_slice()
    }
}

/// Run anchors through a sequence of per-stage deltas.
///
/// Every stage decodes from the previous stage's output, mirroring a
/// refine-then-detect cascade. Each stage's delta list must match the
/// anchor count.
pub fn cascade_refine(
    anchors: &[RotatedBox],
    stage_deltas: &[Vec<BoxDelta>],
) -> Result<CascadeOutput> {
    let mut stages = Vec::with_capacity(stage_deltas.len() + 1);
    stages.push(anchors.to_vec());
    let mut clamped = false;
    for (k, deltas) in stage_deltas.iter().enumerate() {
        if deltas.len() != anchors.len() {
            return Err(Error::DimensionMismatch(format!(
                "stage {k} has {} deltas for {} anchors",
                deltas.len(),
                anchors.len()
            )));
        }
        let prev = stages.last().expect("seeded with anchors");
        let mut next = Vec::with_capacity(prev.len());
        for (b, d) in prev.iter().zip(deltas) {
            let out = decode_delta(b, d)?;
            clamped |= out.clamped;
            next.push(out.bbox);
        }
        stages.push(next);
    }
    Ok(CascadeOutput { stages, clamped })
}
