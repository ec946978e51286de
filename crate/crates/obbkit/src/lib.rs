//! obbkit — deterministic geometry for oriented object detection.
//!
//! Everything around a rotated-box detector that is *not* the network:
//!
//! - [`geometry`] — oriented rectangles, convex clipping, rotated IoU
//!   with an axis-aligned envelope prefilter;
//! - [`codec`] — box delta encoding/decoding and multi-stage
//!   refinement cascades;
//! - [`assign`] — dense anchor grids and max-IoU training-sample
//!   assignment under configurable thresholds;
//! - [`align`] — oriented sampling grids for aligned convolution,
//!   as pure geometry;
//! - [`nms`] — rotated non-maximum suppression, class-aware or
//!   class-agnostic, plus confidence filtering;
//! - [`tiling`] — splitting large images into overlapping patches and
//!   merging per-tile detections back;
//! - [`augment`] — flip/affine transforms that keep oriented boxes
//!   consistent, and class-balanced resampling plans;
//! - [`eval`] — greedy matching, precision/recall curves, per-class
//!   AP and mAP;
//! - [`formats`], [`classes`], [`config`] — DOTA-style text formats,
//!   category tables, and canonical pipeline configuration.
//!
//! Every operation is a pure function over immutable values: no global
//! state, no interior mutability, no randomness. Results are bitwise
//! reproducible across runs and thread counts.
//!
//! ```
//! use obbkit::geometry::{rotated_iou, RotatedBox};
//!
//! let a = RotatedBox::new(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
//! let b = RotatedBox::new(0.5, 0.0, 1.0, 1.0, 0.0).unwrap();
//! assert!((rotated_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
//! ```

pub mod align;
pub mod annotations;
pub mod assign;
pub mod augment;
pub mod classes;
pub mod codec;
pub mod config;
pub mod error;
pub mod eval;
pub mod formats;
pub mod geometry;
pub mod nms;
pub mod tiling;

pub use annotations::{AnnotationSet, Object};
pub use classes::ClassTable;
pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use eval::{ApMode, DetectionSet, EvalConfig, EvalReport};
pub use geometry::{rotated_iou, AxisBox, Point, Quad, RotatedBox};
pub use nms::{Detection, NmsMode};
pub use tiling::TilePlan;
