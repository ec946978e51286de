//! Per-image ground-truth annotation sets.

use crate::geometry::RotatedBox;
use serde::{Deserialize, Serialize};

/// One annotated object: an oriented box, its class, and a difficulty
/// flag that evaluation may choose to ignore.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Object {
    pub bbox: RotatedBox,
    pub class_id: usize,
    pub difficult: bool,
}

/// All ground-truth objects of one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub image_id: String,
    pub image_w: f64,
    pub image_h: f64,
    pub objects: Vec<Object>,
}

impl AnnotationSet {
    pub fn new(image_id: impl Into<String>, image_w: f64, image_h: f64) -> Self {
        AnnotationSet {
            image_id: image_id.into(),
            image_w,
            image_h,
            objects: Vec::new(),
        }
    }

    /// Instance count per class, sized to `num_classes`.
    pub fn class_counts(&self, num_classes: usize) -> Vec<u64> {
        let mut counts = vec![0u64; num_classes];
        for obj in &self.objects {
            if obj.class_id < num_classes {
                counts[obj.class_id] += 1;
            }
        }
        counts
    }
}
