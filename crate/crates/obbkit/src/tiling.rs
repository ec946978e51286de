//! Splitting large images into overlapping patches and merging per-tile
//! detections back into image coordinates.
//!
//! Patches are `patch x patch` windows laid out with stride
//! `patch - gap`, so adjacent windows overlap by `gap` pixels. The final
//! window along each axis is clamped against the image edge; images no
//! larger than a patch get a single window that the extractor pads.
//! Every image pixel is covered by at least one window.
//!
//! The toolkit manipulates geometry only: [`TilePlan::windows`] hands
//! the caller everything needed to slice pixels, but no image codec
//! lives here.

use crate::error::{Error, Result};
use crate::geometry::{
    clip_polygon_to_quad, min_area_rect, obb_to_quad, point, polygon_area, Quad, RotatedBox,
};
use crate::nms::{rotated_nms, Detection, NmsMode};
use crate::annotations::AnnotationSet;
use serde::{Deserialize, Serialize};

/// Deterministic set of patch windows covering an image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilePlan {
    pub image_w: u32,
    pub image_h: u32,
    pub patch: u32,
    pub gap: u32,
    /// Top-left corners of every window, row-major (y outer, x inner).
    pub origins: Vec<(u32, u32)>,
}

/// One patch window plus the source rectangle available inside the
/// image; when the window reaches past the edge the extractor pads the
/// remainder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TileWindow {
    pub x0: u32,
    pub y0: u32,
    /// Window side (equals the plan's patch size).
    pub patch: u32,
    /// Pixels actually available from the source image.
    pub src_w: u32,
    pub src_h: u32,
}

impl TilePlan {
    pub fn tile_count(&self) -> usize {
        self.origins.len()
    }

    /// Iterate windows with their source extents, for pixel extraction.
    pub fn windows(&self) -> impl Iterator<Item = TileWindow> + '_ {
        self.origins.iter().map(move |&(x0, y0)| TileWindow {
            x0,
            y0,
            patch: self.patch,
            src_w: self.patch.min(self.image_w - x0),
            src_h: self.patch.min(self.image_h - y0),
        })
    }
}

fn axis_origins(dim: u32, patch: u32, stride: u32) -> Vec<u32> {
    let mut origins = Vec::new();
    let mut k = 0u64;
    loop {
        let o = k * stride as u64;
        if o + patch as u64 >= dim as u64 {
            origins.push(dim.saturating_sub(patch));
            break;
        }
        origins.push(o as u32);
        k += 1;
    }
    origins.dedup();
    origins
}

/// Lay out patch windows over an image.
///
/// `patch` must exceed `gap`; image dimensions must be at least 1.
pub fn plan_tiles(image_w: u32, image_h: u32, patch: u32, gap: u32) -> Result<TilePlan> {
    if patch <= gap {
        return Err(Error::argument(format!(
            "patch ({patch}) must be larger than gap ({gap})"
        )));
    }
    if image_w == 0 || image_h == 0 {
        return Err(Error::argument("image dimensions must be at least 1"));
    }
    let stride = patch - gap;
    let xs = axis_origins(image_w, patch, stride);
    let ys = axis_origins(image_h, patch, stride);
    let mut origins = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            origins.push((x, y));
        }
    }
    Ok(TilePlan { image_w, image_h, patch, gap, origins })
}

/// One object clipped into a tile, in tile coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileObject {
    pub bbox: RotatedBox,
    pub class_id: usize,
    /// Fraction of the original box area inside the tile window, in
    /// `(0, 1]`.
    pub visibility: f64,
    /// Set when the tile window cut the box.
    pub truncated: bool,
    pub difficult: bool,
}

/// Annotations remapped into one tile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileAnnotation {
    pub origin: (u32, u32),
    pub objects: Vec<TileObject>,
}

/// Clip an annotation set into every tile of a plan.
///
/// Each ground-truth quad is intersected with each tile window; objects
/// keeping at least `keep_visibility` of their area survive, refit to a
/// minimum-area rotated box and translated into tile coordinates.
pub fn clip_annotations(
    gts: &AnnotationSet,
    plan: &TilePlan,
    keep_visibility: f64,
) -> Result<Vec<TileAnnotation>> {
    if !(keep_visibility > 0.0 && keep_visibility <= 1.0) {
        return Err(Error::argument(format!(
            "keep_visibility must be in (0, 1], got {keep_visibility}"
        )));
    }
    let patch = plan.patch as f64;
    let mut tiles = Vec::with_capacity(plan.origins.len());
    for &(x0, y0) in &plan.origins {
        let (fx, fy) = (x0 as f64, y0 as f64);
        let window = Quad::new([
            point(fx, fy),
            point(fx + patch, fy),
            point(fx + patch, fy + patch),
            point(fx, fy + patch),
        ])?;
        let mut objects = Vec::new();
        for obj in &gts.objects {
            let quad = obb_to_quad(&obj.bbox);
            let clipped = clip_polygon_to_quad(quad.vertices(), &window);
            let clipped_area = polygon_area(&clipped);
            if clipped_area <= 0.0 {
                continue;
            }
            // Same shoelace path for both areas, so a fully contained box
            // (clip returns its corners unchanged) gets exactly 1.0.
            let visibility = (clipped_area / quad.area()).min(1.0);
            if visibility < keep_visibility {
                continue;
            }
            let refit = min_area_rect(&clipped)?;
            objects.push(TileObject {
                bbox: refit.translated(-fx, -fy),
                class_id: obj.class_id,
                visibility,
                truncated: visibility < 1.0 - 1e-9,
                difficult: obj.difficult,
            });
        }
        tiles.push(TileAnnotation { origin: (x0, y0), objects });
    }
    Ok(tiles)
}

/// Merge per-tile detections back into image coordinates and apply
/// global rotated NMS. Scores are untouched; the kept detections come
/// back in descending score order.
pub fn merge_detections(
    per_tile: &[((u32, u32), Vec<Detection>)],
    iou_thr: f64,
    mode: NmsMode,
) -> Vec<Detection> {
    let mut all = Vec::new();
    for ((x0, y0), dets) in per_tile {
        for d in dets {
            all.push(Detection {
                bbox: d.bbox.translated(*x0 as f64, *y0 as f64),
                class_id: d.class_id,
                score: d.score,
            });
        }
    }
    rotated_nms(&all, iou_thr, mode)
        .into_iter()
        .map(|i| all[i].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::Object;

    #[test]
    fn exact_fit_is_single_tile() {
        let plan = plan_tiles(800, 800, 800, 150).unwrap();
        assert_eq!(plan.origins, vec![(0, 0)]);
    }

    #[test]
    fn clamped_second_window() {
        let plan = plan_tiles(1000, 800, 800, 150).unwrap();
        assert_eq!(plan.origins, vec![(0, 0), (200, 0)]);
    }

    #[test]
    fn exact_triple_cover() {
        let plan = plan_tiles(2100, 800, 800, 150).unwrap();
        let xs: Vec<u32> = plan.origins.iter().map(|&(x, _)| x).collect();
        assert_eq!(xs, vec![0, 650, 1300]);
    }

    #[test]
    fn small_image_single_padded_tile() {
        let plan = plan_tiles(300, 200, 800, 150).unwrap();
        assert_eq!(plan.origins, vec![(0, 0)]);
        let w = plan.windows().next().unwrap();
        assert_eq!((w.src_w, w.src_h), (300, 200));
        assert_eq!(w.patch, 800);
    }

    #[test]
    fn rejects_gap_not_smaller_than_patch() {
        assert!(plan_tiles(1000, 1000, 150, 150).is_err());
        assert!(plan_tiles(1000, 1000, 100, 150).is_err());
        assert!(plan_tiles(0, 100, 800, 150).is_err());
    }

    fn set_with(bbox: RotatedBox) -> AnnotationSet {
        let mut set = AnnotationSet::new("img", 1000.0, 800.0);
        set.objects.push(Object { bbox, class_id: 0, difficult: false });
        set
    }

    #[test]
    fn fully_inside_object_keeps_visibility_one() {
        let plan = plan_tiles(1000, 800, 800, 150).unwrap();
        let bbox = RotatedBox::new(100.0, 100.0, 40.0, 20.0, 0.5).unwrap();
        let tiles = clip_annotations(&set_with(bbox), &plan, 0.5).unwrap();
        // Tile (0,0) contains it fully; tile (200,0) also contains it? No:
        // x range of the box is within ~[72, 128], so only tile (0,0).
        assert_eq!(tiles[0].objects.len(), 1);
        let obj = &tiles[0].objects[0];
        assert_eq!(obj.visibility, 1.0);
        assert!(!obj.truncated);
        assert_eq!(tiles[1].objects.len(), 0);
    }

    #[test]
    fn straddling_object_split_by_visibility() {
        let plan = plan_tiles(1000, 800, 800, 150).unwrap();
        // Axis-aligned 10x10 box with exactly 60% of its width left of
        // x = 800 (tile 0's right edge): x in [794, 804].
        let bbox = RotatedBox::new(799.0, 400.0, 10.0, 10.0, 0.0).unwrap();
        let tiles = clip_annotations(&set_with(bbox), &plan, 0.7).unwrap();
        assert!(tiles[0].objects.is_empty(), "60% visible < 70% keep threshold");
        // In tile (200, 0) the box is fully inside.
        assert_eq!(tiles[1].objects.len(), 1);
        assert_eq!(tiles[1].objects[0].visibility, 1.0);

        let tiles_low = clip_annotations(&set_with(bbox), &plan, 0.5).unwrap();
        let obj = &tiles_low[0].objects[0];
        assert!((obj.visibility - 0.6).abs() < 1e-9);
        assert!(obj.truncated);
        // Translated into tile frame: clipped to x in [794, 800].
        assert!((obj.bbox.cx() - 797.0).abs() < 1e-9);
    }

    #[test]
    fn keep_visibility_one_requires_full_containment() {
        let plan = plan_tiles(1000, 800, 800, 150).unwrap();
        let bbox = RotatedBox::new(799.0, 400.0, 10.0, 10.0, 0.0).unwrap();
        let tiles = clip_annotations(&set_with(bbox), &plan, 1.0).unwrap();
        assert!(tiles[0].objects.is_empty());
        assert_eq!(tiles[1].objects.len(), 1);
    }

    fn det(cx: f64, cy: f64, score: f64) -> Detection {
        Detection {
            bbox: RotatedBox::new(cx, cy, 20.0, 10.0, 0.3).unwrap(),
            class_id: 0,
            score,
        }
    }

    #[test]
    fn merge_translates_and_dedups() {
        // The same physical object seen from two overlapping tiles.
        let per_tile = vec![
            ((0u32, 0u32), vec![det(700.0, 100.0, 0.9)]),
            ((650u32, 0u32), vec![det(50.0, 100.0, 0.7)]),
        ];
        let merged = merge_detections(&per_tile, 0.5, NmsMode::ClassAware);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].score, 0.9);
        assert!((merged[0].bbox.cx() - 700.0).abs() < 1e-12);
    }

    #[test]
    fn merge_keeps_disjoint_objects() {
        let per_tile = vec![
            ((0u32, 0u32), vec![det(100.0, 100.0, 0.9)]),
            ((650u32, 0u32), vec![det(100.0, 100.0, 0.8)]),
        ];
        let merged = merge_detections(&per_tile, 0.5, NmsMode::ClassAware);
        assert_eq!(merged.len(), 2);
    }

    #[test]
    fn single_tile_merge_is_nms() {
        let dets = vec![det(10.0, 10.0, 0.5), det(10.0, 10.0, 0.6)];
        let merged = merge_detections(&[((0, 0), dets.clone())], 0.5, NmsMode::ClassAware);
        let direct: Vec<Detection> = rotated_nms(&dets, 0.5, NmsMode::ClassAware)
            .into_iter()
            .map(|i| dets[i].clone())
            .collect();
        assert_eq!(merged, direct);
    }
}
