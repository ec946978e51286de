//! Oriented sampling grids for aligned convolution.
//!
//! For a rotated proposal and an odd k x k kernel, the sample point of
//! kernel tap `(u, v)` is `center + R(theta) * (u * w / k, v * h / k)`:
//! a uniform grid of interior cell centers spanning the box. Offsets are
//! reported against the standard dilation-1 convolution taps of the
//! feature cell, divided by the stride so downstream consumers get
//! feature-map units. A box that is axis-aligned, sized `k * stride`,
//! and centered on its cell reproduces the standard taps with exactly
//! zero offsets.

use crate::error::{Error, Result};
use crate::geometry::{point, Point, RotatedBox};

/// Image-space sample points and feature-unit offsets for one proposal.
#[derive(Clone, Debug)]
pub struct SamplingGrid {
    /// Kernel side; odd.
    pub k: usize,
    /// Feature-map stride in pixels.
    pub stride: f64,
    /// k*k image-space sample points, row-major over (v, u).
    pub points: Vec<Point>,
    /// k*k offsets from the standard conv taps, in feature-map units.
    pub offsets: Vec<Point>,
}

/// Compute the aligned sampling grid of `bbox` for kernel side `k` at
/// feature cell `(i, j)`.
///
/// Taps run `u, v` in `-(k-1)/2 ..= (k-1)/2`, row-major over `(v, u)`;
/// `u` follows the box's long axis and `v` its short axis.
pub fn align_sampling_grid(
    bbox: &RotatedBox,
    k: usize,
    stride: f64,
    cell: (usize, usize),
) -> Result<SamplingGrid> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::argument(format!("kernel side must be odd, got {k}")));
    }
    if !(stride > 0.0 && stride.is_finite()) {
        return Err(Error::argument(format!("stride must be positive, got {stride}")));
    }
    let half = (k as i64 - 1) / 2;
    let u_axis = bbox.long_axis();
    let v_axis = bbox.short_axis();
    let center = bbox.center();
    let cell_center = point(
        (cell.0 as f64 + 0.5) * stride,
        (cell.1 as f64 + 0.5) * stride,
    );
    let kf = k as f64;
    let mut points = Vec::with_capacity(k * k);
    let mut offsets = Vec::with_capacity(k * k);
    for v in -half..=half {
        for u in -half..=half {
            let s = u as f64 * bbox.w() / kf;
            let t = v as f64 * bbox.h() / kf;
            let p = center + u_axis * s + v_axis * t;
            let tap = point(
                cell_center.x + u as f64 * stride,
                cell_center.y + v as f64 * stride,
            );
            points.push(p);
            offsets.push(point((p.x - tap.x) / stride, (p.y - tap.y) / stride));
        }
    }
    Ok(SamplingGrid { k, stride, points, offsets })
}

/// True when every sample point lies inside the closed box.
pub fn grid_inside_box(grid: &SamplingGrid, bbox: &RotatedBox) -> bool {
    grid.points.iter().all(|&p| bbox.contains(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn matched_box_has_zero_offsets() {
        let stride = 8.0;
        let (i, j) = (3, 5);
        let bbox = RotatedBox::new(
            (i as f64 + 0.5) * stride,
            (j as f64 + 0.5) * stride,
            3.0 * stride,
            3.0 * stride,
            0.0,
        )
        .unwrap();
        let grid = align_sampling_grid(&bbox, 3, stride, (i, j)).unwrap();
        assert_eq!(grid.points.len(), 9);
        for off in &grid.offsets {
            assert_eq!(off.x, 0.0);
            assert_eq!(off.y, 0.0);
        }
    }

    #[test]
    fn quarter_turn_permutes_square_grid_onto_standard_taps() {
        // Rotating a size-matched square box by 90 degrees permutes the
        // sample set onto the standard taps: the center tap stays put and
        // every point still lands on some tap location.
        let stride = 8.0;
        let bbox = RotatedBox::new(12.0, 12.0, 24.0, 24.0, FRAC_PI_2).unwrap();
        let grid = align_sampling_grid(&bbox, 3, stride, (1, 1)).unwrap();
        let center_off = grid.offsets[4];
        assert!(center_off.x.abs() < 1e-12 && center_off.y.abs() < 1e-12);
        for p in &grid.points {
            let hit = grid.offsets.iter().enumerate().any(|(idx, _)| {
                let (v, u) = (idx / 3, idx % 3);
                let tap_x = 12.0 + (u as f64 - 1.0) * stride;
                let tap_y = 12.0 + (v as f64 - 1.0) * stride;
                (p.x - tap_x).abs() < 1e-9 && (p.y - tap_y).abs() < 1e-9
            });
            assert!(hit, "sample {p:?} is not on a standard tap");
        }
    }

    #[test]
    fn wide_box_spreads_columns() {
        let stride = 8.0;
        let bbox = RotatedBox::new(12.0, 12.0, 6.0 * stride, 3.0 * stride, 0.0).unwrap();
        let grid = align_sampling_grid(&bbox, 3, stride, (1, 1)).unwrap();
        // Horizontal taps sit 2*stride apart, so column offsets are -1, 0, +1.
        for v in 0..3 {
            let row = &grid.offsets[v * 3..v * 3 + 3];
            assert!((row[0].x + 1.0).abs() < 1e-12);
            assert!(row[1].x.abs() < 1e-12);
            assert!((row[2].x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_even_kernel() {
        let bbox = RotatedBox::new(0.0, 0.0, 8.0, 8.0, 0.0).unwrap();
        assert!(align_sampling_grid(&bbox, 2, 8.0, (0, 0)).is_err());
        assert!(align_sampling_grid(&bbox, 0, 8.0, (0, 0)).is_err());
    }

    #[test]
    fn grid_points_stay_inside_their_box() {
        let bbox = RotatedBox::new(40.0, 20.0, 30.0, 12.0, 0.9).unwrap();
        let grid = align_sampling_grid(&bbox, 5, 8.0, (4, 2)).unwrap();
        assert!(grid_inside_box(&grid, &bbox));
        // Center tap is the box center.
        let mid = grid.points[grid.points.len() / 2];
        assert!((mid.x - 40.0).abs() < 1e-12 && (mid.y - 20.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_box_fails_containment() {
        let bbox = RotatedBox::new(40.0, 20.0, 30.0, 12.0, 0.9).unwrap();
        let grid = align_sampling_grid(&bbox, 3, 8.0, (4, 2)).unwrap();
        let far = RotatedBox::new(400.0, 400.0, 10.0, 10.0, 0.0).unwrap();
        assert!(!grid_inside_box(&grid, &far));
    }
}
