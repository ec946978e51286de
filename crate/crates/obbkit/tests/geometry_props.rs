//! Property checks for the rotated-box geometry core, backed by the
//! rasterization and angle-sweep oracles in `common`.

mod common;

use common::{naive_raster_iou, random_box, raster_iou, rng, sweep_min_rect_area};
use obbkit::geometry::{
    hbb_envelope, min_area_rect, obb_to_quad, polygon_area, quad_to_obb, rotated_iou, wrap_angle,
    Point, Quad, RotatedBox,
};
use rand::Rng;

fn rigid(b: &RotatedBox, phi: f64, tx: f64, ty: f64) -> RotatedBox {
    let (s, c) = phi.sin_cos();
    let cx = c * b.cx() - s * b.cy() + tx;
    let cy = s * b.cx() + c * b.cy() + ty;
    RotatedBox::new(cx, cy, b.w(), b.h(), b.theta() + phi).unwrap()
}

#[test]
fn iou_is_exactly_symmetric() {
    let mut r = rng(11);
    for _ in 0..2000 {
        let a = random_box(&mut r, -50.0, 50.0, 1.0, 60.0);
        let b = random_box(&mut r, -50.0, 50.0, 1.0, 60.0);
        let ab = rotated_iou(&a, &b);
        let ba = rotated_iou(&b, &a);
        assert_eq!(ab.to_bits(), ba.to_bits(), "asymmetric for {a:?} vs {b:?}");
    }
}

#[test]
fn iou_stays_in_unit_range_and_identity_is_one() {
    let mut r = rng(12);
    for _ in 0..2000 {
        let a = random_box(&mut r, -100.0, 100.0, 0.5, 200.0);
        let b = random_box(&mut r, -100.0, 100.0, 0.5, 200.0);
        let iou = rotated_iou(&a, &b);
        assert!((0.0..=1.0).contains(&iou));
        assert!((rotated_iou(&a, &a) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn iou_is_rigid_invariant() {
    let mut r = rng(13);
    for _ in 0..500 {
        let a = random_box(&mut r, -20.0, 20.0, 1.0, 40.0);
        let b = random_box(&mut r, -20.0, 20.0, 1.0, 40.0);
        let phi = r.gen_range(-3.0..3.0);
        let (tx, ty) = (r.gen_range(-100.0..100.0), r.gen_range(-100.0..100.0));
        let before = rotated_iou(&a, &b);
        let after = rotated_iou(&rigid(&a, phi, tx, ty), &rigid(&b, phi, tx, ty));
        assert!(
            (before - after).abs() < 1e-9,
            "rigid motion changed IoU: {before} vs {after}"
        );
    }
}

#[test]
fn iou_is_uniform_scale_invariant() {
    let mut r = rng(14);
    for _ in 0..500 {
        let a = random_box(&mut r, -20.0, 20.0, 1.0, 40.0);
        let b = random_box(&mut r, -20.0, 20.0, 1.0, 40.0);
        let s = r.gen_range(0.1..10.0);
        let scale = |x: &RotatedBox| {
            RotatedBox::new(x.cx() * s, x.cy() * s, x.w() * s, x.h() * s, x.theta()).unwrap()
        };
        let before = rotated_iou(&a, &b);
        let after = rotated_iou(&scale(&a), &scale(&b));
        assert!((before - after).abs() < 1e-9);
    }
}

#[test]
fn quad_round_trip_recovers_normal_form() {
    let mut r = rng(15);
    for _ in 0..2000 {
        let b = random_box(&mut r, -100.0, 100.0, 1.0, 150.0);
        let back = quad_to_obb(&obb_to_quad(&b)).unwrap();
        assert!((back.cx() - b.cx()).abs() < 1e-6);
        assert!((back.cy() - b.cy()).abs() < 1e-6);
        assert!((back.w() - b.w()).abs() < 1e-6);
        assert!((back.h() - b.h()).abs() < 1e-6);
        assert!(wrap_angle(back.theta() - b.theta()).abs() < 1e-6);
    }
}

#[test]
fn disjoint_envelopes_imply_zero_iou() {
    let mut r = rng(16);
    let mut checked = 0;
    for _ in 0..5000 {
        let a = random_box(&mut r, 0.0, 300.0, 1.0, 80.0);
        let b = random_box(&mut r, 0.0, 300.0, 1.0, 80.0);
        let ea = hbb_envelope(&a);
        let eb = hbb_envelope(&b);
        if !ea.intersects(&eb) {
            checked += 1;
            assert_eq!(rotated_iou(&a, &b), 0.0);
        }
    }
    assert!(checked > 500, "generator produced too few disjoint pairs");
}

#[test]
fn fast_raster_oracle_matches_literal_rasterization() {
    let mut r = rng(17);
    for _ in 0..25 {
        let a = random_box(&mut r, 0.0, 60.0, 2.0, 50.0);
        let b = random_box(&mut r, 0.0, 60.0, 2.0, 50.0);
        let fast = raster_iou(&a, &b, 256);
        let naive = naive_raster_iou(&a, &b, 256);
        assert!(
            (fast - naive).abs() < 1e-12,
            "row-interval raster disagrees with cell loop: {fast} vs {naive}"
        );
    }
}

#[test]
fn analytic_iou_tracks_raster_oracle() {
    let mut r = rng(18);
    for _ in 0..300 {
        let a = random_box(&mut r, 0.0, 200.0, 1.0, 200.0);
        let b = random_box(&mut r, 0.0, 200.0, 1.0, 200.0);
        let analytic = rotated_iou(&a, &b);
        let oracle = raster_iou(&a, &b, 2048);
        assert!(
            (analytic - oracle).abs() <= 1e-3,
            "IoU {analytic} vs raster {oracle} for {a:?} / {b:?}"
        );
    }
}

#[test]
fn min_rect_matches_angle_sweep_oracle() {
    let mut r = rng(19);
    for _ in 0..200 {
        // Convex quads: four points on a random ellipse at sorted angles.
        let (cx, cy) = (r.gen_range(-50.0..50.0), r.gen_range(-50.0..50.0));
        let (ea, eb) = (r.gen_range(5.0..40.0), r.gen_range(5.0..40.0));
        let tilt = r.gen_range(0.0..std::f64::consts::PI);
        let mut angles: Vec<f64> = (0..4)
            .map(|_| r.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if angles.windows(2).any(|w| w[1] - w[0] < 0.2) {
            continue; // skip nearly-degenerate quads
        }
        let pts: Vec<(f64, f64)> = angles
            .iter()
            .map(|&t| {
                let (x, y) = (ea * t.cos(), eb * t.sin());
                (
                    cx + x * tilt.cos() - y * tilt.sin(),
                    cy + x * tilt.sin() + y * tilt.cos(),
                )
            })
            .collect();
        let quad = Quad::new([
            Point { x: pts[0].0, y: pts[0].1 },
            Point { x: pts[1].0, y: pts[1].1 },
            Point { x: pts[2].0, y: pts[2].1 },
            Point { x: pts[3].0, y: pts[3].1 },
        ])
        .unwrap();
        let fit = min_area_rect(quad.vertices()).unwrap();
        let quad_area = polygon_area(quad.vertices());
        assert!(fit.area() >= quad_area - 1e-9, "enclosure smaller than the quad");
        let sweep = sweep_min_rect_area(&pts, 1e-4);
        // Calipers is a true minimum: the sweep can never beat it, and
        // after zoom refinement it must agree tightly.
        assert!(fit.area() <= sweep * (1.0 + 1e-9));
        assert!(
            sweep <= fit.area() * (1.0 + 1e-6),
            "sweep {sweep} vs calipers {}",
            fit.area()
        );
    }
}
