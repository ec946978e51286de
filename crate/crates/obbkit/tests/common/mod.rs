//! Shared test oracles, independent of the library's implementation
//! paths: the IoU oracle rasterizes instead of clipping, the NMS oracle
//! is a plain quadratic greedy loop, and the rectangle-fit oracle
//! sweeps angles instead of walking hull edges.

#![allow(dead_code)]

use obbkit::geometry::RotatedBox;
use obbkit::nms::{Detection, NmsMode};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random box with centers in `[clo, chi]` and sizes log-uniform in
/// `[slo, shi]`; any angle.
pub fn random_box(r: &mut ChaCha8Rng, clo: f64, chi: f64, slo: f64, shi: f64) -> RotatedBox {
    let cx = r.gen_range(clo..chi);
    let cy = r.gen_range(clo..chi);
    let w = (r.gen_range(slo.ln()..shi.ln())).exp();
    let h = (r.gen_range(slo.ln()..shi.ln())).exp();
    let theta = r.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
    RotatedBox::new(cx, cy, w, h, theta).unwrap()
}

/// Axis slab of one box: point p is inside iff both projections onto
/// the box axes stay within the half-extents.
struct Slabs {
    cx: f64,
    cy: f64,
    ux: f64,
    uy: f64,
    vx: f64,
    vy: f64,
    half_w: f64,
    half_h: f64,
}

impl Slabs {
    fn of(b: &RotatedBox) -> Slabs {
        Slabs {
            cx: b.cx(),
            cy: b.cy(),
            ux: b.theta().cos(),
            uy: b.theta().sin(),
            vx: -b.theta().sin(),
            vy: b.theta().cos(),
            half_w: b.w() * 0.5,
            half_h: b.h() * 0.5,
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.cx;
        let dy = y - self.cy;
        (dx * self.ux + dy * self.uy).abs() <= self.half_w
            && (dx * self.vx + dy * self.vy).abs() <= self.half_h
    }

    /// The x-interval of points inside the box at height `y`, or None.
    fn row_interval(&self, y: f64) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let dy = y - self.cy;
        for (a, c, half) in [
            (self.ux, self.uy * dy, self.half_w),
            (self.vx, self.vy * dy, self.half_h),
        ] {
            if a.abs() < 1e-300 {
                if c.abs() > half {
                    return None;
                }
            } else {
                let t0 = (-half - c) / a;
                let t1 = (half - c) / a;
                lo = lo.max(t0.min(t1));
                hi = hi.min(t0.max(t1));
            }
        }
        if lo > hi {
            None
        } else {
            Some((lo + self.cx, hi + self.cx))
        }
    }

    fn corners(&self) -> [(f64, f64); 4] {
        let mut out = [(0.0, 0.0); 4];
        for (i, (su, sv)) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
            .into_iter()
            .enumerate()
        {
            out[i] = (
                self.cx + su * self.half_w * self.ux + sv * self.half_h * self.vx,
                self.cy + su * self.half_w * self.uy + sv * self.half_h * self.vy,
            );
        }
        out
    }
}

fn joint_envelope(a: &Slabs, b: &Slabs) -> (f64, f64, f64, f64) {
    let mut xmin = f64::INFINITY;
    let mut ymin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in [a, b] {
        for (x, y) in s.corners() {
            xmin = xmin.min(x);
            ymin = ymin.min(y);
            xmax = xmax.max(x);
            ymax = ymax.max(y);
        }
    }
    (xmin, ymin, xmax, ymax)
}

/// Count grid cells (centers at `x0 + (i + 0.5) dx`, `i in 0..n`) whose
/// center lies in the closed interval `[lo, hi]`.
fn cells_in_interval(lo: f64, hi: f64, x0: f64, dx: f64, n: i64) -> i64 {
    let imin = ((lo - x0) / dx - 0.5).ceil().max(0.0) as i64;
    let imax = (((hi - x0) / dx - 0.5).floor()).min((n - 1) as f64) as i64;
    if ((hi - x0) / dx - 0.5).floor() < 0.0 {
        return 0;
    }
    (imax - imin + 1).max(0)
}

/// Rasterization IoU on an `n x n` cell-center grid over the joint
/// envelope: counts per row come from closed-form row intervals, so
/// this equals a literal triple loop without its cost.
pub fn raster_iou(a: &RotatedBox, b: &RotatedBox, n: i64) -> f64 {
    let sa = Slabs::of(a);
    let sb = Slabs::of(b);
    let (xmin, ymin, xmax, ymax) = joint_envelope(&sa, &sb);
    let dx = (xmax - xmin) / n as f64;
    let dy = (ymax - ymin) / n as f64;
    if !(dx > 0.0 && dy > 0.0) {
        return 0.0;
    }
    let mut inter = 0i64;
    let mut union = 0i64;
    for j in 0..n {
        let y = ymin + (j as f64 + 0.5) * dy;
        let ia = sa.row_interval(y);
        let ib = sb.row_interval(y);
        let ca = ia.map_or(0, |(lo, hi)| cells_in_interval(lo, hi, xmin, dx, n));
        let cb = ib.map_or(0, |(lo, hi)| cells_in_interval(lo, hi, xmin, dx, n));
        let cab = match (ia, ib) {
            (Some((alo, ahi)), Some((blo, bhi))) => {
                let lo = alo.max(blo);
                let hi = ahi.min(bhi);
                if lo <= hi {
                    cells_in_interval(lo, hi, xmin, dx, n)
                } else {
                    0
                }
            }
            _ => 0,
        };
        inter += cab;
        union += ca + cb - cab;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Literal cell-by-cell rasterization; used to validate [`raster_iou`].
pub fn naive_raster_iou(a: &RotatedBox, b: &RotatedBox, n: i64) -> f64 {
    let sa = Slabs::of(a);
    let sb = Slabs::of(b);
    let (xmin, ymin, xmax, ymax) = joint_envelope(&sa, &sb);
    let dx = (xmax - xmin) / n as f64;
    let dy = (ymax - ymin) / n as f64;
    if !(dx > 0.0 && dy > 0.0) {
        return 0.0;
    }
    let mut inter = 0i64;
    let mut union = 0i64;
    for j in 0..n {
        let y = ymin + (j as f64 + 0.5) * dy;
        for i in 0..n {
            let x = xmin + (i as f64 + 0.5) * dx;
            let in_a = sa.contains(x, y);
            let in_b = sb.contains(x, y);
            if in_a && in_b {
                inter += 1;
            }
            if in_a || in_b {
                union += 1;
            }
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Exhaustive quadratic greedy NMS: repeatedly select the best remaining
/// detection by linear scan, then suppress against it.
pub fn reference_nms(dets: &[Detection], iou_thr: f64, mode: NmsMode) -> Vec<usize> {
    let n = dets.len();
    let mut alive = vec![true; n];
    let mut kept = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(j) if dets[i].score > dets[j].score => Some(i),
                other => other,
            };
        }
        let Some(top) = best else { break };
        alive[top] = false;
        kept.push(top);
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            if mode == NmsMode::ClassAware && dets[i].class_id != dets[top].class_id {
                continue;
            }
            if obbkit::geometry::rotated_iou(&dets[i].bbox, &dets[top].bbox) > iou_thr {
                alive[i] = false;
            }
        }
    }
    kept
}

/// Area of the smallest enclosing rectangle at a fixed angle.
fn enclosing_area_at(points: &[(f64, f64)], phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let mut umin = f64::INFINITY;
    let mut umax = f64::NEG_INFINITY;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for &(x, y) in points {
        let u = c * x + s * y;
        let v = -s * x + c * y;
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    (umax - umin) * (vmax - vmin)
}

/// Brute-force minimum enclosing-rectangle area: a coarse sweep over
/// `[0, pi/2)` followed by two zoom rounds around the best angles.
pub fn sweep_min_rect_area(points: &[(f64, f64)], coarse_step: f64) -> f64 {
    let mut samples: Vec<(f64, f64)> = Vec::new(); // (area, angle)
    let mut phi = 0.0;
    while phi < std::f64::consts::FRAC_PI_2 {
        samples.push((enclosing_area_at(points, phi), phi));
        phi += coarse_step;
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut best = samples[0].0;
    // Refine around the three best coarse basins.
    for &(_, center) in samples.iter().take(3) {
        let mut span = coarse_step;
        let mut mid = center;
        for _ in 0..3 {
            let step = span / 100.0;
            let mut local_best = (f64::INFINITY, mid);
            let mut a = mid - span;
            while a <= mid + span {
                let area = enclosing_area_at(points, a);
                if area < local_best.0 {
                    local_best = (area, a);
                }
                a += step;
            }
            best = best.min(local_best.0);
            mid = local_best.1;
            span = step;
        }
    }
    best
}
