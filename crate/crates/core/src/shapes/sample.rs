//! Boundary sampling on horizontal level sets.
//!
//! Points are produced slice by slice, so boundary points sharing a height
//! share it exactly. Levels are refined by bisection until neighbouring
//! slices are within the requested spacing of each other.

use std::f64::consts::PI;

use super::model::{RayCast, SetModel};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// A point of `M` with its outward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub position: Vec3,
    pub normal: Vec3,
    pub height: f64,
    pub on_contact_line: bool,
}

impl BoundaryPoint {
    pub fn new(position: Vec3, normal: Vec3) -> Self {
        BoundaryPoint {
            position,
            normal,
            height: position.z,
            on_contact_line: position.z <= 0.0,
        }
    }
}

/// Horizontal directions used to trace slices in three dimensions.
fn slice_directions(model: &SetModel, resolution: usize) -> Vec<Vec3> {
    if model.n() == 2 {
        return Vec::new();
    }
    let ext = model.bbox().extent();
    let r = 0.5 * ext.x.max(ext.y);
    let m = ((2.0 * PI * r * resolution as f64 / model.diameter()).ceil() as usize).clamp(16, 2048);
    (0..m)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / m as f64;
            Vec3::new(phi.cos(), phi.sin(), 0.0)
        })
        .collect()
}

/// Boundary points of the slice `{x_n = h}`; at `h = 0` the contact line.
pub fn slice_points(model: &SetModel, h: f64, dirs: &[Vec3]) -> Vec<Vec3> {
    let bbox = model.bbox();
    let intervals = |o: &Vec3, d: &Vec3| {
        if h <= 0.0 {
            model.unclipped_intervals(o, d)
        } else {
            model.ray_intervals(o, d)
        }
    };
    if model.n() == 2 {
        let o = Vec3::new(bbox.min.x - 1.0, 0.0, h);
        let d = Vec3::new(1.0, 0.0, 0.0);
        return intervals(&o, &d)
            .iter()
            .flat_map(|&(a, b)| [o + a * d, o + b * d])
            .collect();
    }
    let c = Vec3::new(bbox.center().x, bbox.center().y, h);
    let mut out = Vec::new();
    for d in dirs {
        for (a, b) in intervals(&c, d) {
            for t in [a, b] {
                if t > 0.0 {
                    out.push(c + t * d);
                }
            }
        }
    }
    out
}

fn hausdorff(a: &[Vec3], b: &[Vec3]) -> f64 {
    let one = |x: &[Vec3], y: &[Vec3]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Largest distance between two points of a sample.
pub fn max_pair_distance(points: &[BoundaryPoint]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max((p.position - q.position).norm());
        }
    }
    best
}

fn level_gap(a: &[Vec3], b: &[Vec3]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (false, false) => hausdorff(a, b),
        (false, true) => spread(a),
        (true, false) => spread(b),
    }
}

fn spread(a: &[Vec3]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, p) in a.iter().enumerate() {
        for q in &a[i + 1..] {
            best = best.max((p - q).norm());
        }
    }
    best
}

/// Heights at which the boundary is sliced, with their point sets.
fn refined_levels(model: &SetModel, spacing: f64, dirs: &[Vec3]) -> Vec<(f64, Vec<Vec3>)> {
    let top = model.max_height();
    let count = (top / spacing).ceil().max(2.0) as usize;
    let mut levels: Vec<(f64, Vec<Vec3>)> = (0..=count)
        .map(|j| {
            let h = top * j as f64 / count as f64;
            let pts = if j == count {
                Vec::new()
            } else {
                slice_points(model, h, dirs)
            };
            (h, pts)
        })
        .collect();
    let min_gap = spacing * 1e-6;
    let mut out = Vec::with_capacity(levels.len());
    let first = levels.remove(0);
    out.push(first);
    for next in levels {
        refine(
            model,
            out.last().unwrap().clone(),
            next.clone(),
            spacing,
            min_gap,
            dirs,
            0,
            &mut out,
        );
        out.push(next);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn refine(
    model: &SetModel,
    lo: (f64, Vec<Vec3>),
    hi: (f64, Vec<Vec3>),
    spacing: f64,
    min_gap: f64,
    dirs: &[Vec3],
    depth: usize,
    out: &mut Vec<(f64, Vec<Vec3>)>,
) {
    if depth >= 24 || hi.0 - lo.0 < min_gap || level_gap(&lo.1, &hi.1) <= spacing {
        return;
    }
    let h = 0.5 * (lo.0 + hi.0);
    let mid = (h, slice_points(model, h, dirs));
    refine(
        model,
        lo,
        mid.clone(),
        spacing,
        min_gap,
        dirs,
        depth + 1,
        out,
    );
    out.push(mid.clone());
    refine(model, mid, hi, spacing, min_gap, dirs, depth + 1, out);
}

/// Samples `M` with spacing at most `diam(E) / resolution`.
///
/// Contact-line points are included with `on_contact_line = true`. Every
/// other point is validated by probing the indicator on both sides along the
/// normal.
pub fn sample_boundary(model: &SetModel, resolution: usize) -> Result<Vec<BoundaryPoint>> {
    if resolution == 0 {
        return Err(Error::SamplingFailure("resolution must be positive".into()));
    }
    let diam = model.diameter();
    let spacing = diam / resolution as f64;
    let dirs = slice_directions(model, resolution);
    let levels = refined_levels(model, spacing, &dirs);
    let center = model.bbox().center();
    let mut points = Vec::new();
    for (h, pts) in levels {
        for mut p in pts {
            p.z = h;
            let normal = model.normal(&p);
            points.push(BoundaryPoint {
                position: p,
                normal,
                height: h,
                on_contact_line: h <= 0.0,
            });
        }
    }
    let angle = |p: &BoundaryPoint| {
        if model.n() == 2 {
            p.position.x
        } else {
            (p.position.y - center.y).atan2(p.position.x - center.x)
        }
    };
    points.sort_by(|a, b| {
        a.height
            .total_cmp(&b.height)
            .then(angle(a).total_cmp(&angle(b)))
    });

    let mut failures = 0usize;
    let mut probed = 0usize;
    for p in points.iter().filter(|p| !p.on_contact_line) {
        probed += 1;
        if !probe_ok(model, p) {
            failures += 1;
        }
    }
    if probed > 0 && failures as f64 > 1e-3 * probed as f64 {
        return Err(Error::SamplingFailure(format!(
            "{failures} of {probed} normal probes disagree with the indicator"
        )));
    }
    Ok(points)
}

/// Inside/outside probe along the normal at distance `diam / 10^4`
/// (shortened near the contact line).
pub fn probe_ok(model: &SetModel, p: &BoundaryPoint) -> bool {
    let t = (model.diameter() * 1e-4).min(0.5 * p.height);
    model.contains(&(p.position - t * p.normal)) && !model.contains(&(p.position + t * p.normal))
}

/// Nearest boundary point of `model` on the line through `x` along `dir`.
pub fn project_along(model: &SetModel, x: &Vec3, dir: &Vec3) -> Option<BoundaryPoint> {
    let iv = model.ray_intervals(x, dir);
    let t = iv
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|t| t.is_finite())
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))?;
    let p = x + t * dir;
    if p.z <= 0.0 {
        return None;
    }
    Some(BoundaryPoint::new(p, model.normal(&p)))
}

/// Boundary point at height `h` on the meridian through the slice centre in
/// the direction `dir` (outermost crossing).
pub fn meridian_point(model: &SetModel, h: f64, dir: &Vec3) -> Option<BoundaryPoint> {
    let c = Vec3::new(model.bbox().center().x, model.bbox().center().y, h);
    let iv = model.ray_intervals(&c, dir);
    let t = iv.last()?.1;
    let p = c + t * dir;
    Some(BoundaryPoint::new(p, model.normal(&p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{build_shape, ShapeDocument, ShapeSpec};

    fn model(n: usize, shape: ShapeSpec) -> SetModel {
        build_shape(&ShapeDocument {
            n,
            shape,
            allow_disconnected: true,
        })
        .unwrap()
    }

    #[test]
    fn hemisphere_points_on_sphere_with_radial_normals() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.0));
        let pts = sample_boundary(&m, 64).unwrap();
        assert!(pts.len() > 64);
        for p in &pts {
            assert!((p.position.norm() - 1.0).abs() < 1e-12);
            assert!((p.normal - p.position).norm() < 1e-12);
            assert!(p.height >= 0.0);
        }
    }

    #[test]
    fn spacing_bound_holds() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.3));
        let pts = sample_boundary(&m, 40).unwrap();
        let spacing = m.diameter() / 40.0;
        for p in &pts {
            let nearest = pts
                .iter()
                .filter(|q| *q != p)
                .map(|q| (q.position - p.position).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= spacing * 1.0001, "gap {nearest} > {spacing}");
        }
    }

    #[test]
    fn contact_line_cosine() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.5));
        let pts = sample_boundary(&m, 32).unwrap();
        let contact: Vec<_> = pts.iter().filter(|p| p.on_contact_line).collect();
        assert_eq!(contact.len(), 2);
        for p in contact {
            assert!((-p.normal.z - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_heights_come_in_mirror_pairs() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.2));
        let pts = sample_boundary(&m, 32).unwrap();
        for p in &pts {
            assert!(pts
                .iter()
                .any(|q| q.height == p.height && (q.position.x + p.position.x).abs() < 1e-12));
        }
    }

    #[test]
    fn union_count_is_sum_of_parts() {
        // oracle: slice each primitive separately at the union's heights
        let a = model(2, ShapeSpec::ball_cap(1.0, 0.2));
        let b = model(2, ShapeSpec::ball_cap_at(0.6, 0.1, vec![3.0]));
        let u = model(
            2,
            ShapeSpec::Union {
                members: vec![a.spec().clone(), b.spec().clone()],
            },
        );
        let pts = sample_boundary(&u, 48).unwrap();
        let mut heights: Vec<f64> = pts.iter().map(|p| p.height).collect();
        heights.dedup();
        let parts: usize = heights
            .iter()
            .map(|&h| slice_points(&a, h, &[]).len() + slice_points(&b, h, &[]).len())
            .sum();
        let total = pts.len();
        assert!(
            (total as f64 - parts as f64).abs() <= 0.05 * parts as f64,
            "{total} vs {parts}"
        );
    }

    #[test]
    fn three_dimensional_ball_sampling() {
        let m = model(3, ShapeSpec::ball_cap(1.0, 0.0));
        let pts = sample_boundary(&m, 8).unwrap();
        for p in &pts {
            assert!((p.position.norm() - 1.0).abs() < 1e-12);
        }
    }
}
