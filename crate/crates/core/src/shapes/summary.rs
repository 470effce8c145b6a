use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{RayCast, SetModel};
use super::sample::{max_pair_distance, sample_boundary};
use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};

/// Cell-centred grid over a box; the planar case uses a single layer in `y`.
#[derive(Debug, Clone, Copy)]
pub struct VoxelGrid {
    pub n: usize,
    pub origin: Vec3,
    pub step: Vec3,
    pub dims: [usize; 3],
}

impl VoxelGrid {
    /// `resolution` cells along every active axis of `bbox`.
    pub fn over(n: usize, bbox: &Aabb, resolution: usize) -> Self {
        let ext = bbox.extent();
        let res = resolution.max(1);
        let step = Vec3::new(
            ext.x / res as f64,
            if n == 2 { 0.0 } else { ext.y / res as f64 },
            ext.z / res as f64,
        );
        VoxelGrid {
            n,
            origin: bbox.min,
            step,
            dims: [res, if n == 2 { 1 } else { res }, res],
        }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell measure (area for `n = 2`).
    pub fn cell_volume(&self) -> f64 {
        if self.n == 2 {
            self.step.x * self.step.z
        } else {
            self.step.x * self.step.y * self.step.z
        }
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    pub fn unindex(&self, id: usize) -> (usize, usize, usize) {
        let i = id % self.dims[0];
        let j = (id / self.dims[0]) % self.dims[1];
        let k = id / (self.dims[0] * self.dims[1]);
        (i, j, k)
    }

    pub fn center(&self, id: usize) -> Vec3 {
        let (i, j, k) = self.unindex(id);
        Vec3::new(
            self.origin.x + (i as f64 + 0.5) * self.step.x,
            if self.n == 2 {
                0.0
            } else {
                self.origin.y + (j as f64 + 0.5) * self.step.y
            },
            self.origin.z + (k as f64 + 0.5) * self.step.z,
        )
    }

    /// Evaluates a predicate at every cell centre (parallel, order preserving).
    pub fn classify<F: Fn(&Vec3) -> bool + Sync>(&self, f: F) -> Vec<bool> {
        (0..self.len())
            .into_par_iter()
            .map(|id| f(&self.center(id)))
            .collect()
    }

    pub fn neighbours(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j, k) = self.unindex(id);
        let d = self.dims;
        let cand = [
            (i > 0).then(|| (i - 1, j, k)),
            (i + 1 < d[0]).then(|| (i + 1, j, k)),
            (j > 0).then(|| (i, j - 1, k)),
            (j + 1 < d[1]).then(|| (i, j + 1, k)),
            (k > 0).then(|| (i, j, k - 1)),
            (k + 1 < d[2]).then(|| (i, j, k + 1)),
        ];
        cand.into_iter()
            .flatten()
            .map(move |(a, b, c)| self.index(a, b, c))
    }

    /// Cells whose classification differs from a face neighbour.
    pub fn surface_adjacent(&self, masks: &[&[bool]]) -> Vec<bool> {
        (0..self.len())
            .into_par_iter()
            .map(|id| {
                masks
                    .iter()
                    .any(|m| self.neighbours(id).any(|nb| m[nb] != m[id]))
            })
            .collect()
    }
}

/// Volume, diameter and height of a model with error bars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub volume: f64,
    pub volume_error: f64,
    pub diameter: f64,
    pub diameter_error: f64,
    pub max_height: f64,
}

/// Voxel midpoint volume with a one-sided error bound from the
/// surface-adjacent cells.
pub fn voxel_volume(model: &SetModel, resolution: usize) -> (f64, f64) {
    let grid = VoxelGrid::over(model.n(), &model.bbox(), resolution);
    let inside = grid.classify(|p| model.contains(p));
    let surf = grid.surface_adjacent(&[&inside]);
    let count = inside.iter().filter(|&&b| b).count();
    let near = surf.iter().filter(|&&b| b).count();
    (
        count as f64 * grid.cell_volume(),
        near as f64 * grid.cell_volume(),
    )
}

pub fn geometric_summary(model: &SetModel, resolution: usize) -> Result<GeometricSummary> {
    let exact = model.exact();
    let (volume, volume_error) = match exact.volume {
        Some(v) => (v, 0.0),
        None => voxel_volume(model, resolution),
    };
    let (diameter, diameter_error) = match exact.diameter {
        Some(d) => (d, 0.0),
        None => {
            let pts = sample_boundary(model, resolution)?;
            let d = max_pair_distance(&pts);
            (d, 2.0 * model.diameter() / resolution as f64)
        }
    };
    Ok(GeometricSummary {
        volume,
        volume_error,
        diameter,
        diameter_error,
        max_height: exact.max_height.unwrap_or(model.max_height()),
    })
}

/// Slice of the set at height `h` measured from the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub h: f64,
    pub r_h: f64,
    #[serde(rename = "R_h")]
    pub big_r_h: f64,
    pub diam_slice: f64,
    pub inner_disk_contained: bool,
}

fn covered(iv: &[(f64, f64)], lo: f64, hi: f64, tol: f64) -> bool {
    iv.iter().any(|&(a, b)| a <= lo + tol && b >= hi - tol)
}

/// Inner and outer radii of the slice boundary about `h e_n`.
///
/// In three dimensions the slice is traced along `resolution` full lines
/// through the axis point.
pub fn cross_section(model: &SetModel, h: f64, resolution: usize) -> Result<CrossSection> {
    if !(h > 0.0) || h >= model.max_height() {
        return Err(Error::EmptySlice(h));
    }
    let axis = Vec3::new(0.0, 0.0, h);
    let tol = 1e-9 * model.diameter();
    let lines: Vec<Vec3> = if model.n() == 2 {
        vec![Vec3::new(1.0, 0.0, 0.0)]
    } else {
        let m = resolution.max(4);
        (0..m)
            .map(|k| {
                let phi = PI * k as f64 / m as f64;
                Vec3::new(phi.cos(), phi.sin(), 0.0)
            })
            .collect()
    };
    let mut boundary = Vec::new();
    let mut per_line = Vec::with_capacity(lines.len());
    for d in &lines {
        let iv = model.ray_intervals(&axis, d);
        for &(a, b) in &iv {
            boundary.push(axis + a * d);
            boundary.push(axis + b * d);
        }
        per_line.push(iv);
    }
    if boundary.is_empty() {
        return Err(Error::EmptySlice(h));
    }
    let dist: Vec<f64> = boundary.iter().map(|p| (p - axis).norm()).collect();
    let r_h = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let big_r_h = dist.iter().copied().fold(0.0, f64::max);
    let mut diam_slice: f64 = 0.0;
    for (i, p) in boundary.iter().enumerate() {
        for q in &boundary[i + 1..] {
            diam_slice = diam_slice.max((p - q).norm());
        }
    }
    let inner_disk_contained = per_line.iter().all(|iv| covered(iv, -r_h, r_h, tol));
    Ok(CrossSection {
        h,
        r_h,
        big_r_h,
        diam_slice,
        inner_disk_contained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::unit_ball_volume;
    use crate::shapes::model::ball_cap_volume;
    use crate::shapes::{build_shape, transform, ShapeDocument, ShapeSpec, TransformOp};

    fn model(n: usize, shape: ShapeSpec) -> SetModel {
        build_shape(&ShapeDocument {
            n,
            shape,
            allow_disconnected: false,
        })
        .unwrap()
    }

    #[test]
    fn voxel_volume_brackets_cap_formula() {
        for n in [2, 3] {
            let m = model(n, ShapeSpec::ball_cap(1.0, 0.5));
            let res = if n == 2 { 256 } else { 96 };
            let (v, err) = voxel_volume(&m, res);
            let exact = ball_cap_volume(n, 1.0, 0.5);
            assert!((v - exact).abs() <= err, "n={n}: {v} vs {exact} ± {err}");
        }
    }

    #[test]
    fn unit_ball_summary_is_exact() {
        let m = model(3, ShapeSpec::ball_cap(1.0, 1.5));
        let s = geometric_summary(&m, 32).unwrap();
        assert!((s.volume - unit_ball_volume(3)).abs() < 1e-12);
        assert_eq!(s.volume_error, 0.0);
    }

    #[test]
    fn scaling_doubles_diameter() {
        let m = model(2, ShapeSpec::ellipsoid_cap(vec![1.0, 1.2], 0.3));
        let s1 = geometric_summary(&m, 128).unwrap();
        let m2 = transform(&m, TransformOp::Scale { factor: 2.0 }).unwrap();
        let s2 = geometric_summary(&m2, 128).unwrap();
        assert!((s2.volume - 4.0 * s1.volume).abs() < 1e-12);
        assert!(
            (s2.diameter - 2.0 * s1.diameter).abs() <= s2.diameter_error + 2.0 * s1.diameter_error
        );
    }

    #[test]
    fn hemisphere_slice() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.0));
        let c = cross_section(&m, 0.6, 64).unwrap();
        assert!((c.r_h - 0.8).abs() < 1e-12 && (c.big_r_h - 0.8).abs() < 1e-12);
        assert!(c.inner_disk_contained);
        let m3 = model(3, ShapeSpec::ball_cap(1.0, 0.0));
        let c3 = cross_section(&m3, 0.6, 64).unwrap();
        assert!((c3.r_h - 0.8).abs() < 1e-12 && (c3.big_r_h - 0.8).abs() < 1e-12);
        assert!(c3.inner_disk_contained);
    }

    #[test]
    fn off_axis_slice_radii() {
        // circle of radius rho centred at distance c from the axis:
        // r = |c - rho| and R = c + rho
        let m = model(3, ShapeSpec::ball_cap_at(1.0, 0.0, vec![0.5, 0.0]));
        let h: f64 = 0.6;
        let rho = (1.0 - h * h).sqrt();
        let cs = cross_section(&m, h, 720).unwrap();
        assert!((cs.big_r_h - (0.5 + rho)).abs() < 1e-9);
        assert!((cs.r_h - (rho - 0.5)).abs() < 1e-3);
        assert!(cs.r_h < cs.big_r_h);
    }

    #[test]
    fn slice_above_top_is_empty() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.0));
        assert!(matches!(
            cross_section(&m, 1.5, 8),
            Err(Error::EmptySlice(_))
        ));
    }

    #[test]
    fn cap_inner_radius_decreases_above_equator() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.3));
        let mut last = f64::INFINITY;
        for k in 1..10 {
            let h = 0.3 + 0.09 * k as f64;
            let c = cross_section(&m, h, 8).unwrap();
            assert!(c.r_h < last);
            last = c.r_h;
        }
    }
}
