//! Families of lines parallel to a horizontal direction, with the exact
//! chords of the set on each line.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::shapes::{Intervals, RayCast, SetModel};

/// Checks that `e` is a unit horizontal direction admissible in dimension `n`.
pub fn check_direction(n: usize, e: &Vec3) -> Result<Vec3> {
    let bad = || Error::DegenerateDirection([e.x, e.y, e.z]);
    if !e.iter().all(|v| v.is_finite()) || e.z.abs() > 1e-12 || (e.norm() - 1.0).abs() > 1e-9 {
        return Err(bad());
    }
    if n == 2 && e.y.abs() > 1e-12 {
        return Err(bad());
    }
    Ok(Vec3::new(e.x, e.y, 0.0).normalize())
}

/// Horizontal unit vector orthogonal to `e` (three dimensions only).
pub fn transverse(e: &Vec3) -> Vec3 {
    Vec3::new(-e.y, e.x, 0.0)
}

#[derive(Debug, Clone)]
pub struct Line {
    /// Point of the line with `x . e = 0`.
    pub origin: Vec3,
    /// Length (n = 2) or area (n = 3) of the transverse cell.
    pub weight: f64,
    /// Chords in the coordinate `t = x . e`.
    pub chords: Intervals,
    /// Transverse grid cell `(i_w, i_z)`.
    pub cell: (usize, usize),
}

/// Lines through the midpoints of a transverse grid with cells of side
/// about `cell`, covering the projection of the bounding box.
#[derive(Debug, Clone)]
pub struct LineFamily {
    pub e: Vec3,
    pub cell: f64,
    pub lines: Vec<Line>,
    pub planar: bool,
}

impl LineFamily {
    /// Whether some grid neighbour of `cell` misses the set.
    pub fn on_rim(&self, cell: (usize, usize)) -> bool {
        let present = |c: (isize, isize)| {
            c.0 >= 0
                && c.1 >= 0
                && self
                    .lines
                    .iter()
                    .any(|l| l.cell == (c.0 as usize, c.1 as usize))
        };
        let (w, z) = (cell.0 as isize, cell.1 as isize);
        let mut nbrs = vec![(w, z - 1), (w, z + 1)];
        if !self.planar {
            nbrs.extend([(w - 1, z), (w + 1, z)]);
        }
        nbrs.into_iter().any(|c| !present(c))
    }

    pub fn new(model: &SetModel, e: &Vec3, cell: f64) -> Result<Self> {
        let n = model.n();
        let e = check_direction(n, e)?;
        let top = model.max_height();
        let nz = ((top / cell).ceil() as usize).max(1);
        let hz = top / nz as f64;
        let (w_lo, nw, hw) = if n == 2 {
            (0.0, 1, 1.0)
        } else {
            let f = transverse(&e);
            let proj: Vec<f64> = model.bbox().corners().iter().map(|c| c.dot(&f)).collect();
            let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let nw = (((hi - lo) / cell).ceil() as usize).max(1);
            (lo, nw, (hi - lo) / nw as f64)
        };
        let f = transverse(&e);
        let lines = (0..nz * nw)
            .into_par_iter()
            .map(|k| {
                let (iw, iz) = (k / nz, k % nz);
                let z = (iz as f64 + 0.5) * hz;
                let origin = if n == 2 {
                    Vec3::new(0.0, 0.0, z)
                } else {
                    (w_lo + (iw as f64 + 0.5) * hw) * f + Vec3::new(0.0, 0.0, z)
                };
                Line {
                    origin,
                    weight: hz * hw,
                    chords: model.ray_intervals(&origin, &e),
                    cell: (iw, iz),
                }
            })
            .filter(|l| !l.chords.is_empty())
            .collect();
        let cell = if n == 2 { hz } else { hz.max(hw) };
        Ok(LineFamily {
            e,
            cell,
            lines,
            planar: n == 2,
        })
    }
}

pub fn reflect(chords: &[(f64, f64)], mu: f64) -> Intervals {
    chords
        .iter()
        .rev()
        .map(|&(a, b)| (2.0 * mu - b, 2.0 * mu - a))
        .collect()
}

pub fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Intervals {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Whether the reflection of the chords beyond `mu` lies inside the chords.
pub fn line_contains_reflection(chords: &[(f64, f64)], mu: f64, tol: f64) -> bool {
    chords.iter().filter(|c| c.1 > mu).all(|&(a, b)| {
        let (lo, hi) = (2.0 * mu - b, 2.0 * mu - a.max(mu));
        chords.iter().any(|&(c, d)| c <= lo + tol && hi <= d + tol)
    })
}

/// `int_a^b |t - mu| dt`.
pub fn abs_moment(a: f64, b: f64, mu: f64) -> f64 {
    let prim = |t: f64| 0.5 * (t - mu) * (t - mu).abs();
    prim(b) - prim(a)
}
