//! Unbounded reference sets: a half-space and a planar wedge resting on
//! `{x_n = 0}`.

use crate::geom::{Aabb, Vec3};
use crate::shapes::{BoundaryPoint, Intervals, RayCast};

/// Interval of `t` with `(o + t d - p) . nu < 0`.
fn halfline(o: &Vec3, d: &Vec3, p: &Vec3, nu: &Vec3) -> Option<(f64, f64)> {
    let a = (o - p).dot(nu);
    let b = d.dot(nu);
    if b > 0.0 {
        Some((f64::NEG_INFINITY, -a / b))
    } else if b < 0.0 {
        Some((-a / b, f64::INFINITY))
    } else if a < 0.0 {
        Some((f64::NEG_INFINITY, f64::INFINITY))
    } else {
        None
    }
}

/// `{x : (x - p) . nu < 0}`, not restricted to the upper half-space.
#[derive(Debug, Clone, Copy)]
pub struct HalfSpace {
    pub n: usize,
    pub point: Vec3,
    pub normal: Vec3,
}

impl HalfSpace {
    pub fn new(n: usize, point: Vec3, normal: Vec3) -> Self {
        HalfSpace {
            n,
            point,
            normal: normal.normalize(),
        }
    }

    pub fn boundary_point(&self) -> BoundaryPoint {
        BoundaryPoint::new(self.point, self.normal)
    }
}

impl RayCast for HalfSpace {
    fn dim(&self) -> usize {
        self.n
    }

    fn contains(&self, p: &Vec3) -> bool {
        (p - self.point).dot(&self.normal) < 0.0
    }

    fn ray_intervals(&self, o: &Vec3, d: &Vec3) -> Intervals {
        halfline(o, d, &self.point, &self.normal)
            .into_iter()
            .collect()
    }

    fn bounding_box(&self) -> Option<Aabb> {
        None
    }

    fn length_scale(&self) -> f64 {
        1.0
    }

    fn in_upper_halfspace(&self) -> bool {
        false
    }
}

/// The wedge `{x_n > 0} ∩ {x . nu_f < 0}` with edge `{x_1 = x_n = 0}` and
/// face normal `nu_f = (sqrt(1 - sigma^2), 0, -sigma)`, so that
/// `nu_f . (-e_n) = sigma`.
#[derive(Debug, Clone, Copy)]
pub struct Wedge {
    pub n: usize,
    pub sigma: f64,
    face_normal: Vec3,
}

impl Wedge {
    pub fn new(n: usize, sigma: f64) -> Self {
        Wedge {
            n,
            sigma,
            face_normal: Vec3::new((1.0 - sigma * sigma).sqrt(), 0.0, -sigma),
        }
    }

    pub fn face_normal(&self) -> Vec3 {
        self.face_normal
    }

    /// Point of the tilted face at height `h`.
    pub fn face_point(&self, h: f64) -> BoundaryPoint {
        let c = (1.0 - self.sigma * self.sigma).sqrt();
        let p = Vec3::new(self.sigma * h / c, 0.0, h);
        BoundaryPoint::new(p, self.face_normal)
    }
}

impl RayCast for Wedge {
    fn dim(&self) -> usize {
        self.n
    }

    fn contains(&self, p: &Vec3) -> bool {
        p.z > 0.0 && p.dot(&self.face_normal) < 0.0
    }

    fn ray_intervals(&self, o: &Vec3, d: &Vec3) -> Intervals {
        let down = -Vec3::z();
        let (Some(a), Some(b)) = (
            halfline(o, d, &Vec3::zeros(), &self.face_normal),
            halfline(o, d, &Vec3::zeros(), &down),
        ) else {
            return Vec::new();
        };
        let lo = a.0.max(b.0);
        let hi = a.1.min(b.1);
        if lo < hi {
            vec![(lo, hi)]
        } else {
            Vec::new()
        }
    }

    fn bounding_box(&self) -> Option<Aabb> {
        None
    }

    fn length_scale(&self) -> f64 {
        1.0
    }
}
