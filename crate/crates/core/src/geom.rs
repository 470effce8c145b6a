//! Small geometric helpers shared by every module.
//!
//! Points live in a three-component vector whose last component is the
//! vertical coordinate `x_n`. In the planar case (`n = 2`) the middle
//! component is identically zero, so `(x, 0, z)` stands for `(x_1, x_2)`.

use nalgebra::Vector3;
use statrs::function::gamma::gamma;

pub type Vec3 = Vector3<f64>;

/// Vertical unit vector `e_n`.
pub fn up() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    std::f64::consts::PI.powf(h) / gamma(h + 1.0)
}

/// Surface measure of the unit sphere `S^{n-1}`, i.e. `n * omega_n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Outward horizontal direction as a vector; panics on bad dimension input
/// is avoided by truncating extra components.
pub fn horizontal(n: usize, components: &[f64]) -> Vec3 {
    match n {
        2 => Vec3::new(components.first().copied().unwrap_or(0.0), 0.0, 0.0),
        _ => Vec3::new(
            components.first().copied().unwrap_or(0.0),
            components.get(1).copied().unwrap_or(0.0),
            0.0,
        ),
    }
}

/// Coordinates of a point as a `Vec<f64>` of length `n`.
pub fn coords(n: usize, p: &Vec3) -> Vec<f64> {
    if n == 2 {
        vec![p.x, p.z]
    } else {
        vec![p.x, p.y, p.z]
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn contains(&self, p: &Vec3, slack: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - slack && p[i] <= self.max[i] + slack)
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (k, c) in out.iter_mut().enumerate() {
            for i in 0..3 {
                c[i] = if (k >> i) & 1 == 0 {
                    self.min[i]
                } else {
                    self.max[i]
                };
            }
        }
        out
    }

    pub fn max_distance_from(&self, p: &Vec3) -> f64 {
        self.corners()
            .iter()
            .map(|c| (c - p).norm())
            .fold(0.0, f64::max)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// An orthonormal pair spanning the plane orthogonal to the unit vector `v`.
pub fn orthonormal_complement(v: &Vec3) -> (Vec3, Vec3) {
    let a = if v.z.abs() < 0.9 {
        up()
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let t1 = v.cross(&a).normalize();
    let t2 = v.cross(&t1);
    (t1, t2)
}
