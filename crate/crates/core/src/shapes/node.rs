//! Analytic set primitives and their composition.
//!
//! Every node answers three questions exactly: membership of a point, the
//! parameter intervals where a line lies inside, and the outward normal at a
//! boundary point. Nothing here knows about the half-space; the clipping to
//! `{x_n > 0}` happens in [`super::SetModel`].

use nalgebra::Matrix3;

use crate::geom::{Aabb, Vec3};

/// Sorted, pairwise disjoint open parameter intervals.
pub type Intervals = Vec<(f64, f64)>;

/// `x -> scale * linear * x + shift` with `linear` orthogonal and preserving
/// the vertical axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub linear: Matrix3<f64>,
    pub shift: Vec3,
}

impl Similarity {
    pub fn identity() -> Self {
        Similarity {
            scale: 1.0,
            linear: Matrix3::identity(),
            shift: Vec3::zeros(),
        }
    }

    pub fn translation(v: Vec3) -> Self {
        Similarity {
            shift: v,
            ..Self::identity()
        }
    }

    pub fn scaling(t: f64) -> Self {
        Similarity {
            scale: t,
            ..Self::identity()
        }
    }

    pub fn rotation_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Similarity {
            linear: Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            ..Self::identity()
        }
    }

    /// Reflection across `{x . e = offset}` for a unit horizontal `e`.
    pub fn reflection(e: Vec3, offset: f64) -> Self {
        let linear = Matrix3::identity() - 2.0 * e * e.transpose();
        Similarity {
            scale: 1.0,
            linear,
            shift: 2.0 * offset * e,
        }
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.scale * (self.linear * x) + self.shift
    }

    pub fn apply_inverse(&self, y: &Vec3) -> Vec3 {
        self.linear.transpose() * (y - self.shift) / self.scale
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &Similarity) -> Similarity {
        Similarity {
            scale: self.scale * inner.scale,
            linear: self.linear * inner.linear,
            shift: self.scale * (self.linear * inner.shift) + self.shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Ball {
        center: Vec3,
        radius: f64,
    },
    /// Columns of `frame` are the unit principal axes; `semi` the semi-axes.
    Ellipsoid {
        center: Vec3,
        frame: Matrix3<f64>,
        semi: Vec3,
    },
    Union(Vec<Node>),
    Mapped {
        base: Box<Node>,
        map: Similarity,
    },
}

/// Roots of `a t^2 + 2 b t + c = 0` as an open interval, if real and distinct.
fn quadratic_interval(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if a <= 0.0 {
        return None;
    }
    let disc = b * b - a * c;
    if disc <= 0.0 {
        return None;
    }
    let q = -(b + b.signum() * disc.sqrt());
    let (t1, t2) = if q == 0.0 {
        let r = (-c / a).sqrt();
        (-r, r)
    } else {
        (q / a, c / q)
    };
    Some(if t1 <= t2 { (t1, t2) } else { (t2, t1) })
}

/// Union of interval lists; the result is sorted and merged.
pub fn merge_intervals(mut all: Intervals) -> Intervals {
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Intervals = Vec::with_capacity(all.len());
    for (a, b) in all {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Intersection of sorted intervals with `(lo, hi)`.
pub fn clip_intervals(iv: &[(f64, f64)], lo: f64, hi: f64) -> Intervals {
    iv.iter()
        .filter_map(|&(a, b)| {
            let a = a.max(lo);
            let b = b.min(hi);
            (a < b).then_some((a, b))
        })
        .collect()
}

impl Node {
    /// A point of the vertical line about which the node is rotationally
    /// symmetric (reflection symmetric when `planar`), if there is one.
    pub fn vertical_axis(&self, planar: bool) -> Option<Vec3> {
        let same = |a: &Vec3, b: &Vec3| {
            (a.x - b.x).abs() <= 1e-12 * (1.0 + a.xy().norm())
                && (a.y - b.y).abs() <= 1e-12 * (1.0 + a.xy().norm())
        };
        match self {
            Node::Ball { center, .. } => Some(*center),
            Node::Ellipsoid {
                center,
                frame,
                semi,
            } => {
                let k = (0..3).find(|&k| (frame.column(k).z.abs() - 1.0).abs() < 1e-12)?;
                let others: Vec<f64> = (0..3).filter(|&j| j != k).map(|j| semi[j]).collect();
                (planar || (others[0] - others[1]).abs() <= 1e-12 * others[0]).then_some(*center)
            }
            Node::Union(members) => {
                let first = members.first()?.vertical_axis(planar)?;
                for m in &members[1..] {
                    if !same(&first, &m.vertical_axis(planar)?) {
                        return None;
                    }
                }
                Some(first)
            }
            Node::Mapped { base, map } => {
                let p = base.vertical_axis(planar)?;
                let ez = map.linear * Vec3::z();
                ((ez.z.abs() - 1.0).abs() < 1e-12).then(|| map.apply(&p))
            }
        }
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        match self {
            Node::Ball { center, radius } => (x - center).norm_squared() < radius * radius,
            Node::Ellipsoid {
                center,
                frame,
                semi,
            } => {
                let p = frame.transpose() * (x - center);
                p.component_div(semi).norm_squared() < 1.0
            }
            Node::Union(members) => members.iter().any(|m| m.contains(x)),
            Node::Mapped { base, map } => base.contains(&map.apply_inverse(x)),
        }
    }

    /// Parameter intervals of the full line `o + t d` lying inside.
    pub fn ray_intervals(&self, o: &Vec3, d: &Vec3) -> Intervals {
        match self {
            Node::Ball { center, radius } => {
                let p = o - center;
                quadratic_interval(
                    d.norm_squared(),
                    p.dot(d),
                    p.norm_squared() - radius * radius,
                )
                .into_iter()
                .collect()
            }
            Node::Ellipsoid {
                center,
                frame,
                semi,
            } => {
                let p = (frame.transpose() * (o - center)).component_div(semi);
                let v = (frame.transpose() * d).component_div(semi);
                quadratic_interval(v.norm_squared(), p.dot(&v), p.norm_squared() - 1.0)
                    .into_iter()
                    .collect()
            }
            Node::Union(members) => {
                merge_intervals(members.iter().flat_map(|m| m.ray_intervals(o, d)).collect())
            }
            Node::Mapped { base, map } => {
                let o2 = map.apply_inverse(o);
                let d2 = map.linear.transpose() * d / map.scale;
                base.ray_intervals(&o2, &d2)
            }
        }
    }

    /// Signed level function, negative inside, roughly a distance near the
    /// boundary.
    pub fn level(&self, x: &Vec3) -> f64 {
        match self {
            Node::Ball { center, radius } => (x - center).norm() - radius,
            Node::Ellipsoid {
                center,
                frame,
                semi,
            } => {
                let p = (frame.transpose() * (x - center)).component_div(semi);
                (p.norm() - 1.0) * semi.min()
            }
            Node::Union(members) => members
                .iter()
                .map(|m| m.level(x))
                .fold(f64::INFINITY, f64::min),
            Node::Mapped { base, map } => map.scale * base.level(&map.apply_inverse(x)),
        }
    }

    /// Outward unit normal of the nearest primitive surface through `x`.
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        match self {
            Node::Ball { center, .. } => (x - center).normalize(),
            Node::Ellipsoid {
                center,
                frame,
                semi,
            } => {
                let p = frame.transpose() * (x - center);
                let g = p.component_div(&semi.component_mul(semi));
                (frame * g).normalize()
            }
            Node::Union(members) => {
                // The union boundary lies on a member boundary outside the others.
                let best = members
                    .iter()
                    .min_by(|a, b| a.level(x).abs().total_cmp(&b.level(x).abs()))
                    .expect("union has members");
                best.normal(x)
            }
            Node::Mapped { base, map } => {
                (map.linear * base.normal(&map.apply_inverse(x))).normalize()
            }
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        match self {
            Node::Ball { center, radius } => {
                let r = Vec3::repeat(*radius);
                Aabb::new(center - r, center + r)
            }
            Node::Ellipsoid {
                center,
                frame,
                semi,
            } => {
                let mut half = Vec3::zeros();
                for i in 0..3 {
                    half[i] = (0..3)
                        .map(|j| (frame[(i, j)] * semi[j]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                }
                Aabb::new(center - half, center + half)
            }
            Node::Union(members) => members
                .iter()
                .fold(Aabb::empty(), |acc, m| acc.union(&m.bounding_box())),
            Node::Mapped { base, map } => {
                let b = base.bounding_box();
                b.corners()
                    .iter()
                    .map(|c| map.apply(c))
                    .fold(Aabb::empty(), |acc, p| acc.union(&Aabb::new(p, p)))
            }
        }
    }

    /// Largest vertical coordinate of the closure.
    pub fn max_height(&self) -> f64 {
        match self {
            Node::Union(members) => members
                .iter()
                .map(|m| m.max_height())
                .fold(f64::NEG_INFINITY, f64::max),
            Node::Mapped { base, map } => map.scale * base.max_height() + map.shift.z,
            _ => self.bounding_box().max.z,
        }
    }

    /// Ball described by this node after resolving similarity maps.
    pub fn as_ball(&self) -> Option<(Vec3, f64)> {
        match self {
            Node::Ball { center, radius } => Some((*center, *radius)),
            Node::Mapped { base, map } => {
                base.as_ball().map(|(c, r)| (map.apply(&c), r * map.scale))
            }
            _ => None,
        }
    }

    /// Flattened primitive leaves with their accumulated maps.
    pub fn leaves(&self) -> Vec<(Node, Similarity)> {
        fn walk(node: &Node, acc: &Similarity, out: &mut Vec<(Node, Similarity)>) {
            match node {
                Node::Union(members) => members.iter().for_each(|m| walk(m, acc, out)),
                Node::Mapped { base, map } => walk(base, &acc.compose(map), out),
                leaf => out.push((leaf.clone(), acc.clone())),
            }
        }
        let mut out = Vec::new();
        walk(self, &Similarity::identity(), &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_ball() -> Node {
        Node::Ball {
            center: Vec3::new(0.0, 0.0, 2.0),
            radius: 1.0,
        }
    }

    #[test]
    fn ball_ray_hits_both_sides() {
        let b = unit_ball();
        let iv = b.ray_intervals(&Vec3::new(-5.0, 0.0, 2.0), &Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 4.0).abs() < 1e-14 && (iv[0].1 - 6.0).abs() < 1e-14);
        let miss = b.ray_intervals(&Vec3::new(-5.0, 0.0, 3.5), &Vec3::new(1.0, 0.0, 0.0));
        assert!(miss.is_empty());
    }

    #[test]
    fn ray_from_boundary_point_has_root_near_zero() {
        let b = unit_ball();
        let q = Vec3::new(0.6, 0.0, 2.8);
        let iv = b.ray_intervals(&q, &Vec3::new(-1.0, 0.0, 0.0));
        assert!(iv[0].0.abs() < 1e-14);
        assert!((iv[0].1 - 1.2).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_matches_membership() {
        let e = Node::Ellipsoid {
            center: Vec3::new(0.0, 0.0, 0.3),
            frame: Matrix3::identity(),
            semi: Vec3::new(1.0, 1.0, 1.2),
        };
        let o = Vec3::new(-3.0, 0.0, 0.5);
        let d = Vec3::new(1.0, 0.0, 0.1).normalize();
        let iv = e.ray_intervals(&o, &d);
        for k in 0..400 {
            let t = k as f64 * 0.02;
            let inside = iv.iter().any(|&(a, b)| t > a && t < b);
            let p = o + t * d;
            if e.level(&p).abs() > 1e-9 {
                assert_eq!(inside, e.contains(&p), "t = {t}");
            }
        }
    }

    #[test]
    fn union_merges_overlaps() {
        let u = Node::Union(vec![
            Node::Ball {
                center: Vec3::new(0.0, 0.0, 1.0),
                radius: 1.0,
            },
            Node::Ball {
                center: Vec3::new(1.5, 0.0, 1.0),
                radius: 1.0,
            },
        ]);
        let iv = u.ray_intervals(&Vec3::new(-2.0, 0.0, 1.0), &Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(iv.len(), 1);
        assert!((iv[0].1 - 4.5).abs() < 1e-12);
    }

    #[test]
    fn mapped_scale_preserves_ray_parameter() {
        let m = Node::Mapped {
            base: Box::new(unit_ball()),
            map: Similarity::scaling(2.0),
        };
        let iv = m.ray_intervals(&Vec3::new(-10.0, 0.0, 4.0), &Vec3::new(1.0, 0.0, 0.0));
        assert!((iv[0].0 - 8.0).abs() < 1e-12 && (iv[0].1 - 12.0).abs() < 1e-12);
        let n = m.normal(&Vec3::new(2.0, 0.0, 4.0));
        assert!((n - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn reflection_is_involution() {
        let r = Similarity::reflection(Vec3::new(1.0, 0.0, 0.0), 0.7);
        let x = Vec3::new(0.2, 0.0, 0.9);
        assert!((r.apply(&r.apply(&x)) - x).norm() < 1e-15);
        assert!((r.apply(&x).x - 1.2).abs() < 1e-15);
    }
}
