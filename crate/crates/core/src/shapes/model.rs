use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::node::{clip_intervals, Intervals, Node, Similarity};
use super::spec::{ShapeDocument, ShapeSpec, TransformOp};
use crate::error::{Error, Result};
use crate::geom::{horizontal, unit_ball_volume, Aabb, Vec3};

/// Anything the singular quadrature can integrate against: exact membership
/// plus exact line/set intersections.
pub trait RayCast: Sync {
    /// Ambient dimension `n`.
    fn dim(&self) -> usize;
    fn contains(&self, p: &Vec3) -> bool;
    /// Sorted open intervals of `t` (over the whole line) with `o + t d` inside.
    fn ray_intervals(&self, o: &Vec3, d: &Vec3) -> Intervals;
    /// `None` for unbounded sets.
    fn bounding_box(&self) -> Option<Aabb>;
    /// Reference length used to scale radii and probe steps.
    fn length_scale(&self) -> f64 {
        self.bounding_box().map_or(1.0, |b| b.extent().norm())
    }
    /// Whether the set lives in `{x_n > 0}` (so heights near zero matter).
    fn in_upper_halfspace(&self) -> bool {
        true
    }
}

/// Closed-form summaries, when the shape admits them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactMetadata {
    pub volume: Option<f64>,
    pub diameter: Option<f64>,
    pub max_height: Option<f64>,
    /// `nu_E . nu_H` along the contact line, when constant and known.
    pub contact_cosine: Option<f64>,
}

/// Evaluatable form of a [`ShapeSpec`]; immutable after construction.
#[derive(Debug, Clone)]
pub struct SetModel {
    n: usize,
    doc: ShapeDocument,
    root: Node,
    bbox: Aabb,
    exact: ExactMetadata,
    diameter: f64,
    max_height: f64,
}

/// Area (n = 2) or volume (n = 3) of `B_R(z_c e_n) ∩ {x_n > 0}`.
pub fn ball_cap_volume(n: usize, radius: f64, center_height: f64) -> f64 {
    if center_height >= radius {
        return unit_ball_volume(n) * radius.powi(n as i32);
    }
    let h = (radius + center_height).clamp(0.0, 2.0 * radius);
    match n {
        2 => {
            let d = radius - h;
            radius * radius * (d / radius).acos() - d * (2.0 * radius * h - h * h).max(0.0).sqrt()
        }
        _ => PI * h * h * (3.0 * radius - h) / 3.0,
    }
}

fn horizontal_part(n: usize, v: &[f64], what: &str) -> Result<Vec3> {
    match v.len() {
        0 => Ok(Vec3::zeros()),
        k if k == n - 1 => Ok(horizontal(n, v)),
        k if k == n => {
            if v[n - 1] != 0.0 {
                Err(Error::InvalidTransform(format!(
                    "{what} has a vertical component {}",
                    v[n - 1]
                )))
            } else {
                Ok(horizontal(n, v))
            }
        }
        k => Err(Error::InvalidSpec(format!(
            "{what} has {k} components, expected {}",
            n - 1
        ))),
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{what} must be finite")))
    }
}

/// Validates the vertical position of a primitive with vertical half-extent
/// `a` centred at height `zc`.
fn check_vertical(zc: f64, a: f64) -> Result<()> {
    if zc <= -a {
        return Err(Error::InvalidSpec(format!(
            "centre height {zc} leaves no part of the set above the plane"
        )));
    }
    if zc.abs() == a {
        return Err(Error::InvalidSpec(format!(
            "centre height {zc} makes the set touch the plane tangentially"
        )));
    }
    Ok(())
}

fn op_similarity(n: usize, op: &TransformOp) -> Result<Similarity> {
    match op {
        TransformOp::Translate { vector } => {
            check_finite(vector, "translation")?;
            if vector.len() == n && vector[n - 1] != 0.0 {
                return Err(Error::InvalidTransform(
                    "vertical translations would leave the half-space invariant set".into(),
                ));
            }
            Ok(Similarity::translation(horizontal_part(
                n,
                vector,
                "translation",
            )?))
        }
        TransformOp::Scale { factor } => {
            if !(*factor > 0.0) || !factor.is_finite() {
                return Err(Error::InvalidTransform(format!(
                    "scale factor {factor} must be positive"
                )));
            }
            Ok(Similarity::scaling(*factor))
        }
        TransformOp::Rotate { angle } => {
            if n == 3 {
                return Ok(Similarity::rotation_z(*angle));
            }
            let k = angle / PI;
            if (k - k.round()).abs() > 1e-12 {
                return Err(Error::InvalidTransform(
                    "in the plane only rotations by multiples of pi preserve the vertical axis"
                        .into(),
                ));
            }
            if (k.round() as i64).rem_euclid(2) == 1 {
                Ok(Similarity::reflection(Vec3::new(1.0, 0.0, 0.0), 0.0))
            } else {
                Ok(Similarity::identity())
            }
        }
        TransformOp::Reflect { normal, offset } => {
            let e = horizontal_part(n, normal, "reflection normal")
                .map_err(|e| Error::InvalidTransform(e.to_string()))?;
            if e.norm() == 0.0 {
                return Err(Error::InvalidTransform("reflection normal is zero".into()));
            }
            Ok(Similarity::reflection(e.normalize(), *offset))
        }
    }
}

fn build_node(n: usize, spec: &ShapeSpec) -> Result<Node> {
    match spec {
        ShapeSpec::BallCap {
            radius,
            center_height,
            horizontal_center,
        } => {
            check_finite(&[*radius, *center_height], "ball cap parameters")?;
            if !(*radius > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "radius {radius} must be positive"
                )));
            }
            check_vertical(*center_height, *radius)?;
            let c = horizontal_part(n, horizontal_center, "horizontal centre")?;
            Ok(Node::Ball {
                center: c + Vec3::new(0.0, 0.0, *center_height),
                radius: *radius,
            })
        }
        ShapeSpec::EllipsoidCap {
            semi_axes,
            center_height,
            tilt,
            horizontal_center,
        } => {
            if semi_axes.len() != n {
                return Err(Error::InvalidSpec(format!(
                    "ellipsoid needs {n} semi-axes, got {}",
                    semi_axes.len()
                )));
            }
            check_finite(semi_axes, "semi-axes")?;
            check_finite(&[*center_height, *tilt], "ellipsoid parameters")?;
            if semi_axes.iter().any(|a| !(*a > 0.0)) {
                return Err(Error::InvalidSpec("semi-axes must be positive".into()));
            }
            let semi = if n == 2 {
                Vec3::new(semi_axes[0], 1.0, semi_axes[1])
            } else {
                Vec3::new(semi_axes[0], semi_axes[1], semi_axes[2])
            };
            let (s, c) = tilt.sin_cos();
            // rotation in the x_1-x_n plane
            let frame = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
            let vertical_half =
                ((frame[(2, 0)] * semi.x).powi(2) + (frame[(2, 2)] * semi.z).powi(2)).sqrt();
            check_vertical(*center_height, vertical_half)?;
            let h = horizontal_part(n, horizontal_center, "horizontal centre")?;
            Ok(Node::Ellipsoid {
                center: h + Vec3::new(0.0, 0.0, *center_height),
                frame,
                semi,
            })
        }
        ShapeSpec::Union { members } => {
            if members.is_empty() {
                return Err(Error::InvalidSpec("union without members".into()));
            }
            Ok(Node::Union(
                members
                    .iter()
                    .map(|m| build_node(n, m))
                    .collect::<Result<Vec<_>>>()?,
            ))
        }
        ShapeSpec::Transformed { base, op } => Ok(Node::Mapped {
            base: Box::new(build_node(n, base)?),
            map: op_similarity(n, op)?,
        }),
    }
}

fn exact_of(n: usize, spec: &ShapeSpec) -> ExactMetadata {
    match spec {
        ShapeSpec::BallCap {
            radius: r,
            center_height: zc,
            ..
        } => ExactMetadata {
            volume: Some(ball_cap_volume(n, *r, *zc)),
            diameter: Some(if *zc >= 0.0 {
                2.0 * r
            } else {
                2.0 * (r * r - zc * zc).sqrt()
            }),
            max_height: Some(zc + r),
            contact_cosine: (zc.abs() < *r).then(|| zc / r),
        },
        ShapeSpec::EllipsoidCap {
            semi_axes,
            center_height: zc,
            tilt,
            ..
        } => {
            if *tilt != 0.0 {
                return ExactMetadata::default();
            }
            let a_v = semi_axes[n - 1];
            let prod: f64 = semi_axes.iter().product::<f64>() / a_v;
            let u = zc / a_v;
            let round = semi_axes[..n - 1].iter().all(|a| *a == semi_axes[0]);
            let contact_cosine = (u.abs() < 1.0 && round).then(|| {
                let a_h = semi_axes[0];
                let x = a_h * (1.0 - u * u).sqrt();
                let g = Vec3::new(x / (a_h * a_h), 0.0, -zc / (a_v * a_v));
                -g.normalize().z
            });
            ExactMetadata {
                volume: Some(prod * a_v * ball_cap_volume(n, 1.0, u)),
                diameter: None,
                max_height: Some(zc + a_v),
                contact_cosine,
            }
        }
        ShapeSpec::Union { members } => ExactMetadata {
            max_height: members
                .iter()
                .map(|m| exact_of(n, m).max_height)
                .try_fold(f64::NEG_INFINITY, |acc, h| h.map(|h| acc.max(h))),
            ..Default::default()
        },
        ShapeSpec::Transformed { base, op } => {
            let b = exact_of(n, base);
            match op {
                TransformOp::Scale { factor } => ExactMetadata {
                    volume: b.volume.map(|v| v * factor.powi(n as i32)),
                    diameter: b.diameter.map(|d| d * factor),
                    max_height: b.max_height.map(|h| h * factor),
                    contact_cosine: b.contact_cosine,
                },
                _ => b,
            }
        }
    }
}

/// Probe-grid checks for unions: no measure-zero tangencies between members,
/// and a single connected component unless explicitly allowed.
fn check_union(n: usize, node: &Node, bbox: &Aabb, allow_disconnected: bool) -> Result<()> {
    let Node::Union(members) = node else {
        return Ok(());
    };
    let res = if n == 2 { 160 } else { 40 };
    let ext = bbox.extent();
    let dims = [res, if n == 2 { 1 } else { res }, res];
    let h = Vec3::new(
        ext.x / res as f64,
        if n == 2 { 0.0 } else { ext.y / res as f64 },
        ext.z / res as f64,
    );
    let idx = |i: usize, j: usize, k: usize| (k * dims[1] + j) * dims[0] + i;
    let center = |i: usize, j: usize, k: usize| {
        Vec3::new(
            bbox.min.x + (i as f64 + 0.5) * h.x,
            if n == 2 {
                0.0
            } else {
                bbox.min.y + (j as f64 + 0.5) * h.y
            },
            bbox.min.z + (k as f64 + 0.5) * h.z,
        )
    };
    let total = dims[0] * dims[1] * dims[2];
    let mut owner: Vec<u64> = vec![0; total];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let p = center(i, j, k);
                if p.z <= 0.0 {
                    continue;
                }
                let mut mask = 0u64;
                for (m, member) in members.iter().enumerate().take(64) {
                    if member.contains(&p) {
                        mask |= 1 << m;
                    }
                }
                owner[idx(i, j, k)] = mask;
            }
        }
    }
    let neighbours = |i: usize, j: usize, k: usize| {
        let mut out = Vec::with_capacity(6);
        if i > 0 {
            out.push((i - 1, j, k));
        }
        if i + 1 < dims[0] {
            out.push((i + 1, j, k));
        }
        if j > 0 {
            out.push((i, j - 1, k));
        }
        if j + 1 < dims[1] {
            out.push((i, j + 1, k));
        }
        if k > 0 {
            out.push((i, j, k - 1));
        }
        if k + 1 < dims[2] {
            out.push((i, j, k + 1));
        }
        out
    };
    // tangency: two members adjacent on the grid without sharing any cell
    let m = members.len().min(64);
    let mut overlap = vec![false; m * m];
    let mut touch = vec![false; m * m];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let a = owner[idx(i, j, k)];
                if a == 0 {
                    continue;
                }
                for p in 0..m {
                    if a >> p & 1 == 0 {
                        continue;
                    }
                    for q in 0..m {
                        if p != q && a >> q & 1 == 1 {
                            overlap[p * m + q] = true;
                        }
                    }
                    for (ii, jj, kk) in neighbours(i, j, k) {
                        let b = owner[idx(ii, jj, kk)];
                        for q in 0..m {
                            if q != p && b >> q & 1 == 1 {
                                touch[p * m + q] = true;
                            }
                        }
                    }
                }
            }
        }
    }
    for p in 0..m {
        for q in 0..m {
            if touch[p * m + q] && !overlap[p * m + q] {
                return Err(Error::InvalidSpec(format!(
                    "union members {p} and {q} touch without overlapping interiors"
                )));
            }
        }
    }
    if allow_disconnected {
        return Ok(());
    }
    let mut seen = vec![false; total];
    let mut components = 0;
    for start in 0..total {
        if owner[start] == 0 || seen[start] {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(c) = queue.pop_front() {
            let i = c % dims[0];
            let j = (c / dims[0]) % dims[1];
            let k = c / (dims[0] * dims[1]);
            for (ii, jj, kk) in neighbours(i, j, k) {
                let id = idx(ii, jj, kk);
                if owner[id] != 0 && !seen[id] {
                    seen[id] = true;
                    queue.push_back(id);
                }
            }
        }
    }
    if components > 1 {
        return Err(Error::InvalidSpec(format!(
            "union has {components} connected components; set allow_disconnected for oracle fixtures"
        )));
    }
    Ok(())
}

/// Builds the evaluatable model of a shape document.
pub fn build_shape(doc: &ShapeDocument) -> Result<SetModel> {
    let n = doc.n;
    if !(n == 2 || n == 3) {
        return Err(Error::InvalidSpec(format!(
            "dimension {n} is not supported (2 or 3)"
        )));
    }
    let root = build_node(n, &doc.shape)?;
    let mut bbox = root.bounding_box();
    bbox.min.z = bbox.min.z.max(0.0);
    if n == 2 {
        bbox.min.y = 0.0;
        bbox.max.y = 0.0;
    }
    let max_height = root.max_height();
    if !(max_height > 0.0) || !bbox.extent().iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidSpec("set is empty or unbounded".into()));
    }
    check_union(n, &root, &bbox, doc.allow_disconnected)?;
    let mut exact = exact_of(n, &doc.shape);
    if exact.max_height.is_none() {
        exact.max_height = Some(max_height);
    }
    let mut model = SetModel {
        n,
        doc: doc.clone(),
        root,
        bbox,
        diameter: exact.diameter.unwrap_or_else(|| bbox.extent().norm()),
        max_height,
        exact,
    };
    if model.exact.diameter.is_none() {
        let res = if n == 2 { 256 } else { 48 };
        let pts = super::sample::sample_boundary(&model, res)?;
        model.diameter = super::sample::max_pair_distance(&pts);
    }
    Ok(model)
}

/// Applies a half-space preserving transform to a model.
pub fn transform(model: &SetModel, op: TransformOp) -> Result<SetModel> {
    let doc = ShapeDocument {
        n: model.n,
        shape: model.doc.shape.clone().transformed(op),
        allow_disconnected: model.doc.allow_disconnected,
    };
    build_shape(&doc)
}

impl SetModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn document(&self) -> &ShapeDocument {
        &self.doc
    }

    pub fn spec(&self) -> &ShapeSpec {
        &self.doc.shape
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    pub fn exact(&self) -> &ExactMetadata {
        &self.exact
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn max_height(&self) -> f64 {
        self.max_height
    }

    pub fn allows_disconnected(&self) -> bool {
        self.doc.allow_disconnected
    }

    /// Single analytic primitive (possibly transformed), as opposed to a union.
    pub fn is_primitive(&self) -> bool {
        self.root.leaves().len() == 1
    }

    /// Unions may carry corners; audits on them are heuristic.
    pub fn is_regular(&self) -> bool {
        self.is_primitive()
    }

    /// Horizontal position of a vertical symmetry axis, if any (`n = 3`
    /// rotational symmetry; for `n = 2` reflection symmetry in `x_1`).
    pub fn vertical_axis(&self) -> Option<Vec3> {
        self.root
            .vertical_axis(self.n == 2)
            .map(|p| Vec3::new(p.x, p.y, 0.0))
    }

    /// Ball parameters when the model is a (transformed) ball cap.
    pub fn as_ball(&self) -> Option<(Vec3, f64)> {
        self.root.as_ball()
    }

    /// Outward unit normal of the curved boundary at (or near) `x`.
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        let mut v = self.root.normal(x);
        if self.n == 2 {
            v.y = 0.0;
            v = v.normalize();
        }
        v
    }

    /// Intervals of the full line inside the primitive tree, ignoring the
    /// half-space clip. Used to locate the contact line.
    pub fn unclipped_intervals(&self, o: &Vec3, d: &Vec3) -> Intervals {
        self.root.ray_intervals(o, d)
    }
}

impl RayCast for SetModel {
    fn dim(&self) -> usize {
        self.n
    }

    fn contains(&self, p: &Vec3) -> bool {
        p.z > 0.0 && self.root.contains(p)
    }

    fn ray_intervals(&self, o: &Vec3, d: &Vec3) -> Intervals {
        let iv = self.root.ray_intervals(o, d);
        if iv.is_empty() {
            return iv;
        }
        if d.z > 0.0 {
            clip_intervals(&iv, -o.z / d.z, f64::INFINITY)
        } else if d.z < 0.0 {
            clip_intervals(&iv, f64::NEG_INFINITY, -o.z / d.z)
        } else if o.z > 0.0 {
            iv
        } else {
            Vec::new()
        }
    }

    fn length_scale(&self) -> f64 {
        self.diameter
    }

    fn bounding_box(&self) -> Option<Aabb> {
        Some(self.bbox)
    }
}
