//! Curvature fields on sampled boundaries, tangential gradients and the
//! Euler-Lagrange residual.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::energy::halfspace_potential;
use crate::error::{Error, Result};
use crate::geom::{coords, orthonormal_complement, Vec3};
use crate::quadrature::{curvature_integral, QuadratureConfig};
use crate::shapes::{project_along, sample_boundary, BoundaryPoint, SetModel};

/// Hex SHA-256 of the shape document together with `extra`.
pub fn content_digest<T: Serialize>(model: &SetModel, extra: &T) -> String {
    let bytes = serde_json::to_vec(&(model.document(), extra)).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEntry {
    pub point: BoundaryPoint,
    pub value: f64,
    pub error_estimate: f64,
}

/// `H_E^s` at sampled boundary points, sorted by height then angle.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub n: usize,
    pub s: f64,
    /// Sampling resolution (`diam / spacing`) the points came from.
    pub resolution: usize,
    pub entries: Vec<FieldEntry>,
    pub shape_digest: String,
}

impl CurvatureField {
    pub fn csv_header(n: usize) -> String {
        let mut cols: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
        cols.extend((1..=n).map(|i| format!("nu_{i}")));
        cols.extend(["q_n".into(), "H".into(), "err".into()]);
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header(self.n);
        out.push('\n');
        for e in &self.entries {
            let mut row: Vec<String> = coords(self.n, &e.point.position)
                .iter()
                .map(|v| v.to_string())
                .collect();
            row.extend(
                coords(self.n, &e.point.normal)
                    .iter()
                    .map(|v| v.to_string()),
            );
            row.push(e.point.height.to_string());
            row.push(e.value.to_string());
            row.push(e.error_estimate.to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "x": coords(self.n, &e.point.position),
                    "nu": coords(self.n, &e.point.normal),
                    "q_n": e.point.height,
                    "H": e.value,
                    "err": e.error_estimate,
                })
            })
            .collect();
        json!({
            "n": self.n,
            "s": self.s,
            "shape_digest": self.shape_digest,
            "entries": entries,
        })
    }

    pub fn max_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.error_estimate)
            .fold(0.0, f64::max)
    }

    pub fn mean_error(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.error_estimate).sum::<f64>() / self.entries.len() as f64
    }
}

/// Curvature at the given points, in input order.
pub fn curvature_at(
    model: &SetModel,
    points: &[BoundaryPoint],
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<FieldEntry>> {
    points
        .par_iter()
        .map(|p| {
            let r = curvature_integral(model, p, s, cfg)?;
            Ok(FieldEntry {
                point: *p,
                value: r.value,
                error_estimate: r.error_estimate,
            })
        })
        .collect()
}

/// `H_E^s` at every sampled boundary point with `q_n > 0`.
pub fn curvature_field(
    model: &SetModel,
    s: f64,
    resolution: usize,
    cfg: &QuadratureConfig,
) -> Result<CurvatureField> {
    let points: Vec<BoundaryPoint> = sample_boundary(model, resolution)?
        .into_iter()
        .filter(|p| p.height > 0.0 && !p.on_contact_line)
        .collect();
    let entries = curvature_at(model, &points, s, cfg)?;
    Ok(CurvatureField {
        n: model.n(),
        s,
        resolution,
        entries,
        shape_digest: content_digest(model, &(s, resolution, cfg)),
    })
}

/// Unit tangent directions used for finite differences at `q`.
pub fn tangent_directions(n: usize, q: &BoundaryPoint) -> Vec<Vec3> {
    if n == 2 {
        let nu = q.normal;
        return vec![Vec3::new(-nu.z, 0.0, nu.x).normalize()];
    }
    let (t1, t2) = orthonormal_complement(&q.normal);
    vec![t1, t2]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentialGradient {
    pub vector: Vec3,
    /// Sum of the endpoint error estimates over the chord lengths.
    pub error: f64,
    pub step: f64,
}

/// Central difference of `H_E^s` along tangent directions at `q`.
pub fn tangential_gradient(
    model: &SetModel,
    q: &BoundaryPoint,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<TangentialGradient> {
    if !(q.height > 0.0) {
        return Err(Error::NotOnBoundary(format!(
            "height {} is not positive",
            q.height
        )));
    }
    let diam = model.diameter();
    let step = (0.25 * q.height).min(diam / 200.0);
    if step < 1e-7 * diam {
        return Err(Error::StepTooSmall(step));
    }
    let mut vector = Vec3::zeros();
    let mut error = 0.0;
    for t in tangent_directions(model.n(), q) {
        let probe = |sign: f64| {
            project_along(model, &(q.position + sign * step * t), &q.normal).ok_or_else(|| {
                Error::NotOnBoundary(format!("no boundary near {:?}", q.position.as_slice()))
            })
        };
        let (plus, minus) = (probe(1.0)?, probe(-1.0)?);
        let hp = curvature_integral(model, &plus, s, cfg)?;
        let hm = curvature_integral(model, &minus, s, cfg)?;
        let chord = plus.position - minus.position;
        let len = chord.norm();
        let d = (hp.value - hm.value) / len;
        vector += d * t;
        error += (hp.error_estimate + hm.error_estimate) / len;
    }
    // keep only the tangential part
    vector -= vector.dot(&q.normal) * q.normal;
    Ok(TangentialGradient {
        vector,
        error,
        step,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElResidual {
    /// `(point, residual, error)` with residual measured from the median.
    pub entries: Vec<(BoundaryPoint, f64, f64)>,
    pub median: f64,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `H_E^s(q) + (gamma - 1) int_{H^c} |x - q|^{-n-s}` from an existing field,
/// reported as deviation from its median.
pub fn el_residual_from_field(field: &CurvatureField, gamma: f64) -> Result<ElResidual> {
    let raw = field
        .entries
        .iter()
        .map(|e| {
            Ok(e.value + (gamma - 1.0) * halfspace_potential(e.point.height, field.n, field.s)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let med = median(&raw);
    Ok(ElResidual {
        entries: field
            .entries
            .iter()
            .zip(&raw)
            .map(|(e, r)| (e.point, r - med, e.error_estimate))
            .collect(),
        median: med,
    })
}

pub fn el_residual(
    model: &SetModel,
    gamma: f64,
    s: f64,
    resolution: usize,
    cfg: &QuadratureConfig,
) -> Result<ElResidual> {
    el_residual_from_field(&curvature_field(model, s, resolution, cfg)?, gamma)
}
