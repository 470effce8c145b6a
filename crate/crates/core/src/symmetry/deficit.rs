//! The s-deficit: the largest difference quotient of `H_E^s` between
//! boundary points at the same height, made scale free by `diam^{s+1}`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measures::CurvatureField;
use crate::shapes::{BoundaryPoint, SetModel};

#[derive(Debug, Clone, PartialEq)]
pub struct DeficitEstimate {
    pub value: f64,
    pub argmax_pair: (BoundaryPoint, BoundaryPoint),
    pub height_tolerance: f64,
    pub field_digest: String,
    /// `2 (max pair error) / (min pair distance) diam^{s+1}`.
    pub noise_floor: f64,
    /// `diam^{s+1} max (err_p + err_q) / |p - q|` over the compared pairs,
    /// a bound on the error of `value`.
    pub value_error: f64,
    pub pairs: usize,
}

/// Sampled slices share their height exactly, so the default only merges
/// heights equal up to rounding.
pub const DEFAULT_HEIGHT_TOLERANCE_REL: f64 = 1e-10;

/// `delta_s` from a curvature field. Pairs closer than
/// `diam / resolution` are skipped.
pub fn deficit(
    field: &CurvatureField,
    model: &SetModel,
    height_tolerance_rel: f64,
) -> Result<DeficitEstimate> {
    if !(height_tolerance_rel > 0.0 && height_tolerance_rel <= 0.05) {
        return Err(Error::InvalidConfig(format!(
            "height tolerance {height_tolerance_rel} outside (0, 0.05]"
        )));
    }
    let diam = model.diameter();
    let width = height_tolerance_rel * diam;
    let floor = diam / field.resolution.max(1) as f64;
    let mut bins: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, e) in field.entries.iter().enumerate() {
        bins.entry((e.point.height / width).floor() as i64)
            .or_default()
            .push(i);
    }
    if !bins.values().any(|b| b.len() >= 2) {
        return Err(Error::InsufficientPairs);
    }
    let scale = diam.powf(field.s + 1.0);
    let mut best: Option<(f64, usize, usize)> = None;
    let mut max_err: f64 = 0.0;
    let mut min_dist = f64::INFINITY;
    let mut pairs = 0usize;
    let mut quotient_err: f64 = 0.0;
    for members in bins.values() {
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                let (p, q) = (&field.entries[i], &field.entries[j]);
                let d = (p.point.position - q.point.position).norm();
                if d < floor {
                    continue;
                }
                pairs += 1;
                max_err = max_err.max(p.error_estimate + q.error_estimate);
                min_dist = min_dist.min(d);
                quotient_err = quotient_err.max((p.error_estimate + q.error_estimate) / d);
                let quotient = (p.value - q.value).abs() / d;
                if best.is_none_or(|b| quotient > b.0) {
                    best = Some((quotient, i, j));
                }
            }
        }
    }
    let (quotient, i, j) = best.ok_or(Error::InsufficientPairs)?;
    Ok(DeficitEstimate {
        value: scale * quotient,
        argmax_pair: (field.entries[i].point, field.entries[j].point),
        height_tolerance: width,
        field_digest: field.shape_digest.clone(),
        noise_floor: 2.0 * max_err / min_dist * scale,
        value_error: quotient_err * scale,
        pairs,
    })
}
