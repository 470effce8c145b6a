//! Behaviour of `H_E^s` and its gradient near the contact line, compared
//! with the wedge constant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::measures::{curvature_at, tangential_gradient, wedge_constant, WedgeConstant};
use crate::quadrature::QuadratureConfig;
use crate::shapes::{meridian_point, sample_boundary, BoundaryPoint, SetModel};

/// Contact cosine `nu_E . nu_H` along `bd(M)`, which must be constant.
pub fn contact_cosine(model: &SetModel) -> Result<f64> {
    if model.max_height() <= 0.0 || model.bbox().min.z > 0.0 {
        return Err(Error::NoContactLine);
    }
    if let Some(sigma) = model.exact().contact_cosine {
        return Ok(sigma);
    }
    let contact: Vec<f64> = sample_boundary(model, 64)?
        .iter()
        .filter(|p| p.on_contact_line)
        .map(|p| -p.normal.z)
        .collect();
    if contact.is_empty() {
        return Err(Error::NoContactLine);
    }
    let lo = contact.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = contact.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > 1e-6 {
        return Err(Error::NonConstantAngle(hi - lo));
    }
    Ok(0.5 * (lo + hi))
}

/// `h0 2^{-k}` for `k = 0..count`.
pub fn dyadic_heights(h0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| h0 * 0.5f64.powi(k as i32)).collect()
}

fn ladder(model: &SetModel, heights: &[f64]) -> Result<Vec<BoundaryPoint>> {
    let dir = Vec3::new(1.0, 0.0, 0.0);
    heights
        .iter()
        .map(|&h| {
            if !(h > 0.0 && h < model.max_height()) {
                return Err(Error::EmptySlice(h));
            }
            meridian_point(model, h, &dir).ok_or(Error::EmptySlice(h))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderPoint {
    pub q_n: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupFit {
    pub sigma: f64,
    /// Least-squares slope of `log H` against `log q_n`.
    pub slope: f64,
    pub intercept: f64,
    /// `q_n^s H` at the smallest height.
    pub prefactor: f64,
    pub wedge_c: f64,
    pub wedge_error: f64,
    pub rel_err: f64,
    pub points: Vec<LadderPoint>,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Power-law fit of `H_E^s` along a meridian at the given heights.
pub fn fit_blowup(
    model: &SetModel,
    s: f64,
    cfg: &QuadratureConfig,
    heights: &[f64],
) -> Result<BlowupFit> {
    let sigma = contact_cosine(model)?;
    let wedge = wedge_constant(model.n(), s, sigma, cfg)?;
    fit_blowup_with(model, s, cfg, heights, &wedge)
}

pub fn fit_blowup_with(
    model: &SetModel,
    s: f64,
    cfg: &QuadratureConfig,
    heights: &[f64],
    wedge: &WedgeConstant,
) -> Result<BlowupFit> {
    let sigma = contact_cosine(model)?;
    if heights.len() < 2 {
        return Err(Error::InvalidConfig(
            "a fit needs at least two heights".into(),
        ));
    }
    let pts = ladder(model, heights)?;
    let entries = curvature_at(model, &pts, s, cfg)?;
    if let Some(e) = entries.iter().find(|e| !(e.value > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "curvature {} at height {} is not positive, no power law to fit",
            e.value, e.point.height
        )));
    }
    let x: Vec<f64> = entries.iter().map(|e| e.point.height.ln()).collect();
    let y: Vec<f64> = entries.iter().map(|e| e.value.ln()).collect();
    let (slope, intercept) = least_squares(&x, &y);
    let finest = entries
        .iter()
        .min_by(|a, b| a.point.height.total_cmp(&b.point.height))
        .unwrap();
    let prefactor = finest.point.height.powf(s) * finest.value;
    Ok(BlowupFit {
        sigma,
        slope,
        intercept,
        prefactor,
        wedge_c: wedge.c,
        wedge_error: wedge.error_estimate,
        rel_err: (prefactor / wedge.c - 1.0).abs(),
        points: entries
            .iter()
            .map(|e| LadderPoint {
                q_n: e.point.height,
                value: e.value,
                error: e.error_estimate,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientAudit {
    /// Largest `q_n^{s+1} |grad H|` over the ladder.
    pub sup_scaled: f64,
    pub wedge_c: f64,
    pub budget: f64,
    /// `sup_scaled <= 1.25 wedge_c + budget`.
    pub pass: bool,
    /// The scaled gradient does not grow over the three smallest heights.
    pub tail_non_increasing: bool,
    /// Scaled gradients in ladder order.
    pub points: Vec<LadderPoint>,
}

pub const GRADIENT_HEADROOM: f64 = 1.25;

pub fn gradient_bound_audit(
    model: &SetModel,
    s: f64,
    cfg: &QuadratureConfig,
    heights: &[f64],
) -> Result<GradientAudit> {
    let sigma = contact_cosine(model)?;
    let wedge = wedge_constant(model.n(), s, sigma, cfg)?;
    gradient_bound_audit_with(model, s, cfg, heights, &wedge)
}

pub fn gradient_bound_audit_with(
    model: &SetModel,
    s: f64,
    cfg: &QuadratureConfig,
    heights: &[f64],
    wedge: &WedgeConstant,
) -> Result<GradientAudit> {
    contact_cosine(model)?;
    let pts = ladder(model, heights)?;
    let points = pts
        .iter()
        .map(|q| {
            let g = tangential_gradient(model, q, s, cfg)?;
            let f = q.height.powf(s + 1.0);
            Ok(LadderPoint {
                q_n: q.height,
                value: f * g.vector.norm(),
                error: f * g.error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (sup, sup_err) = points.iter().fold((0.0f64, 0.0f64), |acc, p| {
        if p.value > acc.0 {
            (p.value, p.error)
        } else {
            acc
        }
    });
    let budget = sup_err + GRADIENT_HEADROOM * wedge.error_estimate;
    let mut order: Vec<&LadderPoint> = points.iter().collect();
    order.sort_by(|a, b| b.q_n.total_cmp(&a.q_n));
    let tail = &order[order.len().saturating_sub(3)..];
    let tail_non_increasing = tail
        .windows(2)
        .all(|w| w[1].value <= w[0].value + w[0].error + w[1].error);
    Ok(GradientAudit {
        sup_scaled: sup,
        wedge_c: wedge.c,
        budget,
        pass: sup <= GRADIENT_HEADROOM * wedge.c + budget,
        tail_non_increasing,
        points,
    })
}
