//! Finite-difference check of the first variation of `P_s` against the
//! surface integral of the normal speed times `H_E^s`.

use std::f64::consts::PI;
use std::sync::Mutex;

use serde::Serialize;

use super::energy::fractional_perimeter;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::quadrature::gk::{integrate_par, AdaptiveOptions, Sample};
use crate::quadrature::{pv_curvature_integral, QuadratureConfig};
use crate::shapes::{build_shape, BoundaryPoint, SetModel, ShapeDocument, ShapeSpec};

/// Normal speeds whose flows stay inside the ball family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalSpeed {
    Zero,
    /// Constant speed; the radius grows at this rate.
    Constant(f64),
    /// `nu_E . v`, generated by the translation with velocity `v`.
    Translation(Vec3),
}

impl NormalSpeed {
    pub fn at(&self, p: &BoundaryPoint) -> f64 {
        match self {
            NormalSpeed::Zero => 0.0,
            NormalSpeed::Constant(c) => *c,
            NormalSpeed::Translation(v) => p.normal.dot(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationCheck {
    pub fd_derivative: f64,
    pub surface_integral: f64,
    pub mismatch: f64,
    pub relative_mismatch: f64,
    pub fd_error: f64,
    pub surface_error: f64,
}

fn ball_model(n: usize, center: Vec3, radius: f64) -> Result<SetModel> {
    let horizontal = if n == 2 {
        vec![center.x]
    } else {
        vec![center.x, center.y]
    };
    build_shape(&ShapeDocument::new(
        n,
        ShapeSpec::ball_cap_at(radius, center.z, horizontal),
    ))
}

/// The ball reached at time `t` along the flow.
fn flowed(n: usize, center: Vec3, radius: f64, speed: NormalSpeed, t: f64) -> Result<SetModel> {
    match speed {
        NormalSpeed::Zero => ball_model(n, center, radius),
        NormalSpeed::Constant(c) => ball_model(n, center, radius + c * t),
        NormalSpeed::Translation(v) => ball_model(n, center + t * v, radius),
    }
}

/// `int_M speed * H_E^s` over the sphere `|x - center| = radius`.
fn surface_integral(
    model: &SetModel,
    center: Vec3,
    radius: f64,
    speed: NormalSpeed,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let n = model.n();
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let curvature = |d: Vec3| -> (f64, f64) {
        let q = BoundaryPoint::new(center + radius * d, d);
        match pv_curvature_integral(model, &q, s, cfg) {
            Ok(r) => (r.value, r.error_estimate),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                (0.0, 0.0)
            }
        }
    };
    let opts = AdaptiveOptions {
        rel_tol: cfg.target_rel_tol,
        max_depth: cfg.subdivision_depth,
        ..AdaptiveOptions::default()
    };
    let res = if n == 2 {
        integrate_par(
            |th| {
                let d = Vec3::new(th.cos(), 0.0, th.sin());
                let w = speed.at(&BoundaryPoint::new(center + radius * d, d)) * radius;
                let (h, e) = curvature(d);
                Sample {
                    value: w * h,
                    err: (w * e).abs(),
                }
            },
            0.0,
            2.0 * PI,
            &opts,
        )
    } else {
        // only balls here, so H depends on the polar angle alone and the
        // azimuthal average of the speed is exact
        let mean_speed = |th: f64| match speed {
            NormalSpeed::Zero => 0.0,
            NormalSpeed::Constant(c) => c,
            NormalSpeed::Translation(v) => v.z * th.cos(),
        };
        integrate_par(
            |th| {
                let d = Vec3::new(th.sin(), 0.0, th.cos());
                let w = 2.0 * PI * mean_speed(th) * radius * radius * th.sin();
                let (h, e) = curvature(d);
                Sample {
                    value: w * h,
                    err: (w * e).abs(),
                }
            },
            0.0,
            PI,
            &opts,
        )
    };
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok((res.value, res.err))
}

/// Compares `(P_s(E_t) - P_s(E_{-t})) / 2t` with `int_M speed * H_E^s`.
///
/// Only balls lying inside the half-space are supported, where the flows
/// of the available speeds are again balls.
pub fn first_variation_check(
    model: &SetModel,
    speed: NormalSpeed,
    s: f64,
    cfg: &QuadratureConfig,
    t: f64,
) -> Result<VariationCheck> {
    let n = model.n();
    let (center, radius) = model.as_ball().ok_or_else(|| {
        Error::UnsupportedFamily("normal flows are realised for balls only".into())
    })?;
    if !(t > 0.0) {
        return Err(Error::InvalidConfig(format!("step {t} must be positive")));
    }
    let reach = match speed {
        NormalSpeed::Zero => 0.0,
        NormalSpeed::Constant(c) => c.abs(),
        NormalSpeed::Translation(v) => v.norm(),
    } * t;
    if center.z - radius - reach <= 0.0 {
        return Err(Error::UnsupportedFamily(
            "the flow must keep the ball inside the half-space".into(),
        ));
    }
    if let NormalSpeed::Constant(c) = speed {
        if c.abs() * t >= radius {
            return Err(Error::InvalidConfig(format!("step {t} collapses the ball")));
        }
    }
    let (fd_derivative, fd_error) = if speed == NormalSpeed::Zero {
        (0.0, 0.0)
    } else {
        let plus = fractional_perimeter(&flowed(n, center, radius, speed, t)?, s, cfg)?;
        let minus = fractional_perimeter(&flowed(n, center, radius, speed, -t)?, s, cfg)?;
        (
            (plus.value - minus.value) / (2.0 * t),
            (plus.error_estimate + minus.error_estimate) / (2.0 * t),
        )
    };
    let (surface, surface_error) = if speed == NormalSpeed::Zero {
        (0.0, 0.0)
    } else {
        surface_integral(model, center, radius, speed, s, cfg)?
    };
    let mismatch = (fd_derivative - surface).abs();
    let scale = fd_derivative.abs().max(surface.abs());
    Ok(VariationCheck {
        fd_derivative,
        surface_integral: surface,
        mismatch,
        relative_mismatch: if scale > 0.0 { mismatch / scale } else { 0.0 },
        fd_error,
        surface_error,
    })
}
