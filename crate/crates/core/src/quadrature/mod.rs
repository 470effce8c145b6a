//! Singular nonlocal integrals.
//!
//! The curvature integrals are computed in polar coordinates around `q`.
//! Along each ray the set is known exactly as a union of intervals, so the
//! radial integral of `r^{-1-s}` is done in closed form and only the
//! angular integral is numerical. Inside `B_eps(q)` the indicator of the
//! tangent half-space is subtracted; that term integrates to zero over the
//! ball by antipodal symmetry and makes the angular integrand bounded near
//! tangent directions.

mod fixtures;
pub mod gk;
mod interaction;

pub use fixtures::{HalfSpace, Wedge};
pub use interaction::interaction_integral;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{orthonormal_complement, unit_ball_volume, Vec3};
use crate::shapes::{clip_intervals, BoundaryPoint, RayCast};
use gk::{AdaptiveOptions, AdaptiveResult, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", deny_unknown_fields)]
pub enum KernelMode {
    PvCancel,
    EpsRegularized { eps_reg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Cancellation radius as a fraction of the diameter.
    pub inner_radius_rel: f64,
    /// Tail cutoff as a fraction of the diameter.
    pub outer_radius_rel: f64,
    /// Maximum bisection depth of the angular quadrature.
    pub subdivision_depth: u32,
    pub target_rel_tol: f64,
    pub kernel_mode: KernelMode,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            inner_radius_rel: 0.02,
            outer_radius_rel: 4.0,
            subdivision_depth: 12,
            target_rel_tol: 1e-4,
            kernel_mode: KernelMode::PvCancel,
        }
    }
}

pub const MIN_REL_TOL: f64 = 1e-6;

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.inner_radius_rel > 0.0
            && self.inner_radius_rel < self.outer_radius_rel
            && self.outer_radius_rel.is_finite()
            && self.target_rel_tol >= MIN_REL_TOL
            && self.target_rel_tol < 1.0
            && (1..=40).contains(&self.subdivision_depth);
        if !ok {
            return Err(Error::InvalidConfig(format!("{self:?}")));
        }
        if let KernelMode::EpsRegularized { eps_reg } = self.kernel_mode {
            if !(eps_reg > 0.0 && eps_reg.is_finite()) {
                return Err(Error::InvalidConfig(format!("eps_reg = {eps_reg}")));
            }
        }
        Ok(())
    }

    fn angular_options(&self, rel_tol: f64) -> AdaptiveOptions {
        AdaptiveOptions {
            rel_tol,
            abs_tol: 0.0,
            max_depth: self.subdivision_depth,
            // the capped kernel has a kink where the boundary crosses |x - q| = eps
            min_depth: match self.kernel_mode {
                KernelMode::PvCancel => 0,
                KernelMode::EpsRegularized { .. } => 4,
            },
            max_intervals: 24 * self.subdivision_depth as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub refinement_levels_used: u32,
    /// Set when the cancellation radius was clamped by the height of `q`.
    #[serde(default)]
    pub near_contact_line: bool,
}

/// `n omega_n R^{-s} / s`: the integral of `|x - q|^{-n-s}` outside `B_R(q)`.
pub fn tail_integral(r: f64, n: usize, s: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidConfig(format!("tail radius {r}")));
    }
    Ok(n as f64 * unit_ball_volume(n) * r.powf(-s) / s)
}

/// `int_a^b r^{-1-s} dr`.
fn radial(a: f64, b: f64, s: f64) -> f64 {
    if b <= a {
        0.0
    } else {
        (a.powf(-s) - b.powf(-s)) / s
    }
}

/// `int_a^b min(r, e)^{-n-s} r^{n-1} dr`.
fn radial_capped(a: f64, b: f64, e: f64, n: usize, s: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let nf = n as f64;
    let mut v = 0.0;
    if a < e {
        let hi = b.min(e);
        v += e.powf(-nf - s) * (hi.powf(nf) - a.powf(nf)) / nf;
    }
    if b > e {
        v += radial(a.max(e), b, s);
    }
    v
}

#[derive(Debug, Clone, Copy)]
enum RayKernel {
    /// Cancellation against the tangent half-space inside radius `eps`;
    /// the ball of radius `core` is handled separately.
    Cancel {
        eps: f64,
        core: f64,
    },
    Capped {
        eps: f64,
    },
}

/// Signed radial integral along one ray, over `(0, r_out)`.
fn ray_value(
    iv: &[(f64, f64)],
    sigma: f64,
    r_out: f64,
    n: usize,
    s: f64,
    kernel: RayKernel,
) -> f64 {
    let inside = clip_intervals(iv, 0.0, r_out);
    let mut segs: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * inside.len() + 1);
    let mut t = 0.0;
    for &(a, b) in &inside {
        if a > t {
            segs.push((t, a, 1.0));
        }
        segs.push((a, b, -1.0));
        t = b;
    }
    if t < r_out {
        segs.push((t, r_out, 1.0));
    }
    let mut acc = 0.0;
    for &(lo, hi, chi) in &segs {
        match kernel {
            RayKernel::Cancel { eps, core } => {
                let w = chi - sigma;
                if w != 0.0 {
                    acc += w * radial(lo.max(core), hi.min(eps), s);
                }
                acc += chi * radial(lo.max(eps), hi, s);
            }
            RayKernel::Capped { eps } => acc += chi * radial_capped(lo, hi, eps, n, s),
        }
    }
    acc
}

/// Integrates `f(omega, sigma)` over the unit sphere, where `sigma` is the
/// sign of `omega . nu`. The sphere is split along the great circle
/// orthogonal to `nu`, and each half is integrated with endpoint clustering
/// towards it.
fn integrate_sphere<F>(n: usize, nu: &Vec3, s: f64, f: F, cfg: &QuadratureConfig) -> AdaptiveResult
where
    F: Fn(&Vec3, f64) -> f64,
{
    let tol = cfg.target_rel_tol;
    let p = gk::clustering_power(s);
    if n == 2 {
        let nu = Vec3::new(nu.x, 0.0, nu.z).normalize();
        let tau = Vec3::new(-nu.z, 0.0, nu.x);
        let dir = |th: f64| th.cos() * nu + th.sin() * tau;
        let opts = cfg.angular_options(0.5 * tol);
        let half = std::f64::consts::FRAC_PI_2;
        let outer =
            gk::integrate_endpoint_singular(|th| f(&dir(th), 1.0).into(), -half, half, p, &opts);
        let inner = gk::integrate_endpoint_singular(
            |th| f(&dir(th), -1.0).into(),
            half,
            3.0 * half,
            p,
            &opts,
        );
        return combine(&[outer, inner]);
    }
    let (t1, t2) = orthonormal_complement(nu);
    let inner_opts = cfg.angular_options(0.25 * tol);
    let outer_opts = cfg.angular_options(0.5 * tol);
    let mut inner_depth = 0;
    let res = gk::integrate(
        |phi| {
            let m = phi.cos() * t1 + phi.sin() * t2;
            let g = |psi: f64, sigma: f64| psi.sin() * f(&(psi.cos() * nu + psi.sin() * m), sigma);
            let half = std::f64::consts::FRAC_PI_2;
            let up = gk::integrate_endpoint_singular(
                |psi| g(psi, 1.0).into(),
                0.0,
                half,
                p,
                &inner_opts,
            );
            let down = gk::integrate_endpoint_singular(
                |psi| g(psi, -1.0).into(),
                half,
                2.0 * half,
                p,
                &inner_opts,
            );
            let both = combine(&[up, down]);
            inner_depth = inner_depth.max(both.max_depth);
            Sample {
                value: both.value,
                err: both.err,
            }
        },
        0.0,
        2.0 * std::f64::consts::PI,
        &outer_opts,
    );
    AdaptiveResult {
        max_depth: res.max_depth.max(inner_depth),
        ..res
    }
}

fn combine(parts: &[AdaptiveResult]) -> AdaptiveResult {
    parts
        .iter()
        .fold(AdaptiveResult::default(), |acc, p| AdaptiveResult {
            value: acc.value + p.value,
            err: acc.err + p.err,
            abs_value: acc.abs_value + p.abs_value,
            max_depth: acc.max_depth.max(p.max_depth),
            evaluations: acc.evaluations + p.evaluations,
        })
}

/// Inside/outside probe along the normal of `q`.
pub fn probe_on_boundary(set: &dyn RayCast, q: &BoundaryPoint) -> bool {
    let mut t = set.length_scale() * 1e-4;
    if set.in_upper_halfspace() {
        t = t.min(0.5 * q.height);
    }
    set.contains(&(q.position - t * q.normal)) && !set.contains(&(q.position + t * q.normal))
}

struct Geometry {
    eps: f64,
    r_out: f64,
    near_contact_line: bool,
    inflation: f64,
}

fn geometry(
    set: &dyn RayCast,
    q: &BoundaryPoint,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<Geometry> {
    cfg.validate()?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "order s = {s} outside (0, 1)"
        )));
    }
    if set.in_upper_halfspace() && !(q.height > 0.0) {
        return Err(Error::NotOnBoundary(format!(
            "height {} is not positive",
            q.height
        )));
    }
    if !probe_on_boundary(set, q) {
        return Err(Error::NotOnBoundary(format!(
            "normal probe failed at {:?}",
            q.position.as_slice()
        )));
    }
    let scale = set.length_scale();
    let nominal = cfg.inner_radius_rel * scale;
    let (eps, near_contact_line) = if set.in_upper_halfspace() && nominal > 0.5 * q.height {
        (0.5 * q.height, true)
    } else {
        (nominal, false)
    };
    let r_out = match set.bounding_box() {
        Some(b) => {
            (cfg.outer_radius_rel * scale).max(b.max_distance_from(&q.position) * (1.0 + 1e-9))
        }
        None => f64::INFINITY,
    };
    Ok(Geometry {
        eps,
        r_out,
        near_contact_line,
        inflation: (nominal / eps).powf(s).max(1.0),
    })
}

fn finish(res: AdaptiveResult, tail: f64, g: &Geometry) -> IntegralResult {
    let value = res.value + tail;
    let err = (res.err + 1e-14 * (res.abs_value + tail.abs())) * g.inflation;
    IntegralResult {
        value,
        error_estimate: err,
        refinement_levels_used: res.max_depth,
        near_contact_line: g.near_contact_line,
    }
}

/// Signed normal curvature of the boundary at `q` in the tangent direction
/// `e`, read off the crossing distance `2 sin(phi) / kappa` of rays leaving
/// `q` at a small angle `phi` below and above the tangent plane.
fn normal_curvature(set: &dyn RayCast, q: &BoundaryPoint, e: &Vec3) -> f64 {
    let phi: f64 = 1e-4;
    let floor = 1e-9 * set.length_scale();
    let first_after = |d: &Vec3| {
        set.ray_intervals(&q.position, d)
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .filter(|&t| t > floor)
            .fold(f64::INFINITY, f64::min)
    };
    let t_in = first_after(&(phi.cos() * e - phi.sin() * q.normal));
    let t_out = first_after(&(phi.cos() * e + phi.sin() * q.normal));
    if t_in < t_out {
        2.0 * phi.sin() / t_in
    } else if t_out.is_finite() {
        -2.0 * phi.sin() / t_out
    } else {
        0.0
    }
}

/// `int kappa(e) de` over unit tangent directions at `q` (twice the mean
/// curvature for `n = 2`, `pi` times the principal curvature sum for `n = 3`).
fn tangential_curvature_integral(set: &dyn RayCast, q: &BoundaryPoint) -> f64 {
    if set.dim() == 2 {
        let nu = Vec3::new(q.normal.x, 0.0, q.normal.z).normalize();
        let tau = Vec3::new(-nu.z, 0.0, nu.x);
        return normal_curvature(set, q, &tau) + normal_curvature(set, q, &-tau);
    }
    let (t1, t2) = orthonormal_complement(&q.normal);
    let sum: f64 = [t1, -t1, t2, -t2]
        .iter()
        .map(|e| normal_curvature(set, q, e))
        .sum();
    0.5 * std::f64::consts::PI * sum
}

/// Principal value `p.v. int (chi_{E^c} - chi_E)(x) |x - q|^{-n-s} dx`.
/// The value has units of length^{-s}.
pub fn pv_curvature_integral(
    set: &dyn RayCast,
    q: &BoundaryPoint,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let g = geometry(set, q, s, cfg)?;
    let n = set.dim();
    // Below `core` the boundary position is limited by the rounding of q, so
    // the set is replaced there by its osculating paraboloid, whose
    // discrepancy with the tangent half-space integrates in closed form.
    let core = 1e-6 * set.length_scale().min(1e3 * g.eps);
    let kernel = RayKernel::Cancel { eps: g.eps, core };
    let curv = tangential_curvature_integral(set, q);
    let core_part = curv * core.powf(1.0 - s) / (1.0 - s);
    let res = integrate_sphere(
        n,
        &q.normal,
        s,
        |w, sigma| {
            ray_value(
                &set.ray_intervals(&q.position, w),
                sigma,
                g.r_out,
                n,
                s,
                kernel,
            )
        },
        cfg,
    );
    let tail = if g.r_out.is_finite() {
        tail_integral(g.r_out, n, s)?
    } else {
        0.0
    };
    let mut out = finish(res, tail + core_part, &g);
    out.error_estimate += 1e-4 * core_part.abs();
    Ok(out)
}

/// Same integral with the kernel `min(|x - q|, eps_reg)^{-n-s}`; no
/// cancellation is needed.
pub fn regularized_curvature_integral(
    set: &dyn RayCast,
    q: &BoundaryPoint,
    s: f64,
    eps_reg: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    if !(eps_reg > 0.0) {
        return Err(Error::InvalidConfig(format!("eps_reg = {eps_reg}")));
    }
    let cfg = &QuadratureConfig {
        kernel_mode: KernelMode::EpsRegularized { eps_reg },
        ..*cfg
    };
    let mut g = geometry(set, q, s, cfg)?;
    g.inflation = 1.0;
    g.near_contact_line = false;
    let n = set.dim();
    let kernel = RayKernel::Capped { eps: eps_reg };
    let res = integrate_sphere(
        n,
        &q.normal,
        s,
        |w, sigma| {
            ray_value(
                &set.ray_intervals(&q.position, w),
                sigma,
                g.r_out,
                n,
                s,
                kernel,
            )
        },
        cfg,
    );
    let tail = if g.r_out.is_finite() {
        n as f64 * unit_ball_volume(n) * radial_capped(g.r_out, f64::INFINITY, eps_reg, n, s)
    } else {
        0.0
    };
    Ok(finish(res, tail, &g))
}

/// Dispatches on the configured kernel mode.
pub fn curvature_integral(
    set: &dyn RayCast,
    q: &BoundaryPoint,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    match cfg.kernel_mode {
        KernelMode::PvCancel => pv_curvature_integral(set, q, s, cfg),
        KernelMode::EpsRegularized { eps_reg } => {
            regularized_curvature_integral(set, q, s, eps_reg, cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{build_shape, SetModel, ShapeDocument, ShapeSpec, TransformOp};
    use statrs::function::gamma::gamma;
    use std::f64::consts::PI;

    /// Double-exponential rule on `(a, b)`; endpoint singularities are fine.
    fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
        let h = 1.0 / 128.0;
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for k in -600..=600 {
            let t = k as f64 * h;
            let u = 0.5 * PI * t.sinh();
            let x = u.tanh();
            let w = 0.5 * PI * t.cosh() / (u.cosh() * u.cosh());
            // distance to the nearer endpoint, computed without cancellation
            let gap = r / (u.abs().exp() * u.cosh());
            let p = if x < 0.0 { a + gap } else { b - gap };
            if gap > 0.0 && p > a && p < b {
                acc += w * f(p);
            }
            let _ = c;
        }
        acc * r * h
    }

    fn model(n: usize, shape: ShapeSpec) -> SetModel {
        build_shape(&ShapeDocument {
            n,
            shape,
            allow_disconnected: false,
        })
        .unwrap()
    }

    fn point_on(m: &SetModel, pos: Vec3) -> BoundaryPoint {
        BoundaryPoint::new(pos, m.normal(&pos))
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn tail_closed_forms() {
        assert!((tail_integral(1.0, 2, 0.5).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((tail_integral(2.0, 2, 0.5).unwrap() - 4.0 * PI * 0.5f64.sqrt()).abs() < 1e-12);
        assert!((tail_integral(1.0, 3, 0.25).unwrap() - 16.0 * PI).abs() < 1e-12);
        assert!(tail_integral(0.0, 2, 0.5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = QuadratureConfig {
            inner_radius_rel: 5.0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig {
            target_rel_tol: 1e-7,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let text = serde_json::to_string(&cfg()).unwrap();
        let back: QuadratureConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg());
        let partial: QuadratureConfig =
            serde_json::from_str(r#"{"target_rel_tol": 1e-3}"#).unwrap();
        assert_eq!(partial.inner_radius_rel, 0.02);
    }

    #[test]
    fn tangent_halfspace_vanishes() {
        for n in [2, 3] {
            let nu = if n == 2 {
                Vec3::new(0.6, 0.0, 0.8)
            } else {
                Vec3::new(0.48, 0.6, 0.64)
            };
            let hs = HalfSpace::new(n, Vec3::new(0.3, 0.0, 1.0), nu);
            let q = hs.boundary_point();
            let r = pv_curvature_integral(&hs, &q, 0.5, &cfg()).unwrap();
            assert!(r.value.abs() < 1e-8, "n={n}: {}", r.value);
            for e in [0.1, 1.0, 10.0] {
                let r = regularized_curvature_integral(&hs, &q, 0.5, e, &cfg()).unwrap();
                assert!(
                    r.value.abs() < 1e-8 * e.powf(-0.5),
                    "n={n} e={e}: {}",
                    r.value
                );
            }
        }
    }

    /// Signed arc fraction of circles about a point of the unit circle.
    fn disk_oracle(s: f64) -> f64 {
        let inner = tanh_sinh(
            |r| r.powf(-1.0 - s) * (2.0 * PI - 4.0 * (0.5 * r).acos()),
            0.0,
            2.0,
        );
        inner + 2.0 * PI * 2f64.powf(-s) / s
    }

    #[test]
    fn disk_matches_radial_reduction() {
        let s = 0.5;
        let m = model(2, ShapeSpec::ball_cap(1.0, 2.0));
        let want = disk_oracle(s);
        for th in [0.0f64, 0.7, 1.9, 3.0, 4.4] {
            let pos = Vec3::new(th.cos(), 0.0, 2.0 + th.sin());
            let r = pv_curvature_integral(&m, &point_on(&m, pos), s, &cfg()).unwrap();
            assert!(
                (r.value - want).abs() < 1e-4 * want,
                "theta={th}: {} vs {want} (err {})",
                r.value,
                r.error_estimate
            );
            assert!(r.error_estimate >= 0.0 && r.error_estimate < 1e-3 * want);
        }
    }

    #[test]
    fn sphere_matches_closed_form() {
        // Cap-area fraction gives the integrand 2 pi r^{-s} on (0, 2).
        for s in [0.3, 0.7] {
            let want = 2.0 * PI * 2f64.powf(1.0 - s) / (1.0 - s) + 4.0 * PI * 2f64.powf(-s) / s;
            let m = model(3, ShapeSpec::ball_cap(1.0, 1.5));
            let pos = Vec3::new(0.6, 0.0, 1.5 + 0.8);
            let r = pv_curvature_integral(&m, &point_on(&m, pos), s, &cfg()).unwrap();
            assert!(
                (r.value - want).abs() < 2e-4 * want,
                "s={s}: {} vs {want}",
                r.value
            );
        }
    }

    #[test]
    fn homogeneity_under_scaling() {
        let s = 0.5;
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.5));
        let big = crate::shapes::transform(&m, TransformOp::Scale { factor: 2.0 }).unwrap();
        let pos = Vec3::new((1.0f64 - 0.09).sqrt(), 0.0, 0.8);
        let a = pv_curvature_integral(&m, &point_on(&m, pos), s, &cfg()).unwrap();
        let b = pv_curvature_integral(&big, &point_on(&big, 2.0 * pos), s, &cfg()).unwrap();
        let want = a.value * 2f64.powf(-s);
        assert!(
            (b.value - want).abs()
                <= 2.0 * cfg().target_rel_tol * want.abs()
                    + 2.0 * (a.error_estimate + b.error_estimate),
            "{} vs {want}",
            b.value
        );
    }

    fn wedge_quarter_closed_form(s: f64) -> f64 {
        // (2/s) int_0^{pi/2} sin^s
        (2.0 / s) * 0.5 * PI.sqrt() * gamma(0.5 * (1.0 + s)) / gamma(1.0 + 0.5 * s)
    }

    #[test]
    fn quarter_plane_closed_form() {
        let s = 0.5;
        let w = Wedge::new(2, 0.0);
        let want = wedge_quarter_closed_form(s);
        for h in [1.0, 2.0, 4.0] {
            let r = pv_curvature_integral(&w, &w.face_point(h), s, &cfg()).unwrap();
            let c = r.value * h.powf(s);
            assert!((c - want).abs() < 1e-5 * want, "h={h}: {c} vs {want}");
        }
    }

    #[test]
    fn wedge_product_structure() {
        // For E' x R the extra variable integrates out to B(1/2, 1 + s/2).
        let s = 0.5;
        let beta = PI.sqrt() * gamma(1.0 + 0.5 * s) / gamma(1.5 + 0.5 * s);
        for sigma in [-0.5, 0.0, 0.5] {
            let w2 = Wedge::new(2, sigma);
            let w3 = Wedge::new(3, sigma);
            let a = pv_curvature_integral(&w2, &w2.face_point(1.0), s, &cfg()).unwrap();
            let b = pv_curvature_integral(&w3, &w3.face_point(1.0), s, &cfg()).unwrap();
            assert!(
                (b.value - beta * a.value).abs() < 5e-4 * b.value.abs(),
                "sigma={sigma}: {} vs {}",
                b.value,
                beta * a.value
            );
        }
    }

    #[test]
    fn capped_kernel_with_large_cap_is_signed_volume() {
        let s = 0.5;
        let m = model(2, ShapeSpec::ball_cap(1.0, 2.0));
        let big_r = 4.0 * m.diameter();
        let e = 2.0 * big_r;
        let pos = Vec3::new(1.0, 0.0, 2.0);
        let r = regularized_curvature_integral(&m, &point_on(&m, pos), s, e, &cfg()).unwrap();
        let signed = PI * big_r * big_r - 2.0 * PI;
        let tail = 2.0 * PI * radial_capped(big_r, f64::INFINITY, e, 2, s);
        let want = signed * e.powf(-2.0 - s) + tail;
        assert!(
            (r.value - want).abs() < 1e-8 * want,
            "{} vs {want}",
            r.value
        );
    }

    #[test]
    fn regularized_approaches_pv() {
        let s = 0.5;
        let m = model(2, ShapeSpec::ball_cap(1.0, 2.0));
        let q = point_on(&m, Vec3::new(0.6, 0.0, 2.8));
        let pv = pv_curvature_integral(&m, &q, s, &cfg()).unwrap().value;
        let mut last = f64::INFINITY;
        for k in 1..7 {
            let e = 2f64.powi(-k);
            let r = regularized_curvature_integral(&m, &q, s, e, &cfg()).unwrap();
            let gap = (r.value - pv).abs();
            assert!(gap < last, "k={k}: {gap} !< {last}");
            last = gap;
        }
        assert!(last < 0.05 * pv.abs());
    }

    #[test]
    fn inclusion_monotone() {
        // Internally tangent balls sharing their top point.
        let s = 0.5;
        let small = model(2, ShapeSpec::ball_cap(0.5, 2.5));
        let big = model(2, ShapeSpec::ball_cap(1.0, 2.0));
        let top = Vec3::new(0.0, 0.0, 3.0);
        let a = pv_curvature_integral(&small, &point_on(&small, top), s, &cfg()).unwrap();
        let b = pv_curvature_integral(&big, &point_on(&big, top), s, &cfg()).unwrap();
        assert!(a.value >= b.value - a.error_estimate - b.error_estimate);
    }

    #[test]
    fn tail_split_is_consistent() {
        // Brute-force the shell between R and 2R: chi = +1 there.
        let (n, s, r) = (2, 0.5, 3.0);
        let shell = 2.0 * PI * tanh_sinh(|t| t.powf(-1.0 - s), r, 2.0 * r);
        let total = shell + tail_integral(2.0 * r, n, s).unwrap();
        assert!((total - tail_integral(r, n, s).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn rejects_points_off_the_boundary() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 2.0));
        let q = BoundaryPoint::new(Vec3::new(0.0, 0.0, 2.5), Vec3::z());
        assert!(matches!(
            pv_curvature_integral(&m, &q, 0.5, &cfg()),
            Err(Error::NotOnBoundary(_))
        ));
    }

    #[test]
    fn contact_line_clamp_flags_and_inflates() {
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.5));
        let h = 0.004;
        let x = (1.0 - (h - 0.5f64).powi(2)).sqrt();
        let q = point_on(&m, Vec3::new(x, 0.0, h));
        let r = pv_curvature_integral(&m, &q, 0.5, &cfg()).unwrap();
        assert!(r.near_contact_line);
        assert!(r.value.is_finite() && r.error_estimate > 0.0);
    }

    #[test]
    fn bit_reproducible() {
        let m = model(3, ShapeSpec::ellipsoid_cap(vec![1.0, 0.7, 0.5], 0.2));
        let pos = Vec3::new(0.0, 0.0, 0.7);
        let q = point_on(&m, pos);
        let a = pv_curvature_integral(&m, &q, 0.4, &cfg()).unwrap();
        let b = pv_curvature_integral(&m, &q, 0.4, &cfg()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
