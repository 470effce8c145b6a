//! Fractional perimeter and Gauss free energy.
//!
//! `I_s(E, E^c ∩ H)` is computed line by line: writing `y = x + t w`, the
//! double integral becomes an integral over oriented lines of a 1D double
//! integral of `(v - u)^{-1-s}` over `E x (E^c ∩ H)` on the line, which has a
//! closed form. `I_s(E, H^c)` reduces to `kappa(n, s) int_E x_n^{-s} dx`.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geom::{orthonormal_complement, Vec3};
use crate::quadrature::gk::{self, AdaptiveOptions, AdaptiveResult, Sample};
use crate::quadrature::{IntegralResult, QuadratureConfig};
use crate::shapes::{RayCast, SetModel};

/// `kappa(n, s)` with `int_{H^c} |x - q|^{-n-s} dx = kappa q_n^{-s}`:
/// `pi^{(n-1)/2} Gamma((1+s)/2) / (s Gamma((n+s)/2))`.
pub fn halfspace_kappa(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    std::f64::consts::PI.powf(0.5 * (nf - 1.0)) * gamma(0.5 * (1.0 + s))
        / (s * gamma(0.5 * (nf + s)))
}

/// `int_{H^c} |x - q|^{-n-s} dx` for a point at height `q_n`.
pub fn halfspace_potential(q_n: f64, n: usize, s: f64) -> Result<f64> {
    if !(q_n > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "height {q_n} is not positive"
        )));
    }
    Ok(halfspace_kappa(n, s) * q_n.powf(-s))
}

/// `(x + d)^{1-s} - x^{1-s}` without cancellation.
fn pow_step(x: f64, d: f64, s: f64) -> f64 {
    if x <= 0.0 {
        return d.powf(1.0 - s);
    }
    x.powf(1.0 - s) * ((1.0 - s) * (d / x).ln_1p()).exp_m1()
}

/// `int_a^b int_c^d (v - u)^{-1-s} dv du` for `b <= c`, `d` possibly infinite.
fn pair_right(a: f64, b: f64, c: f64, d: f64, s: f64) -> f64 {
    let len = b - a;
    let near = pow_step(c - b, len, s);
    let far = if d.is_finite() {
        pow_step(d - b, len, s)
    } else {
        0.0
    };
    (near - far) / (s * (1.0 - s))
}

/// Interaction of the intervals `inside` with the gaps between them inside
/// the window `(lo, hi)`, counting both orientations of the line.
pub(crate) fn line_interaction(inside: &[(f64, f64)], lo: f64, hi: f64, s: f64) -> f64 {
    if inside.is_empty() || lo >= hi {
        return 0.0;
    }
    let mut gaps = Vec::with_capacity(inside.len() + 1);
    let mut t = lo;
    for &(a, b) in inside {
        if a > t {
            gaps.push((t, a));
        }
        t = t.max(b);
    }
    if t < hi {
        gaps.push((t, hi));
    }
    let mut acc = 0.0;
    for &(a, b) in inside {
        for &(c, d) in &gaps {
            if c >= b {
                acc += pair_right(a, b, c, d, s);
            } else if d <= a {
                acc += pair_right(-b, -a, -d, -c, s);
            }
        }
    }
    acc
}

/// Window of `t` with `o + t w` in `{x_n > 0}`.
fn upper_window(o: &Vec3, w: &Vec3) -> (f64, f64) {
    if w.z > 0.0 {
        (-o.z / w.z, f64::INFINITY)
    } else if w.z < 0.0 {
        (f64::NEG_INFINITY, -o.z / w.z)
    } else if o.z > 0.0 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        (0.0, 0.0)
    }
}

fn range_along(model: &SetModel, axis: &Vec3) -> (f64, f64) {
    let corners = model.bbox().corners();
    let vals = corners.iter().map(|c| c.dot(axis));
    let lo = vals.clone().fold(f64::INFINITY, f64::min);
    let hi = vals.fold(f64::NEG_INFINITY, f64::max);
    let pad = 1e-9 * model.diameter();
    (lo - pad, hi + pad)
}

fn options(cfg: &QuadratureConfig, rel_tol: f64) -> AdaptiveOptions {
    AdaptiveOptions {
        rel_tol,
        abs_tol: 0.0,
        max_depth: cfg.subdivision_depth + 4,
        min_depth: 0,
        max_intervals: 30 * cfg.subdivision_depth as usize,
    }
}

fn sample(r: &AdaptiveResult) -> Sample {
    Sample {
        value: r.value,
        err: r.err,
    }
}

/// `I_s(E, E^c ∩ H)`, units length^{n-s}.
pub fn interior_energy(model: &SetModel, s: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    cfg.validate()?;
    let tol = cfg.target_rel_tol;
    let line = |o: Vec3, w: &Vec3| {
        let (lo, hi) = upper_window(&o, w);
        line_interaction(&model.ray_intervals(&o, w), lo, hi, s)
    };
    let res = if model.n() == 2 {
        gk::integrate_par(
            |th| {
                let w = Vec3::new(th.cos(), 0.0, th.sin());
                let m = Vec3::new(-th.sin(), 0.0, th.cos());
                let (a, b) = range_along(model, &m);
                sample(&gk::integrate(
                    |z| line(z * m, &w).into(),
                    a,
                    b,
                    &options(cfg, 0.25 * tol),
                ))
            },
            0.0,
            std::f64::consts::PI,
            &options(cfg, 0.5 * tol),
        )
    } else {
        // Upper hemisphere of directions; each line is counted once. With a
        // vertical symmetry axis the azimuthal integral is 2 pi times its
        // integrand.
        let symmetric = model.vertical_axis().is_some();
        gk::integrate_par(
            |psi| {
                let azimuth = |phi: f64| -> Sample {
                    let w = Vec3::new(psi.sin() * phi.cos(), psi.sin() * phi.sin(), psi.cos());
                    let (e1, e2) = orthonormal_complement(&w);
                    let (a1, b1) = range_along(model, &e1);
                    let (a2, b2) = range_along(model, &e2);
                    let r = gk::integrate(
                        |u| {
                            sample(&gk::integrate(
                                |v| line(u * e1 + v * e2, &w).into(),
                                a2,
                                b2,
                                &options(cfg, 0.5 * tol),
                            ))
                        },
                        a1,
                        b1,
                        &options(cfg, 0.5 * tol),
                    );
                    sample(&r)
                };
                let r = if symmetric {
                    let v = azimuth(0.0);
                    let tau = 2.0 * std::f64::consts::PI;
                    AdaptiveResult {
                        value: tau * v.value,
                        err: tau * v.err,
                        ..Default::default()
                    }
                } else {
                    gk::integrate(
                        azimuth,
                        0.0,
                        2.0 * std::f64::consts::PI,
                        &options(cfg, 0.5 * tol),
                    )
                };
                Sample {
                    value: psi.sin() * r.value,
                    err: psi.sin() * r.err,
                }
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            &options(cfg, 0.5 * tol),
        )
    };
    Ok(IntegralResult {
        value: res.value,
        error_estimate: res.err,
        refinement_levels_used: res.max_depth,
        near_contact_line: false,
    })
}

/// Measure of the horizontal slice `E ∩ {x_n = z}`.
fn slice_measure(model: &SetModel, z: f64, cfg: &QuadratureConfig, rel_tol: f64) -> Sample {
    let b = model.bbox();
    let x0 = b.min.x - 1.0;
    let lengths = |y: f64| -> f64 {
        model
            .ray_intervals(&Vec3::new(x0, y, z), &Vec3::x())
            .iter()
            .map(|(a, b)| b - a)
            .sum()
    };
    if model.n() == 2 {
        return lengths(0.0).into();
    }
    sample(&gk::integrate(
        |y| lengths(y).into(),
        b.min.y,
        b.max.y,
        &options(cfg, rel_tol),
    ))
}

/// `I_s(E, H^c) = kappa(n, s) int_E x_n^{-s} dx`.
pub fn halfspace_energy(
    model: &SetModel,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    cfg.validate()?;
    let tol = cfg.target_rel_tol;
    let b = model.bbox();
    let top = b.max.z;
    let bottom = b.min.z.max(0.0);
    let p = gk::clustering_power(s);
    let len = top - bottom;
    let res = gk::integrate_par(
        |u| {
            let (w, dw) = gk::cluster(u, p);
            let z = bottom + len * w;
            if z <= 0.0 {
                return Sample::default();
            }
            let a = slice_measure(model, z, cfg, 0.25 * tol);
            let f = z.powf(-s) * len * dw;
            Sample {
                value: a.value * f,
                err: a.err * f,
            }
        },
        0.0,
        1.0,
        &options(cfg, 0.5 * tol),
    );
    let kappa = halfspace_kappa(model.n(), s);
    Ok(IntegralResult {
        value: kappa * res.value,
        error_estimate: kappa * res.err,
        refinement_levels_used: res.max_depth,
        near_contact_line: false,
    })
}

/// The two interaction energies of `E` with the rest of space, computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    /// `I_s(E, E^c ∩ H)`.
    pub interior: IntegralResult,
    /// `I_s(E, H^c)`.
    pub halfspace: IntegralResult,
}

impl EnergyParts {
    pub fn compute(model: &SetModel, s: f64, cfg: &QuadratureConfig) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "order s = {s} outside (0, 1)"
            )));
        }
        Ok(EnergyParts {
            interior: interior_energy(model, s, cfg)?,
            halfspace: halfspace_energy(model, s, cfg)?,
        })
    }

    /// `I_s(E, E^c ∩ H) + gamma I_s(E, H^c)`.
    pub fn gauss(&self, gamma: f64) -> IntegralResult {
        IntegralResult {
            value: self.interior.value + gamma * self.halfspace.value,
            error_estimate: self.interior.error_estimate
                + gamma.abs() * self.halfspace.error_estimate,
            refinement_levels_used: self
                .interior
                .refinement_levels_used
                .max(self.halfspace.refinement_levels_used),
            near_contact_line: false,
        }
    }

    pub fn perimeter(&self) -> IntegralResult {
        self.gauss(1.0)
    }
}

/// `P_s(E) = I_s(E, E^c)`, units length^{n-s}.
pub fn fractional_perimeter(
    model: &SetModel,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    Ok(EnergyParts::compute(model, s, cfg)?.perimeter())
}

/// Fractional Gauss free energy with `Omega = H`.
pub fn gauss_energy(
    model: &SetModel,
    gamma: f64,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    if !(gamma > -1.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "gamma = {gamma} outside (-1, 1)"
        )));
    }
    Ok(EnergyParts::compute(model, s, cfg)?.gauss(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{build_shape, transform, ShapeDocument, ShapeSpec, TransformOp};
    use std::f64::consts::PI;
    use std::time::Instant;

    fn model(n: usize, shape: ShapeSpec) -> SetModel {
        build_shape(&ShapeDocument {
            n,
            shape,
            allow_disconnected: false,
        })
        .unwrap()
    }

    #[test]
    fn pair_formula_against_midpoint_sum() {
        let s = 0.4;
        let (a, b, c, d) = (0.0, 1.0, 1.5, 3.0);
        let m = 2000;
        let h1 = (b - a) / m as f64;
        let h2 = (d - c) / m as f64;
        let mut brute = 0.0;
        for i in 0..m {
            for j in 0..m {
                let u = a + (i as f64 + 0.5) * h1;
                let v = c + (j as f64 + 0.5) * h2;
                brute += h1 * h2 * (v - u).powf(-1.0 - s);
            }
        }
        let exact = pair_right(a, b, c, d, s);
        assert!((exact - brute).abs() < 1e-5 * exact, "{exact} vs {brute}");
        // reflection
        assert!((pair_right(-d, -c, -b, -a, s) - exact).abs() < 1e-12);
    }

    #[test]
    fn kappa_matches_one_dimensional_reduction() {
        // int_1^inf t^{-1-s} dt * int_R (1 + w^2)^{-(2+s)/2} dw, with w = tan(a)
        let s = 0.5;
        let m = 200000;
        let h = PI / m as f64;
        let c: f64 = (0..m)
            .map(|i| {
                let a = -0.5 * PI + (i as f64 + 0.5) * h;
                h * a.cos().powf(s)
            })
            .sum();
        assert!((c / s - halfspace_kappa(2, s)).abs() < 1e-6);
        let q = halfspace_potential(2.0, 2, s).unwrap();
        assert!((q / halfspace_potential(1.0, 2, s).unwrap() - 2f64.powf(-s)).abs() < 1e-14);
    }

    #[test]
    fn disk_perimeter_matches_curvature_identity() {
        // H(B_1) n omega_n = (n - s) P_s(B_1); H from the arc-fraction reduction.
        let s = 0.5;
        let m = 400000;
        let h = 2.0 / m as f64;
        // substitute r = 2 x^2 to tame r^{-s}
        let mut inner = 0.0;
        for i in 0..m / 2 {
            let x = (i as f64 + 0.5) * (1.0 / (m / 2) as f64);
            let r = 2.0 * x * x;
            inner += (1.0 / (m / 2) as f64)
                * 4.0
                * x
                * r.powf(-1.0 - s)
                * (2.0 * PI - 4.0 * (0.5 * r).acos());
        }
        let _ = h;
        let curv = inner + 2.0 * PI * 2f64.powf(-s) / s;
        let want = curv * 2.0 * PI / (2.0 - s);
        let ball = model(2, ShapeSpec::ball_cap(1.0, 2.0));
        let t = Instant::now();
        let p = fractional_perimeter(&ball, s, &QuadratureConfig::default()).unwrap();
        eprintln!(
            "disk perimeter {} vs {want} err {} in {:?}",
            p.value,
            p.error_estimate,
            t.elapsed()
        );
        assert!((p.value - want).abs() < 1e-3 * want);
    }

    #[test]
    fn perimeter_scales_and_ignores_height() {
        let s = 0.5;
        let cfg = QuadratureConfig::default();
        let a = model(2, ShapeSpec::ball_cap(1.0, 2.0));
        let b = model(2, ShapeSpec::ball_cap(1.0, 3.5));
        let pa = fractional_perimeter(&a, s, &cfg).unwrap();
        let pb = fractional_perimeter(&b, s, &cfg).unwrap();
        assert!((pa.value - pb.value).abs() < 2e-4 * pa.value);
        let cap = model(2, ShapeSpec::ball_cap(1.0, 0.4));
        let big = transform(&cap, TransformOp::Scale { factor: 2.0 }).unwrap();
        let p1 = fractional_perimeter(&cap, s, &cfg).unwrap();
        let p2 = fractional_perimeter(&big, s, &cfg).unwrap();
        assert!((p2.value - 2f64.powf(2.0 - s) * p1.value).abs() < 5e-4 * p2.value);
    }

    #[test]
    fn gauss_energy_is_affine() {
        let s = 0.5;
        let m = model(2, ShapeSpec::ball_cap(1.0, 0.0));
        let parts = EnergyParts::compute(&m, s, &QuadratureConfig::default()).unwrap();
        let e = |g: f64| parts.gauss(g).value;
        let mid = 0.5 * (e(-0.5) + e(0.5));
        assert!((mid - e(0.0)).abs() <= 1e-10 * e(0.0).abs());
        assert_eq!(parts.gauss(0.0).value, parts.interior.value);
    }

    #[test]
    fn sphere_perimeter_smoke() {
        let s = 0.5;
        let want_h = 2.0 * PI * 2f64.powf(1.0 - s) / (1.0 - s) + 4.0 * PI * 2f64.powf(-s) / s;
        let want = want_h * 4.0 * PI / (3.0 - s);
        let ball = model(3, ShapeSpec::ball_cap(1.0, 2.0));
        let cfg = QuadratureConfig {
            target_rel_tol: 1e-3,
            ..Default::default()
        };
        let t = Instant::now();
        let p = fractional_perimeter(&ball, s, &cfg).unwrap();
        eprintln!(
            "sphere perimeter {} vs {want} err {} in {:?}",
            p.value,
            p.error_estimate,
            t.elapsed()
        );
        assert!((p.value - want).abs() < 5e-3 * want);
    }
}
