//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use fracap::geom::Vec3;
use fracap::measures::{
    curvature_at, curvature_field, first_variation_check, fractional_perimeter,
    wedge_scaled_curvature, NormalSpeed,
};
use fracap::quadrature::{pv_curvature_integral, regularized_curvature_integral, QuadratureConfig};
use fracap::shapes::{
    build_shape, project_along, sample_boundary, transform, BoundaryPoint, SetModel, ShapeDocument,
    ShapeSpec, TransformOp,
};
use fracap::symmetry::{critical_plane, symmetric_difference_volume, PlaneOptions};
use fracap::verify::{
    audit_theorem_a, audit_theorem_b, default_directions, default_heights, dyadic_heights,
    estimate_deficit, fit_blowup, gradient_bound_audit, AuditOptions,
};
use fracap::Result;

// tolerances
const BALL_SPREAD_ERR_FACTOR: f64 = 3.0;
const BALL_SPREAD_REL: f64 = 0.02;
const BALL_POINTS: usize = 64;
const HOMOGENEITY_BUDGET_FACTOR: f64 = 2.0;
const WEDGE_HEIGHT_AGREEMENT: f64 = 0.01;
const SLOPE_TOL: f64 = 0.05;
const PREFACTOR_TOL: f64 = 0.10;
const LADDER_H0: f64 = 1e-3;
const LADDER_COUNT: usize = 6;
const SLICE_HEIGHTS: usize = 5;
const VARIATION_TOL: f64 = 0.02;
const LENS_TOL: f64 = 0.02;
const LENS_RESOLUTION: usize = 128;

const S: f64 = 0.5;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

fn model(n: usize, shape: ShapeSpec) -> SetModel {
    build_shape(&ShapeDocument::new(n, shape)).expect("fixture builds")
}

fn ellipse(tilt: f64) -> SetModel {
    model(
        2,
        ShapeSpec::EllipsoidCap {
            semi_axes: vec![1.0, 1.2],
            center_height: 0.3,
            tilt,
            horizontal_center: vec![],
        },
    )
}

/// Tighter quadrature for the deficit audits, so that `delta_s` resolves small tilts.
fn fine() -> QuadratureConfig {
    QuadratureConfig {
        target_rel_tol: 1e-6,
        ..Default::default()
    }
}

fn c1_ball_constancy() -> Result<Verdict> {
    let m = model(2, ShapeSpec::ball_cap(1.0, 2.0));
    let pts: Vec<BoundaryPoint> = (0..BALL_POINTS)
        .map(|k| {
            let a = 2.0 * PI * (k as f64 + 0.5) / BALL_POINTS as f64;
            let nu = Vec3::new(a.cos(), 0.0, a.sin());
            BoundaryPoint::new(Vec3::new(0.0, 0.0, 2.0) + nu, nu)
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.25, 0.5, 0.75] {
        let f = curvature_at(&m, &pts, s, &QuadratureConfig::default())?;
        let v: Vec<f64> = f.iter().map(|e| e.value).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let mean_err = f.iter().map(|e| e.error_estimate).sum::<f64>() / f.len() as f64;
        let spread =
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        pass &= spread <= BALL_SPREAD_ERR_FACTOR * mean_err && spread <= BALL_SPREAD_REL * mean;
        parts.push(format!(
            "s={s} spread/mean {:.2e} err/mean {:.2e}",
            spread / mean,
            mean_err / mean
        ));
    }
    Ok(Verdict::new(pass, parts.join("; ")))
}

fn c2_homogeneity() -> Result<Verdict> {
    let cfg = QuadratureConfig::default();
    let fixtures = [
        ("ball", model(2, ShapeSpec::ball_cap(1.0, 2.0))),
        ("cap", model(2, ShapeSpec::ball_cap(1.0, 0.5))),
        ("tilted ellipse", ellipse(0.3)),
    ];
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (_, m) in &fixtures {
        let all: Vec<BoundaryPoint> = sample_boundary(m, 12)?
            .into_iter()
            .filter(|p| p.height > 0.05)
            .collect();
        let pts: Vec<BoundaryPoint> = all
            .iter()
            .step_by((all.len() / 6).max(1))
            .cloned()
            .collect();
        let base = curvature_at(m, &pts, S, &cfg)?;
        for t in [0.5, 2.0] {
            let scaled = transform(m, TransformOp::Scale { factor: t })?;
            let moved: Vec<BoundaryPoint> = pts
                .iter()
                .map(|p| BoundaryPoint::new(p.position * t, p.normal))
                .collect();
            let after = curvature_at(&scaled, &moved, S, &cfg)?;
            let f = t.powf(-S);
            for (a, b) in base.iter().zip(&after) {
                let budget = HOMOGENEITY_BUDGET_FACTOR * (b.error_estimate + f * a.error_estimate);
                worst = worst.max((b.value - f * a.value).abs() / budget);
                checked += 1;
            }
        }
    }
    Ok(Verdict::new(
        worst <= 1.0,
        format!("{checked} points on 3 fixtures, worst |gap|/budget {worst:.3}"),
    ))
}

fn c3_wedge_scaling() -> Result<Verdict> {
    let cfg = QuadratureConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for sigma in [-0.5, 0.0, 0.5] {
        let v: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&h| wedge_scaled_curvature(2, S, sigma, h, &cfg).map(|r| r.0))
            .collect::<Result<_>>()?;
        let mean = v.iter().sum::<f64>() / 3.0;
        let rel = v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean;
        pass &= rel <= WEDGE_HEIGHT_AGREEMENT;
        parts.push(format!("sigma={sigma} c={mean:.5} rel {rel:.1e}"));
    }
    Ok(Verdict::new(pass, parts.join("; ")))
}

fn contact_cap() -> SetModel {
    model(2, ShapeSpec::ball_cap(1.0, 0.5))
}

fn c4_blowup() -> Result<Verdict> {
    let fit = fit_blowup(
        &contact_cap(),
        S,
        &QuadratureConfig::default(),
        &dyadic_heights(LADDER_H0, LADDER_COUNT),
    )?;
    let pass = (fit.slope + S).abs() <= SLOPE_TOL && fit.rel_err <= PREFACTOR_TOL;
    Ok(Verdict::new(
        pass,
        format!(
            "slope {:.4} (want {:.2} ± {SLOPE_TOL}), prefactor {:.4} vs wedge {:.4}, rel {:.2e}",
            fit.slope, -S, fit.prefactor, fit.wedge_c, fit.rel_err
        ),
    ))
}

fn c5_gradient() -> Result<Verdict> {
    let g = gradient_bound_audit(
        &contact_cap(),
        S,
        &QuadratureConfig::default(),
        &dyadic_heights(LADDER_H0, LADDER_COUNT),
    )?;
    Ok(Verdict::new(
        g.pass && g.tail_non_increasing,
        format!(
            "sup q^(s+1)|grad H| {:.4} <= 1.25 c = {:.4} + {:.2e}; tail non-increasing {}",
            g.sup_scaled,
            1.25 * g.wedge_c,
            g.budget,
            g.tail_non_increasing
        ),
    ))
}

fn c6_axial_regression() -> Result<Verdict> {
    let cases = [
        ("2d cap", model(2, ShapeSpec::ball_cap(1.0, 0.5)), 48),
        ("2d hemisphere", model(2, ShapeSpec::ball_cap(1.0, 0.0)), 48),
        ("2d ellipse", ellipse(0.0), 48),
        ("3d cap", model(3, ShapeSpec::ball_cap(1.0, 0.5)), 16),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, m, fr) in &cases {
        let opts = AuditOptions {
            field_resolution: *fr,
            ..Default::default()
        };
        let cfg = if m.n() == 2 {
            fine()
        } else {
            QuadratureConfig::default()
        };
        let d = estimate_deficit(m, S, &cfg, &opts)?;
        let below = d.delta_s <= d.noise_floor;
        let dirs = default_directions(m.n());
        let mut worst: f64 = 0.0;
        for e in &dirs {
            let plane = critical_plane(m, e, &PlaneOptions::default())?;
            let (v, err) = symmetric_difference_volume(m, e, plane.lambda, LENS_RESOLUTION)?;
            // moving the plane by the probe error sweeps at most a slab of that width
            let slab = 2.0 * plane.probe_error * m.diameter().powi(m.n() as i32 - 1);
            worst = worst.max(v / (err + slab));
        }
        pass &= below && worst <= 1.0;
        parts.push(format!(
            "{name}: delta {:.1e} floor {:.1e}, {} dirs symdiff/err {worst:.2}",
            d.delta_s,
            d.noise_floor,
            dirs.len()
        ));
    }
    Ok(Verdict::new(pass, parts.join("; ")))
}

fn c7_theorem_a() -> Result<Verdict> {
    let opts = AuditOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for tilt in [0.0, 0.3] {
        let m = ellipse(tilt);
        let d = estimate_deficit(&m, S, &fine(), &opts)?;
        let recs = audit_theorem_a(&m, S, &default_directions(2), &d, &opts)?;
        let ok = recs.iter().all(|r| r.reflection.pass && r.weighted.pass);
        pass &= ok;
        let refl = recs
            .iter()
            .map(|r| r.reflection.slack)
            .fold(f64::INFINITY, f64::min);
        let wt = recs
            .iter()
            .map(|r| r.weighted.slack)
            .fold(f64::INFINITY, f64::min);
        parts.push(format!(
            "tilt {tilt}: delta {:.2e}, min slack reflection {refl:.3e} weighted {wt:.3e}",
            d.delta_s
        ));
    }
    Ok(Verdict::new(pass, parts.join("; ")))
}

fn gated_fixtures() -> [(f64, SetModel); 2] {
    [(0.0, ellipse(0.0)), (1e-4, ellipse(1e-4))]
}

fn c8_theorem_b() -> Result<Verdict> {
    let opts = AuditOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (tilt, m) in gated_fixtures() {
        let d = estimate_deficit(&m, S, &fine(), &opts)?;
        let heights = default_heights(&m, SLICE_HEIGHTS);
        let b = audit_theorem_b(&m, S, &default_directions(2), &heights, &d, &opts)?;
        let ok =
            b.guaranteed && b.heights.len() == SLICE_HEIGHTS && b.heights.iter().all(|h| h.pass);
        pass &= ok;
        let pinch = b
            .heights
            .iter()
            .map(|h| h.pinch.slack)
            .fold(f64::INFINITY, f64::min);
        parts.push(format!(
            "tilt {tilt}: sqrt(delta) {:.2e} vs delta0 {:.3}, {} heights, min pinch slack {pinch:.3e}",
            d.delta_s.sqrt(),
            b.gate.delta0,
            b.heights.len()
        ));
    }
    Ok(Verdict::new(pass, parts.join("; ")))
}

fn c9_lambda_bound() -> Result<Verdict> {
    let opts = AuditOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (tilt, m) in gated_fixtures() {
        let d = estimate_deficit(&m, S, &fine(), &opts)?;
        let b = audit_theorem_b(
            &m,
            S,
            &default_directions(2),
            &default_heights(&m, SLICE_HEIGHTS),
            &d,
            &opts,
        )?;
        pass &= b.lambdas.iter().all(|l| l.bound.pass);
        let worst = b.lambdas.iter().map(|l| l.lambda.abs()).fold(0.0, f64::max);
        let rhs = b
            .lambdas
            .iter()
            .map(|l| l.bound.rhs + l.bound.budget)
            .fold(f64::INFINITY, f64::min);
        parts.push(format!(
            "tilt {tilt}: {} dirs, max |lambda| {worst:.3e} <= {rhs:.3e}",
            b.lambdas.len()
        ));
    }
    Ok(Verdict::new(pass, parts.join("; ")))
}

fn c10_first_variation() -> Result<Verdict> {
    let cfg = QuadratureConfig::default();
    let ball = model(2, ShapeSpec::ball_cap(1.0, 2.0));
    let v = first_variation_check(&ball, NormalSpeed::Constant(1.0), S, &cfg, 0.05)?;
    // H^s(B_1) |dB_1| = (n - s) P_s(B_1)
    let q = BoundaryPoint::new(Vec3::new(1.0, 0.0, 2.0), Vec3::new(1.0, 0.0, 0.0));
    let h = &curvature_at(&ball, &[q], S, &cfg)?[0];
    let p = fractional_perimeter(&ball, S, &cfg)?;
    let (lhs, rhs) = (2.0 * PI * h.value, (2.0 - S) * p.value);
    let tol = 2.0 * PI * h.error_estimate + (2.0 - S) * p.error_estimate;
    let pass = v.relative_mismatch <= VARIATION_TOL && (lhs - rhs).abs() <= tol;
    Ok(Verdict::new(
        pass,
        format!(
            "radius family mismatch {:.2e}; H|dB| {lhs:.6} vs (n-s)P {rhs:.6}, gap {:.2e} <= {tol:.2e}",
            v.relative_mismatch,
            (lhs - rhs).abs()
        ),
    ))
}

fn lens_oracle(n: usize, t: f64) -> f64 {
    let d = 2.0 * t;
    let (ball, lens) = if n == 2 {
        (PI, 2.0 * (d / 2.0).acos() - 0.5 * d * (4.0 - d * d).sqrt())
    } else {
        (4.0 * PI / 3.0, PI * (4.0 + d) * (2.0 - d).powi(2) / 12.0)
    };
    2.0 * (ball - lens)
}

fn c11_oracles() -> Result<Verdict> {
    let cfg = QuadratureConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    // the capped kernel differs from the principal value by O(eps^(1-s))
    let rate = 2f64.powf(1.0 - S);
    let cases = [
        (
            model(2, ShapeSpec::ball_cap(1.0, 2.0)),
            Vec3::new(0.0, 0.0, 2.0),
            Vec3::new(0.6, 0.0, 0.8),
        ),
        (
            ellipse(0.0),
            Vec3::new(0.0, 0.0, 3.0),
            Vec3::new(0.0, 0.0, -1.0),
        ),
    ];
    for (m, from, dir) in &cases {
        let q = project_along(m, from, dir).expect("ray leaves the set");
        let pv = pv_curvature_integral(m, &q, S, &cfg)?;
        let eps: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
        let reg = eps
            .iter()
            .map(|&e| regularized_curvature_integral(m, &q, S, e, &cfg))
            .collect::<Result<Vec<_>>>()?;
        let gaps: Vec<f64> = reg.iter().map(|r| (r.value - pv.value).abs()).collect();
        let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
        let (a, b) = (&reg[reg.len() - 2], &reg[reg.len() - 1]);
        let extrapolated = (rate * b.value - a.value) / (rate - 1.0);
        let tol = pv.error_estimate + (rate * b.error_estimate + a.error_estimate) / (rate - 1.0);
        let gap = (extrapolated - pv.value).abs();
        pass &= shrinking && gap <= tol;
        parts.push(format!(
            "pv {:.5}: gap at eps 2^-8 {:.1e}, extrapolated gap {gap:.1e} <= {tol:.1e}",
            pv.value,
            gaps[gaps.len() - 1]
        ));
    }
    let ex = Vec3::new(1.0, 0.0, 0.0);
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let m = model(n, ShapeSpec::ball_cap(1.0, 2.0));
        for t in [0.1, 0.35] {
            let (v, _) = symmetric_difference_volume(&m, &ex, t, LENS_RESOLUTION)?;
            let want = lens_oracle(n, t);
            worst = worst.max((v - want).abs() / want);
        }
    }
    pass &= worst <= LENS_TOL;
    parts.push(format!("lens symdiff worst rel {worst:.2e}"));
    Ok(Verdict::new(pass, parts.join("; ")))
}

fn c12_determinism() -> Result<Verdict> {
    let cfg = QuadratureConfig::default();
    let m = ellipse(0.3);
    let run = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool");
        pool.install(|| Ok(curvature_field(&m, S, 24, &cfg)?.to_csv()))
    };
    let (one, eight, again) = (run(1)?, run(8)?, run(8)?);
    let in_process = one == eight && eight == again;

    let dir = tempfile::tempdir()?;
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"n": 2, "s": 0.5, "resolution": 24,
            "shape": {"type": "ellipsoid_cap", "semi_axes": [1.0, 1.2], "center_height": 0.3, "tilt": 0.3},
            "audit": {"field_resolution": 24}}"#,
    )?;
    let mut cli = true;
    for cmd in ["curvature", "moving-plane", "audit-a"] {
        let outputs: Vec<Vec<u8>> = ["1", "8", "8"]
            .iter()
            .enumerate()
            .map(|(i, threads)| {
                let out = dir.path().join(format!("{cmd}-{i}.json"));
                let status = Command::new(env!("CARGO_BIN_EXE_fracap"))
                    .args([cmd, "--config"])
                    .arg(&config)
                    .arg("--out")
                    .arg(&out)
                    .args(["--threads", threads, "--seedless"])
                    .output()?
                    .status;
                if !status.success() {
                    return Ok(Vec::new());
                }
                std::fs::read(out)
            })
            .collect::<std::io::Result<_>>()?;
        cli &= !outputs[0].is_empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
    }
    Ok(Verdict::new(
        in_process && cli,
        format!("field 1 vs 8 threads identical {in_process}; CLI reruns and thread counts identical {cli}"),
    ))
}

type Criterion = fn() -> Result<Verdict>;

fn main() {
    let criteria: [(u32, &str, Criterion); 12] = [
        (1, "ball constancy", c1_ball_constancy),
        (2, "homogeneity", c2_homogeneity),
        (3, "wedge scaling", c3_wedge_scaling),
        (4, "blow-up exponent", c4_blowup),
        (5, "gradient bound", c5_gradient),
        (6, "axial symmetry regression", c6_axial_regression),
        (7, "reflection and weighted asymmetry bounds", c7_theorem_a),
        (8, "slice pinching and dichotomy", c8_theorem_b),
        (9, "critical plane bound", c9_lambda_bound),
        (10, "first variation", c10_first_variation),
        (11, "oracle equivalence", c11_oracles),
        (12, "determinism", c12_determinism),
    ];
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (k, name, f) in criteria {
        if !only.is_empty() && !only.contains(&k) {
            continue;
        }
        let t = Instant::now();
        let v = f().unwrap_or_else(|e| Verdict::new(false, format!("error {}: {e}", e.kind())));
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {k:>2} {} {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
