//! Audits of the almost-symmetry estimates: reflection asymmetry, the
//! bound on critical positions and the pinching of horizontal slices.

use serde::{Deserialize, Serialize};

use super::constants::Constants;
use crate::error::Result;
use crate::geom::{coords, Vec3};
use crate::measures::curvature_field;
use crate::quadrature::QuadratureConfig;
use crate::shapes::{cross_section, geometric_summary, transform, SetModel, TransformOp};
use crate::symmetry::{
    critical_plane, deficit, symmetric_difference_volume, weighted_asymmetry, DeficitEstimate,
    PlaneOptions, TangencyCase, DEFAULT_HEIGHT_TOLERANCE_REL,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditOptions {
    /// Boundary sampling resolution of the curvature field.
    pub field_resolution: usize,
    /// Transverse resolution of the asymmetry volumes.
    pub volume_resolution: usize,
    pub height_tolerance_rel: f64,
    /// Lines through the axis used to trace three-dimensional slices.
    pub slice_resolution: usize,
    pub plane: PlaneOptions,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            field_resolution: 48,
            volume_resolution: 128,
            height_tolerance_rel: DEFAULT_HEIGHT_TOLERANCE_REL,
            slice_resolution: 720,
            plane: PlaneOptions::default(),
        }
    }
}

/// `delta_s` together with its noise floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitSummary {
    pub delta_s: f64,
    pub noise_floor: f64,
    pub value_error: f64,
    pub pairs: usize,
    pub field_digest: String,
}

impl From<&DeficitEstimate> for DeficitSummary {
    fn from(d: &DeficitEstimate) -> Self {
        DeficitSummary {
            delta_s: d.value,
            noise_floor: d.noise_floor,
            value_error: d.value_error,
            pairs: d.pairs,
            field_digest: d.field_digest.clone(),
        }
    }
}

impl DeficitSummary {
    /// `sqrt(delta_s)` and how much it may grow within its error.
    fn sqrt_with_budget(&self) -> (f64, f64) {
        let lo = self.delta_s.max(0.0).sqrt();
        (lo, (self.delta_s.max(0.0) + self.value_error).sqrt() - lo)
    }
}

/// Computes the field and `delta_s` once for a set of audits.
pub fn estimate_deficit(
    model: &SetModel,
    s: f64,
    cfg: &QuadratureConfig,
    opts: &AuditOptions,
) -> Result<DeficitSummary> {
    let field = curvature_field(model, s, opts.field_resolution, cfg)?;
    Ok((&deficit(&field, model, opts.height_tolerance_rel)?).into())
}

/// One inequality `lhs <= rhs` with an error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub budget: f64,
    pub slack: f64,
    pub pass: bool,
    /// `lhs <= rhs - budget`.
    pub strong_pass: bool,
}

impl Check {
    pub fn new(lhs: f64, rhs: f64, budget: f64) -> Self {
        Check {
            lhs,
            rhs,
            budget,
            slack: rhs - lhs,
            pass: lhs <= rhs + budget,
            strong_pass: lhs <= rhs - budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionRecord {
    pub e: Vec<f64>,
    pub lambda: f64,
    pub lambda_error: f64,
    pub tangency_case: TangencyCase,
    pub monotone: bool,
    /// `|E Δ ρ(E)| <= C1 diam^n sqrt(delta_s)`.
    pub reflection: Check,
    /// `int_{E Δ ρ(E)} dist(x, plane) <= 5/(2(n+s)) diam^{n+1} delta_s`.
    pub weighted: Check,
    /// The same with the right-hand side halved.
    pub weighted_half: Check,
    /// `|E Δ ρ(E)| <= weighted / beta + 2 beta diam^{n-1}` at the optimal beta.
    pub chebyshev: Check,
}

/// Reflection-asymmetry audit along each direction.
pub fn audit_theorem_a(
    model: &SetModel,
    s: f64,
    directions: &[Vec3],
    deficit: &DeficitSummary,
    opts: &AuditOptions,
) -> Result<Vec<DirectionRecord>> {
    let n = model.n();
    let diam = model.diameter();
    let volume = geometric_summary(model, opts.volume_resolution)?.volume;
    let k = Constants::new(n, s, volume, diam)?;
    let (sq, sq_budget) = deficit.sqrt_with_budget();
    let delta_budget = deficit.value_error;
    let dn = diam.powi(n as i32);
    directions
        .iter()
        .map(|e| {
            let plane = critical_plane(model, e, &opts.plane)?;
            let mu = plane.lambda;
            let (sym, sym_err) =
                symmetric_difference_volume(model, &plane.direction, mu, opts.volume_resolution)?;
            let (wa, wa_err) =
                weighted_asymmetry(model, &plane.direction, mu, opts.volume_resolution)?;
            // moving the plane by dmu changes the volumes by at most these rates
            let sym_rate = 4.0 * diam.powi(n as i32 - 1);
            let wa_rate = 4.0 * diam.powi(n as i32);
            let sym_budget = sym_err + sym_rate * plane.probe_error;
            let wa_budget = wa_err + wa_rate * plane.probe_error;
            let reflection = Check::new(sym, k.c1 * dn * sq, sym_budget + k.c1 * dn * sq_budget);
            let wf = k.weighted_factor() * diam.powi(n as i32 + 1);
            let weighted = Check::new(wa, wf * deficit.delta_s, wa_budget + wf * delta_budget);
            let weighted_half = Check::new(
                wa,
                0.5 * wf * deficit.delta_s,
                wa_budget + 0.5 * wf * delta_budget,
            );
            let beta = k.weighted_factor().sqrt() * diam * sq;
            let cheb_rhs = if beta > 0.0 {
                wa / beta + 2.0 * beta * diam.powi(n as i32 - 1)
            } else {
                f64::INFINITY
            };
            let chebyshev = Check::new(sym, cheb_rhs, sym_budget);
            Ok(DirectionRecord {
                e: coords(n, &plane.direction),
                lambda: mu,
                lambda_error: plane.probe_error,
                tangency_case: plane.tangency_case,
                monotone: plane.monotone,
                reflection,
                weighted,
                weighted_half,
                chebyshev,
            })
        })
        .collect()
}

/// Whether `delta_s` is below the threshold of the slice estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gate {
    pub delta0: f64,
    /// `delta_s <= delta0`.
    pub delta_below: bool,
    /// `sqrt(delta_s) <= delta0`, the form the critical-position bound uses.
    pub sqrt_delta_below: bool,
}

impl Gate {
    pub fn passed(&self) -> bool {
        self.sqrt_delta_below
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaRecord {
    pub e: Vec<f64>,
    pub lambda: f64,
    /// `|lambda_e| <= 4(n+1) C1 diam^{n+1} / |E| sqrt(delta_s)`.
    pub bound: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightRecord {
    pub h: f64,
    pub r_h: f64,
    #[serde(rename = "R_h")]
    pub big_r_h: f64,
    pub diam_slice: f64,
    /// `(R_h - r_h) / diam <= 2 C2 diam^n / |E| sqrt(delta_s)`.
    pub pinch: Check,
    /// `diam(E_h) > 6 C2 diam^{n+1} / |E| sqrt(delta_s)`.
    pub large_slice: bool,
    pub disk_contained: bool,
    /// `R_h / diam <= 7 C2 diam^n / |E| sqrt(delta_s)`, checked for small slices.
    pub small_slice: Option<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceAudit {
    pub gate: Gate,
    pub constants: Constants,
    /// Horizontal translation applied so the coordinate critical planes
    /// pass through the axis.
    pub recentering: Vec<f64>,
    pub lambdas: Vec<LambdaRecord>,
    pub heights: Vec<HeightRecord>,
    /// The estimates are only guaranteed when the gate passes.
    pub guaranteed: bool,
}

fn coordinate_directions(n: usize) -> Vec<Vec3> {
    (0..n - 1)
        .map(|i| {
            if i == 0 {
                Vec3::new(1.0, 0.0, 0.0)
            } else {
                Vec3::new(0.0, 1.0, 0.0)
            }
        })
        .collect()
}

/// Translates `model` so its coordinate critical planes contain the axis.
/// Also returns the shift and the uncertainty of the axis position.
pub fn recenter(model: &SetModel, opts: &PlaneOptions) -> Result<(SetModel, Vec<f64>, f64)> {
    let planes = coordinate_directions(model.n())
        .iter()
        .map(|e| critical_plane(model, e, opts))
        .collect::<Result<Vec<_>>>()?;
    let shift: Vec<f64> = planes.iter().map(|c| -c.lambda).collect();
    let error = planes
        .iter()
        .map(|c| c.probe_error.powi(2))
        .sum::<f64>()
        .sqrt();
    let moved = transform(
        model,
        TransformOp::Translate {
            vector: shift.clone(),
        },
    )?;
    Ok((moved, shift, error))
}

/// Critical-position bound along `directions` and slice pinching at
/// `heights`, after recentering.
pub fn audit_theorem_b(
    model: &SetModel,
    s: f64,
    directions: &[Vec3],
    heights: &[f64],
    deficit: &DeficitSummary,
    opts: &AuditOptions,
) -> Result<SliceAudit> {
    let n = model.n();
    let diam = model.diameter();
    let volume = geometric_summary(model, opts.volume_resolution)?.volume;
    let k = Constants::new(n, s, volume, diam)?;
    let (sq, sq_budget) = deficit.sqrt_with_budget();
    let gate = Gate {
        delta0: k.delta0,
        delta_below: deficit.delta_s <= k.delta0,
        sqrt_delta_below: sq <= k.delta0,
    };
    let (centred, recentering, axis_error) = recenter(model, &opts.plane)?;
    let shape = diam.powi(n as i32) / volume;

    let lambdas = directions
        .iter()
        .map(|e| {
            let c = critical_plane(&centred, e, &opts.plane)?;
            let factor = k.c2 * shape * diam;
            let budget = c.probe_error + axis_error + factor * sq_budget;
            Ok(LambdaRecord {
                e: coords(n, &c.direction),
                lambda: c.lambda,
                bound: Check::new(c.lambda.abs(), factor * sq, budget),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let angular = if n == 2 {
        0.0
    } else {
        let m = opts.slice_resolution.max(4) as f64;
        (std::f64::consts::PI / m).powi(2)
    };
    let heights = heights
        .iter()
        .map(|&h| {
            let cs = cross_section(&centred, h, opts.slice_resolution)?;
            let geo = cs.big_r_h * angular + 2.0 * axis_error;
            let pinch = Check::new(
                (cs.big_r_h - cs.r_h) / diam,
                2.0 * k.c2 * shape * sq,
                geo / diam + 2.0 * k.c2 * shape * sq_budget,
            );
            let large_slice = cs.diam_slice > 6.0 * k.c2 * shape * diam * sq;
            let small_slice = (!large_slice).then(|| {
                Check::new(
                    cs.big_r_h / diam,
                    7.0 * k.c2 * shape * sq,
                    geo / diam + 7.0 * k.c2 * shape * sq_budget,
                )
            });
            let pass = pinch.pass && small_slice.map_or(cs.inner_disk_contained, |c| c.pass);
            Ok(HeightRecord {
                h,
                r_h: cs.r_h,
                big_r_h: cs.big_r_h,
                diam_slice: cs.diam_slice,
                pinch,
                large_slice,
                disk_contained: cs.inner_disk_contained,
                small_slice,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SliceAudit {
        gate,
        constants: k,
        recentering,
        lambdas,
        heights,
        guaranteed: gate.passed(),
    })
}

/// Default directions: `±e_1` in the plane, eight equispaced otherwise.
pub fn default_directions(n: usize) -> Vec<Vec3> {
    if n == 2 {
        return vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)];
    }
    (0..8)
        .map(|k| {
            let a = std::f64::consts::PI * k as f64 / 4.0;
            Vec3::new(a.cos(), a.sin(), 0.0)
        })
        .collect()
}

/// Equispaced heights strictly inside `(0, max height)`.
pub fn default_heights(model: &SetModel, count: usize) -> Vec<f64> {
    let top = model.max_height();
    (1..=count)
        .map(|k| top * k as f64 / (count + 1) as f64)
        .collect()
}
